"""Explicit monotone scheme: CFL, comparison, caps and rate fits."""

from __future__ import annotations

import numpy as np
import pytest

from singflow import (ParameterError, cap_study, cfl_limit, initial_b1,
                      initial_b3, make_field, make_problem, preset_curvature,
                      preset_p_heat, psi, solve, step)


def _flat():
    return initial_b1(lambda x: np.zeros_like(np.asarray(x, dtype=float)))


def _curvature_spec(beta2=1.0, b=1.0):
    f, g = preset_curvature(beta2)
    return make_problem(b, f, g, _flat())


# ---------------------------------------------------------------------------
# grid fields
# ---------------------------------------------------------------------------


def test_make_field_clamps_at_cap():
    field = make_field(1.0, 9, lambda x: 10.0 * np.ones_like(x), cap=3.0)
    assert np.all(field.values == 3.0)
    assert field.ghost_left == 3.0
    assert field.dx == pytest.approx(0.2)
    np.testing.assert_allclose(field.nodes[[0, -1]], [-0.8, 0.8])


def test_make_field_validation():
    with pytest.raises(ParameterError):
        make_field(0.0, 9, lambda x: x, cap=1.0)
    with pytest.raises(ParameterError):
        make_field(1.0, 2, lambda x: x, cap=1.0)
    with pytest.raises(ParameterError):
        make_field(1.0, 9, np.zeros(5), cap=1.0)
    with pytest.raises(ParameterError):
        make_field(1.0, 9, lambda x: np.full_like(x, np.nan), cap=1.0)


def test_asymmetric_caps():
    field = make_field(1.0, 9, lambda x: 0.0 * x, cap=2.0, cap_minus=-1.0)
    assert field.ghost_left == -1.0
    assert field.cap == 2.0


def test_cfl_limit_scales_with_grid():
    spec = _curvature_spec()
    coarse = make_field(1.0, 50, lambda x: 0.1 * np.sin(x), cap=2.0)
    fine = make_field(1.0, 100, lambda x: 0.1 * np.sin(x), cap=2.0)
    dt_c, dt_f = cfl_limit(coarse, spec), cfl_limit(fine, spec)
    assert dt_c > 0.0 and dt_f > 0.0
    ratio = (coarse.dx / fine.dx) ** 2
    assert dt_c / dt_f == pytest.approx(ratio, rel=0.3)


# ---------------------------------------------------------------------------
# evolution properties
# ---------------------------------------------------------------------------


def test_max_principle_and_no_violations():
    f, g = preset_curvature(1.0)
    spec = make_problem(1.0, f, g, initial_b1(
        lambda x: 0.5 - 0.5 * np.asarray(x, dtype=float) ** 2))
    report = solve(spec, 100, 5.0, 0.02)
    assert report.comparison_violations == 0
    assert not report.diverged
    assert float(np.max(report.final.values)) <= 5.0 + 1e-9


def test_lockstep_comparison_preserves_order():
    spec = _curvature_spec()
    lo = make_field(1.0, 100, lambda x: -0.5 + 0.2 * np.cos(3.0 * x), 4.0)
    hi = make_field(1.0, 100, lambda x: 0.1 + 0.3 * np.sin(2.0 * x) ** 2, 4.0)
    t_end = 0.02
    while lo.time < t_end:
        dt = 0.9 * min(cfl_limit(lo, spec), cfl_limit(hi, spec))
        dt = min(dt, t_end - lo.time)
        lo = step(lo, spec, dt)
        hi = step(hi, spec, dt)
        assert np.all(lo.values <= hi.values + 1e-12)


def test_odd_data_stay_odd():
    """With f odd, g even and mirrored caps the scheme is equivariant under
    (x, u) -> (-x, -u), so odd data evolve into odd states."""
    f, g = preset_curvature(1.0)
    spec = make_problem(1.0, f, g, initial_b1(
        lambda x: 0.5 * np.sin(np.pi * np.asarray(x, dtype=float))))
    field = make_field(1.0, 64, spec.u0.values, cap=3.0, cap_minus=-3.0)
    for _ in range(200):
        field = step(field, spec, 0.5 * cfl_limit(field, spec))
    assert float(np.max(np.abs(field.values + field.values[::-1]))) < 1e-10


def test_snapshots_land_on_exact_times():
    spec = _curvature_spec()
    times = [0.0, 0.004, 0.01]
    report = solve(spec, 60, 2.0, 0.01, snapshot_times=times)
    assert [t for t, _ in report.snapshots] == times
    np.testing.assert_allclose(report.snapshots[0][1], 0.0)
    assert report.final.time == pytest.approx(0.01)


def test_cfl_collapse_flags_divergence():
    f, g = preset_p_heat(2.0, 2.0, 0.1)
    spec = make_problem(1.0, f, g, _flat())
    report = solve(spec, 20, 1e13, 0.1)
    assert report.diverged
    assert report.blowup_time == 0.0


def test_solve_validation():
    spec = _curvature_spec()
    with pytest.raises(ParameterError):
        solve(spec, 60, 2.0, 0.0)


# ---------------------------------------------------------------------------
# boundary-rate fitting on final states
# ---------------------------------------------------------------------------


def test_b3_run_reports_boundary_rates():
    f, g = preset_curvature(1.0)
    b = 1.0

    def values(x):
        xs = np.asarray(x, dtype=float)
        return psi(1.0, b - xs) + psi(1.0, b + xs)

    u0 = initial_b3(values, 1.0, 1.0, 1.0, 1.0,
                    chat_plus=psi(1.0, 2.0), chat_minus=psi(1.0, 2.0))
    spec = make_problem(b, f, g, u0)
    report = solve(spec, 1801, 1e4, 2e-5)
    assert report.rate_fit is not None
    for side in ("plus", "minus"):
        gamma_fit, d_fit, spread = report.rate_fit[side]
        assert gamma_fit == 1.0
        assert d_fit == pytest.approx(1.0, rel=0.01)
        assert spread < 0.01


def test_narrow_window_reports_no_rates():
    f, g = preset_curvature(1.0)
    b = 1.0

    def values(x):
        xs = np.asarray(x, dtype=float)
        return psi(1.0, b - xs) + psi(1.0, b + xs)

    u0 = initial_b3(values, 1.0, 1.0, 1.0, 1.0,
                    chat_plus=psi(1.0, 2.0), chat_minus=psi(1.0, 2.0))
    spec = make_problem(b, f, g, u0)
    assert solve(spec, 200, 30.0, 1e-5).rate_fit is None


# ---------------------------------------------------------------------------
# cap ladders
# ---------------------------------------------------------------------------


def test_cap_study_saturates_in_existence_regime():
    study = cap_study(_curvature_spec(), 100, [2.0, 4.0, 6.0, 8.0],
                      probe=(0.0, 0.05))
    assert study.verdict == "saturating"
    assert len(study.rows) == 4
    assert [row["cap"] for row in study.rows] == [2.0, 4.0, 6.0, 8.0]


def test_cap_study_validation():
    spec = _curvature_spec()
    with pytest.raises(ParameterError):
        cap_study(spec, 100, [4.0, 2.0], probe=(0.0, 0.05))
    with pytest.raises(ParameterError):
        cap_study(spec, 100, [2.0, 4.0], probe=(1.5, 0.05))
    with pytest.raises(ParameterError):
        cap_study(spec, 100, [2.0, 4.0], probe=(0.0, 0.0))
