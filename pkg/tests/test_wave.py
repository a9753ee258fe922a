"""Traveling-wave profiles: quadrature, speed identity, boundary rates."""

from __future__ import annotations

import math

import numpy as np
import pytest

from singflow import (ParameterError, RegimeError, check_points,
                      compute_wave, divergence_rate, g_antiderivative,
                      initial_b1, make_problem, preset_curvature,
                      profile_residuals)

HALF_PI = math.pi / 2.0


def _spec(beta2, b=1.0):
    f, g = preset_curvature(beta2)
    return make_problem(b, f, g, initial_b1(
        lambda x: np.zeros_like(np.asarray(x, dtype=float))))


def test_arctan_oracle():
    """For f = id and g = 1/(1+s^2) on (-pi/2, pi/2) the profile ODE
    integrates in closed form: W'(x) = tan x, so W = -log cos x and the
    speed is exactly 1."""
    spec = _spec(1.0, b=HALF_PI)
    profile = compute_wave(spec)
    assert profile.c == pytest.approx(1.0, abs=1e-8)
    xs = check_points(profile)
    err = np.max(np.abs(profile.w(xs) + np.log(np.cos(xs))))
    assert err < 1e-6


def test_speed_identity():
    for beta2, b in ((1.0, 1.0), (2.0 / 3.0, 0.7), (2.0, 1.3)):
        spec = _spec(beta2, b=b)
        profile = compute_wave(spec)
        q = g_antiderivative(spec.g, np.inf) / (2.0 * b)
        assert profile.f_inv_c == pytest.approx(q, rel=1e-10)
        assert profile.c == pytest.approx(float(spec.f.eval(q)), rel=1e-10)


def test_profile_is_symmetric_convex():
    profile = compute_wave(_spec(1.0), w0=0.0)
    xs = np.linspace(0.0, 0.9, 40)
    np.testing.assert_allclose(profile.w(xs), profile.w(-xs), atol=1e-9)
    assert float(profile.w(np.array([0.0]))[0]) == pytest.approx(0.0,
                                                                 abs=1e-12)
    slopes = profile.wx(xs)
    assert np.all(np.diff(slopes) > 0.0)


def test_w0_shifts_vertically():
    base = compute_wave(_spec(1.0), w0=0.0)
    lifted = compute_wave(_spec(1.0), w0=3.0)
    xs = np.linspace(-0.8, 0.8, 17)
    np.testing.assert_allclose(lifted.w(xs), base.w(xs) + 3.0, atol=1e-9)


def test_slope_map_matches_profile_differences():
    profile = compute_wave(_spec(1.0))
    xs = np.linspace(-0.7, 0.7, 29)
    h = 1e-6
    fd = (profile.w(xs + h) - profile.w(xs - h)) / (2.0 * h)
    np.testing.assert_allclose(profile.wx(xs), fd, rtol=1e-5, atol=1e-7)


def test_residuals_small_and_refinement_monotone():
    spec = _spec(1.0)
    coarse = compute_wave(spec, n_grid=2 ** 10)
    fine = compute_wave(spec, n_grid=2 ** 11)
    res_coarse = np.max(profile_residuals(coarse, spec,
                                          check_points(coarse)))
    res_fine = np.max(profile_residuals(fine, spec, check_points(fine)))
    assert res_coarse < 1e-6
    assert res_fine <= res_coarse


def test_divergence_rate_log_branch():
    spec = _spec(1.0, b=HALF_PI)       # alpha = 2: W ~ -log(wall distance)
    d_plus, d_minus = divergence_rate(compute_wave(spec), spec.g.alpha)
    assert d_plus == pytest.approx(1.0, rel=0.02)
    assert d_minus == pytest.approx(1.0, rel=0.02)


def test_divergence_rate_power_branch_symmetric():
    spec = _spec(2.0 / 3.0)            # alpha = 1.5: W ~ D / (wall distance)
    d_plus, d_minus = divergence_rate(compute_wave(spec), spec.g.alpha)
    assert d_plus > 0.0 and d_minus > 0.0
    assert d_plus == pytest.approx(d_minus, rel=1e-6)


def test_divergence_rate_skipped_for_bounded_waves():
    spec = _spec(2.0)                  # alpha = 2.5: bounded profile
    profile = compute_wave(spec)
    assert divergence_rate(profile, spec.g.alpha) == (None, None)
    assert np.max(profile.w_values) < np.inf
    with pytest.raises(ParameterError):
        divergence_rate(profile, 1.0)


def test_no_wave_below_critical_decay():
    with pytest.raises(RegimeError):
        compute_wave(_spec(0.5))       # alpha = 1


def test_check_points_avoid_walls():
    profile = compute_wave(_spec(1.0))
    xs = check_points(profile)
    assert xs.size > 0
    dist = np.minimum(profile.b - xs, profile.b + xs)
    assert np.min(dist) >= profile.b * 2.0 ** -26
