"""Regime classification: branch table, thresholds, totality."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singflow import (EXISTS, EXISTS_UNIQUE, NEEDS_B2, NOT_EXISTS,
                      OUTSIDE_THEORY, InsufficientDataError, ParameterError,
                      classify, classify_wave, custom_nonlinearity,
                      initial_b1, initial_b2, initial_b3, make_problem,
                      power_tail_weight, preset_curvature, preset_p_heat,
                      psi, signed_power, uniqueness_threshold)

ALL_VERDICTS = {EXISTS, EXISTS_UNIQUE, NOT_EXISTS, NEEDS_B2, OUTSIDE_THEORY}


def _flat():
    return initial_b1(lambda x: np.zeros_like(np.asarray(x, dtype=float)))


def _psi_b2(b, gamma):
    def values(x):
        xs = np.asarray(x, dtype=float)
        return psi(gamma, b - xs) + psi(gamma, b + xs)
    return initial_b2(values, gamma)


def _psi_b3(b, gamma):
    def values(x):
        xs = np.asarray(x, dtype=float)
        return psi(gamma, b - xs) + psi(gamma, b + xs)
    chat = psi(gamma, 2.0 * b)
    return initial_b3(values, gamma_plus=gamma, gamma_minus=gamma,
                      d_plus=1.0, d_minus=1.0, chat_plus=chat,
                      chat_minus=chat)


def _spec(f, g, u0=None, b=1.0):
    return make_problem(b, f, g, u0 if u0 is not None else _flat())


# ---------------------------------------------------------------------------
# threshold
# ---------------------------------------------------------------------------


def test_uniqueness_threshold_values():
    assert uniqueness_threshold(1.5) == 1.0
    assert uniqueness_threshold(2.0) == 0.0
    assert uniqueness_threshold(3.0) == 0.0
    assert uniqueness_threshold(1.25) == 3.0
    with pytest.raises(ParameterError):
        uniqueness_threshold(1.0)


# ---------------------------------------------------------------------------
# branch table
# ---------------------------------------------------------------------------


def test_slow_decay_bounded_datum_is_open():
    f, g = preset_curvature(2.0)          # alpha = 2.5
    assert classify(_spec(f, g)).verdict == NEEDS_B2


def test_slow_decay_b2_exists():
    f, g = preset_curvature(2.0)
    assert classify(_spec(f, g, _psi_b2(1.0, 1.0))).verdict == EXISTS


def test_slow_decay_b3_unique():
    f, g = preset_curvature(2.0)
    assert classify(_spec(f, g, _psi_b3(1.0, 0.5))).verdict == EXISTS_UNIQUE


@pytest.mark.parametrize("beta2", [1.0, 2.0 / 3.0])
def test_wave_range_bounded_data_exist(beta2):
    f, g = preset_curvature(beta2)        # alpha = 2, 1.5
    assert classify(_spec(f, g)).verdict == EXISTS


def test_wave_range_b3_at_threshold_is_unique():
    f, g = preset_curvature(2.0 / 3.0)    # alpha = 1.5, threshold gamma = 1
    assert classify(_spec(f, g, _psi_b3(1.0, 1.0))).verdict == EXISTS_UNIQUE


def test_wave_range_b3_below_threshold_not_unique():
    f, g = preset_curvature(2.0 / 3.0)
    assert classify(_spec(f, g, _psi_b3(1.0, 0.5))).verdict == EXISTS


def test_log_range_any_b3_is_unique():
    f, g = preset_curvature(1.0)          # alpha = 2, threshold gamma = 0
    assert classify(_spec(f, g, _psi_b3(1.0, 0.0))).verdict == EXISTS_UNIQUE


def test_borderline_alpha_exists():
    f, g = preset_curvature(0.5)          # alpha = 1
    assert classify(_spec(f, g)).verdict == EXISTS


def test_fast_decay_slow_f_exists():
    f, g = preset_p_heat(2.0, 0.5, 0.1)   # alpha = 0, beta = 0.5 < 1
    assert classify(_spec(f, g)).verdict == EXISTS


def test_fast_decay_fast_f_blows_up():
    f, g = preset_p_heat(2.0, 1.0, 0.1)   # alpha = 0, beta = 1 >= 1
    verdict = classify(_spec(f, g))
    assert verdict.verdict == NOT_EXISTS


def test_fast_decay_unbounded_below_is_outside_theory():
    f, g = preset_p_heat(2.0, 1.0, 0.1)

    def dip(x):
        xs = np.asarray(x, dtype=float)
        return np.where(np.abs(xs) < 1e-4, -np.inf, 0.0)

    assert classify(_spec(f, g, initial_b1(dip))).verdict == OUTSIDE_THEORY


def test_missing_growth_rate_raises():
    f = custom_nonlinearity(
        lambda s: np.asarray(s) / (1.0 + np.abs(np.asarray(s))))
    g = power_tail_weight(0.5, 1.0, 1.0)
    with pytest.raises(InsufficientDataError):
        classify(_spec(f, g))


# ---------------------------------------------------------------------------
# wave trichotomy
# ---------------------------------------------------------------------------


def test_classify_wave_trichotomy():
    cases = [(2.0, "exists_bounded"), (1.0, "exists_unbounded"),
             (2.0 / 3.0, "exists_unbounded"), (0.5, "not_exists"),
             (0.4, "not_exists")]
    for beta2, expected in cases:
        f, g = preset_curvature(beta2)
        assert classify_wave(_spec(f, g)) == expected, beta2


# ---------------------------------------------------------------------------
# totality and purity
# ---------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(-2.0, 3.5), beta=st.floats(0.1, 4.0))
def test_classifier_is_total_and_pure(alpha, beta):
    g = power_tail_weight(alpha, 1.0, 1.0)
    f = signed_power(beta)
    spec = _spec(f, g)
    first = classify(spec)
    assert first.verdict in ALL_VERDICTS
    assert classify(spec).verdict == first.verdict
    assert first.theorem and first.notes
