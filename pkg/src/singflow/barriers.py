"""Explicit sub- and super-solution families for u_t = f(g(u_x) u_xx).

Each constructor returns a `BarrierFunction`: a closed-form function of
(x, t) together with analytic first and second space derivatives and a time
derivative, the location and orientation of its kinks, and a validity
horizon.  `verify_inequality` then checks the defining differential
inequality pointwise on a stratified sample, which is the numerical stand-in
for the comparison arguments these families exist to feed.

Families
--------
h_tail          stationary function with prescribed wall divergence rates,
                bridged by a quintic so it is twice continuously
                differentiable.
subsolution_uk  bounded sub-solutions whose wall values grow in time and
                without bound in the parameter k; built from a circular arc
                matched to a doubly logarithmic boundary layer.
blowup_vL       sub-solutions equal to 1 at time zero that sweep a wave of
                height y^(-L) across the interval; their speed c_L grows
                with L, which is the engine of instantaneous interior
                blow-up in the fast-growth regime.
super_L         super-solutions with a time-dependent wall exponent L(t)
                fed by an ODE; valid up to a horizon T that grows with the
                steepness parameter nu.
convex_envelope greatest convex minorant of sampled data (stationary
                sub-solution with piecewise-linear graph).
translate_wave  exact traveling-wave solution W(x) + c t viewed as a
                barrier (residual identically zero).

The growth constants these constructions need (tail lower bounds for f and
g, admissible exponents) are never available in closed form, so they are
estimated by dense log-spaced sampling of the declared tails with a
conservative safety factor; every estimate is recorded on the returned
object and echoed in verification reports.
"""

from __future__ import annotations

import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect, brentq

from .errors import HorizonError, ParameterError, RegimeError
from .model import ProblemSpec
from .wave import WaveProfile

log = logging.getLogger(__name__)

# Tail constants are certified on |s| in [TAIL_LO, TAIL_HI] with TAIL_POINTS
# log-spaced samples and a multiplicative SAFETY margin (conservative
# direction), since no closed-form values exist.
TAIL_LO = 1.0
TAIL_HI = 1.0e10
TAIL_POINTS = 2001
SAFETY = 0.5

# Residual sampling.
RESIDUAL_SLACK = 1.0e-9
KINK_EXCLUSION = 1.0e-8
KINK_PROBE = 1.0e-10
KINK_SLOPE_TOL = 1.0e-12
T_STRATA = 32
EDGE_MARGIN = 1.0e-12
DEFAULT_T_CAP = 1.0

# Super-family construction.
C4_SAFETY = 2.0
C4_D_MIN = 1.0e-8
C4_D_POINTS = 60
C4_L_POINTS = 60
C4_L_GRID_MIN = 100.0
MIDDLE_SWEEP_POINTS = 2001
ODE_RTOL = 1.0e-8
ODE_ATOL = 1.0e-12

_SIDE_PATTERN = re.compile(r"^(sub|super)_strict\(\s*([^()\s]+)\s*\)$")


@dataclass(frozen=True)
class BarrierFunction:
    """A candidate sub- or super-solution with analytic partials.

    ``eval``, ``dx``, ``dxx``, ``dt`` accept a scalar or array x and a
    scalar time.  ``kinks`` lists (location(t), kind) pairs where kind is
    "convex" (admissible for sub-solutions) or "concave" (super-solutions);
    a location callable may return nan once the kink has left the domain.
    ``valid_until`` is the time horizon (math.inf when unlimited), and
    ``domain`` the open x-interval on which the closures are defined.
    """

    eval: Callable[..., Any]
    dx: Callable[..., Any]
    dxx: Callable[..., Any]
    dt: Callable[..., Any]
    kinks: Tuple[Tuple[Callable[[float], float], str], ...]
    valid_until: float
    family: str
    domain: Tuple[float, float] = (-math.inf, math.inf)
    params: Any = None
    # Closed-form one-sided slopes (left(t), right(t)) per kink, for kinks
    # whose slope field turns inside a layer narrower than any probe step.
    kink_slopes: Optional[Tuple[Tuple[Callable[[float], float],
                                      Callable[[float], float]], ...]] = None


@dataclass(frozen=True)
class SuperFamilyParams:
    """Constants behind a super_L construction.

    ``L`` is the wall exponent trajectory (callable on [0, T], cubic dense
    output of the adaptive integration); ``C4`` the certified ODE constant;
    ``c`` the additive drift covering the middle region.
    """

    mu: float
    L0: float
    nu: float
    c: float
    T: float
    L: Callable[[float], float]
    C4: float


def _thread_count(n_jobs: Optional[int]) -> int:
    if n_jobs is not None:
        return max(1, int(n_jobs))
    env = os.environ.get("SINGFLOW_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring malformed SINGFLOW_THREADS=%r", env)
    return min(8, os.cpu_count() or 1)


def _xt(core: Callable[[np.ndarray, float], np.ndarray]):
    """Wrap an (array, scalar-t) closure so scalar x comes back scalar."""

    def call(x, t):
        arr = np.asarray(x, dtype=float)
        out = core(np.atleast_1d(arr).astype(float), float(t))
        return float(out[0]) if arr.ndim == 0 else out

    return call


def _tail_floor(fn: Callable[[np.ndarray], np.ndarray], power: float,
                both_signs: bool) -> float:
    """min of fn(s)*|s|^power over the sampled tail, times the safety 1/2."""
    s = np.logspace(math.log10(TAIL_LO), math.log10(TAIL_HI), TAIL_POINTS)
    vals = np.asarray(fn(s), dtype=float) * s ** power
    lowest = float(np.min(vals))
    if both_signs:
        neg = np.asarray(fn(-s), dtype=float) * s ** power
        lowest = min(lowest, float(np.min(neg)))
    if not math.isfinite(lowest) or lowest <= 0.0:
        raise ParameterError(
            "tail sampling produced a nonpositive bound; the declared tail "
            "behavior does not hold on the sampled range")
    return SAFETY * lowest


def _stationary(core_val, core_dx, core_dxx, kinks, family, domain, params):
    zero = _xt(lambda xs, t: np.zeros_like(xs))
    return BarrierFunction(eval=_xt(core_val), dx=_xt(core_dx),
                           dxx=_xt(core_dxx), dt=zero, kinks=tuple(kinks),
                           valid_until=math.inf, family=family,
                           domain=domain, params=params)


# ---------------------------------------------------------------------------
# h_tail: prescribed wall rates with a quintic interior bridge
# ---------------------------------------------------------------------------


def _tail_value(gamma: float, d_coef: float, s: np.ndarray):
    """d_coef * psi_gamma(s) and its first/second derivatives in s."""
    if gamma == 0.0:
        return (-d_coef * np.log(s), -d_coef / s, d_coef / s ** 2)
    v = d_coef * s ** (-gamma)
    return (v, -gamma * v / s, gamma * (gamma + 1.0) * v / s ** 2)


def h_tail(b: float, gamma_plus: float, gamma_minus: float, d_plus: float,
           d_minus: float, b0: float) -> BarrierFunction:
    """Stationary barrier with exact divergence tails outside [-b0, b0].

    On [b0, b) the value is d_plus * psi_{gamma_plus}(b - x), mirrored on
    (-b, -b0]; in between sits the unique quintic matching value, slope and
    curvature at both junctions, so the result is twice continuously
    differentiable on the whole open interval.
    """
    if not 0.0 < b0 < b:
        raise ParameterError(f"need 0 < b0 < b, got b0 = {b0}, b = {b}")
    if gamma_plus < 0.0 or gamma_minus < 0.0:
        raise ParameterError("divergence rates must be nonnegative")
    if d_plus <= 0.0 or d_minus <= 0.0:
        raise ParameterError("rate coefficients must be positive")

    # Junction data; x-derivatives pick up the chain-rule sign of s(x).
    vp, dp1, dp2 = _tail_value(gamma_plus, d_plus, np.asarray(b - b0))
    vm, dm1, dm2 = _tail_value(gamma_minus, d_minus, np.asarray(b - b0))
    right = (float(vp), float(-dp1), float(dp2))     # s = b - x, ds/dx = -1
    left = (float(vm), float(dm1), float(dm2))       # s = b + x, ds/dx = +1

    # Quintic in the scaled variable xi = x/b0, conditions at xi = -1, +1.
    rows, rhs = [], []
    for xi, (val, sl, cu) in ((-1.0, left), (1.0, right)):
        rows.append([xi ** j for j in range(6)])
        rhs.append(val)
        rows.append([0.0] + [j * xi ** (j - 1) for j in range(1, 6)])
        rhs.append(sl * b0)
        rows.append([0.0, 0.0] + [j * (j - 1) * xi ** (j - 2)
                                  for j in range(2, 6)])
        rhs.append(cu * b0 ** 2)
    coef = np.linalg.solve(np.asarray(rows), np.asarray(rhs))
    poly = np.polynomial.Polynomial(coef)
    dpoly = poly.deriv()
    ddpoly = poly.deriv(2)

    def pieces(xs: np.ndarray, order: int) -> np.ndarray:
        out = np.empty_like(xs)
        mid = np.abs(xs) <= b0
        hi = xs > b0
        lo = xs < -b0
        if np.any(mid):
            xi = xs[mid] / b0
            if order == 0:
                out[mid] = poly(xi)
            elif order == 1:
                out[mid] = dpoly(xi) / b0
            else:
                out[mid] = ddpoly(xi) / b0 ** 2
        if np.any(hi):
            v, d1, d2 = _tail_value(gamma_plus, d_plus, b - xs[hi])
            out[hi] = v if order == 0 else (-d1 if order == 1 else d2)
        if np.any(lo):
            v, d1, d2 = _tail_value(gamma_minus, d_minus, b + xs[lo])
            out[lo] = v if order == 0 else (d1 if order == 1 else d2)
        return out

    params = {"b": b, "b0": b0, "gamma_plus": gamma_plus,
              "gamma_minus": gamma_minus, "d_plus": d_plus,
              "d_minus": d_minus}
    return _stationary(lambda xs, t: pieces(xs, 0),
                       lambda xs, t: pieces(xs, 1),
                       lambda xs, t: pieces(xs, 2),
                       (), "h_tail", (-b, b), params)


# ---------------------------------------------------------------------------
# subsolution_uk: bounded sub-solutions with growing wall values
# ---------------------------------------------------------------------------


def sub_uk(spec: ProblemSpec, k: float) -> BarrierFunction:
    """Bounded sub-solution: circular arc core, log-log boundary layer.

    The layer occupies (x(k,t), b] with x(k, 0) = b (pure arc at time zero)
    and x(k, t) decreasing to b - y_k.  Wall values grow linearly in time at
    speed f(-M log y_k), which diverges as k grows: the mechanism that
    forces infinite boundary data in the limit.  Kinks at +-x(k, t) are
    convex, with the arc and layer slopes both equal to k at time zero.
    """
    if k <= 0.0:
        raise ParameterError(f"k must be positive, got {k}")
    alpha = spec.g.alpha
    if alpha > 2.0:
        raise RegimeError(
            f"this family needs weight decay alpha <= 2, got {alpha}")
    b = spec.b

    # Certified tail floor: g(s) >= 2 M |s|^-2 on the sampled range.
    m_floor = 0.5 * _tail_floor(spec.g.eval, 2.0, both_signs=True)

    def y_equation(y: float) -> float:
        return y * math.log(y) + 1.0 / k

    y_top = math.exp(-1.0)
    if y_equation(y_top) > 0.0:
        raise ParameterError(
            f"k = {k} is too small for the boundary-layer root (need the "
            "layer thickness equation solvable, k >= e)")
    y_k = float(bisect(y_equation, 1e-300, y_top, xtol=1e-14,
                       rtol=4.0 * np.finfo(float).eps))
    if y_k >= b:
        raise ParameterError(
            f"layer thickness y_k = {y_k:.3g} does not fit in half-width "
            f"b = {b}; increase k")

    r_k = b * math.sqrt(1.0 + 1.0 / k ** 2)
    log_yk = math.log(y_k)
    speed = float(np.asarray(spec.f.eval(-m_floor * log_yk), dtype=float))
    log.info("sub_uk: k = %g, y_k = %.6g, M = %.6g, wall speed = %.6g",
             k, y_k, m_floor, speed)

    def state(t: float):
        """Scalar time-dependent quantities, overflow-guarded."""
        grow = speed * t
        big_e = -log_yk * math.exp(grow) if grow < 700.0 else math.inf
        e_neg = math.exp(-big_e) if big_e < 700.0 else 0.0
        # d/dt exp(-E) = -speed * E * exp(-E); E exp(-E) underflows cleanly.
        e_term = big_e * e_neg if big_e < 700.0 else 0.0
        x_k = e_neg + b - y_k
        dx_k = -speed * e_term
        return big_e, e_neg, x_k, dx_k

    def split(xs: np.ndarray, x_k: float):
        a = np.abs(xs)
        outer = a > x_k
        return a, outer, ~outer

    def layer_logxi(a: np.ndarray, big_e: float, e_neg: float):
        gap = np.maximum(b - a, 0.0)
        xi = e_neg + gap
        with np.errstate(divide="ignore"):
            log_xi = np.logaddexp(-big_e, np.log(gap))
        return xi, log_xi

    def val(xs: np.ndarray, t: float) -> np.ndarray:
        big_e, e_neg, x_k, _ = state(t)
        a, outer, mid = split(xs, x_k)
        out = np.empty_like(a)
        if np.any(mid):
            out[mid] = -np.sqrt(r_k ** 2 - xs[mid] ** 2)
        if np.any(outer):
            xi, log_xi = layer_logxi(a[outer], big_e, e_neg)
            arc = math.sqrt(r_k ** 2 - x_k ** 2)
            out[outer] = np.log(log_xi / log_yk) - arc
        return out

    def d1(xs: np.ndarray, t: float) -> np.ndarray:
        big_e, e_neg, x_k, _ = state(t)
        a, outer, mid = split(xs, x_k)
        out = np.empty_like(a)
        if np.any(mid):
            out[mid] = xs[mid] / np.sqrt(r_k ** 2 - xs[mid] ** 2)
        if np.any(outer):
            xi, log_xi = layer_logxi(a[outer], big_e, e_neg)
            out[outer] = np.sign(xs[outer]) * (-1.0) / (xi * log_xi)
        return out

    def d2(xs: np.ndarray, t: float) -> np.ndarray:
        big_e, e_neg, x_k, _ = state(t)
        a, outer, mid = split(xs, x_k)
        out = np.empty_like(a)
        if np.any(mid):
            out[mid] = r_k ** 2 / (r_k ** 2 - xs[mid] ** 2) ** 1.5
        if np.any(outer):
            xi, log_xi = layer_logxi(a[outer], big_e, e_neg)
            out[outer] = -(log_xi + 1.0) / (xi * log_xi) ** 2
        return out

    def d_t(xs: np.ndarray, t: float) -> np.ndarray:
        big_e, e_neg, x_k, dx_k = state(t)
        a, outer, mid = split(xs, x_k)
        out = np.zeros_like(a)
        if np.any(outer):
            xi, log_xi = layer_logxi(a[outer], big_e, e_neg)
            arc_rate = x_k * dx_k / math.sqrt(r_k ** 2 - x_k ** 2)
            out[outer] = dx_k / (xi * log_xi) + arc_rate
        return out

    def kink_loc(sign: float):
        return lambda t: sign * state(float(t))[2]

    params = {"k": k, "y_k": y_k, "r_k": r_k, "M": m_floor, "s0": TAIL_LO,
              "wall_speed": speed,
              "note": "tail bound certified on the sampled range only"}
    return BarrierFunction(eval=_xt(val), dx=_xt(d1), dxx=_xt(d2),
                           dt=_xt(d_t),
                           kinks=((kink_loc(1.0), "convex"),
                                  (kink_loc(-1.0), "convex")),
                           valid_until=math.inf, family="subsolution_uk",
                           domain=(-b, b), params=params)


# ---------------------------------------------------------------------------
# blowup_vL: unit initial data, wave of height y^-L, speed growing in L
# ---------------------------------------------------------------------------


def _vl_conditions(length: float, b: float, alpha: float, m_g: float,
                   l_g: float, l_f: float) -> bool:
    slope_ok = length / (2.0 * b) >= l_g
    arg_ok = (m_g * (2.0 * b) ** (alpha - 2.0)
              * length ** (1.0 - alpha) * (length + 1.0) >= 2.0 * l_f)
    return slope_ok and arg_ok


def sub_vL(spec: ProblemSpec, L: float) -> BarrierFunction:
    """Sub-solution equal to 1 at t = 0 whose wall wave steepens with L.

    Only admissible in the fast-growth regime (alpha < 1 and
    beta >= 1/(1-alpha)).  The wave region carries value yhat^-L with
    yhat = (3b - x)/(2b) - c_L min(t, 1/c_L); the front x = b - 2b c_L t is
    a convex kink that crosses the interval in time 1/c_L, after which the
    barrier is stationary.  c_L grows like L^(2 beta - alpha beta - 1), so
    interior values blow up along L -> infinity.
    """
    alpha = spec.g.alpha
    beta = spec.f.beta
    if beta is None:
        raise ParameterError(
            "this family needs a declared growth rate for f")
    if alpha >= 1.0 or beta < 1.0 / (1.0 - alpha):
        raise RegimeError(
            f"needs alpha < 1 and beta >= 1/(1-alpha); got alpha = {alpha}, "
            f"beta = {beta}")
    b = spec.b

    m_g = _tail_floor(spec.g.eval, alpha, both_signs=True)
    m_f = _tail_floor(spec.f.eval, -beta, both_signs=False)
    l_g = 1.0
    l_f = 1.0

    l_min = 1.0
    while not _vl_conditions(l_min, b, alpha, m_g, l_g, l_f):
        l_min *= 2.0
        if l_min > 1e12:
            raise ParameterError(
                "no admissible wave exponent below 1e12; tail constants "
                "too weak")
    if L < l_min:
        raise ParameterError(
            f"wave exponent L = {L} is below the smallest admissible value "
            f"{l_min:g} for these nonlinearities")

    c_l = (m_f * m_g ** beta * L ** (2.0 * beta - alpha * beta - 1.0)
           / (2.0 ** beta * (2.0 * b) ** ((2.0 - alpha) * beta)))
    t_cross = 1.0 / c_l
    log.info("sub_vL: L = %g, M_g = %.6g, M_f = %.6g, c_L = %.6g",
             L, m_g, m_f, c_l)

    def yhat(xs: np.ndarray, t: float) -> np.ndarray:
        return (3.0 * b - xs) / (2.0 * b) - c_l * min(t, t_cross)

    # Powers y^(-L-2) overflow to inf close to the wall for large L; inf is
    # the honest value there, so the overflow warning is silenced.
    def val(xs: np.ndarray, t: float) -> np.ndarray:
        y = yhat(xs, t)
        out = np.ones_like(y)
        wave = y < 1.0
        with np.errstate(over="ignore"):
            out[wave] = y[wave] ** (-L)
        return out

    def d1(xs: np.ndarray, t: float) -> np.ndarray:
        y = yhat(xs, t)
        out = np.zeros_like(y)
        wave = y < 1.0
        with np.errstate(over="ignore"):
            out[wave] = (L / (2.0 * b)) * y[wave] ** (-L - 1.0)
        return out

    def d2(xs: np.ndarray, t: float) -> np.ndarray:
        y = yhat(xs, t)
        out = np.zeros_like(y)
        wave = y < 1.0
        with np.errstate(over="ignore"):
            out[wave] = (L * (L + 1.0) / (4.0 * b ** 2)) * y[wave] ** (-L - 2.0)
        return out

    def d_t(xs: np.ndarray, t: float) -> np.ndarray:
        y = yhat(xs, t)
        out = np.zeros_like(y)
        if t < t_cross:
            wave = y < 1.0
            with np.errstate(over="ignore"):
                out[wave] = L * c_l * y[wave] ** (-L - 1.0)
        return out

    def front(t: float) -> float:
        t = float(t)
        if t <= 0.0 or t >= t_cross:
            return math.nan
        return b - 2.0 * b * c_l * t

    params = {"L": L, "L0": l_min, "c_L": c_l, "M_g": m_g, "M_f": m_f,
              "L_g": l_g, "L_f": l_f,
              "note": "tail bounds certified on the sampled range only"}
    return BarrierFunction(eval=_xt(val), dx=_xt(d1), dxx=_xt(d2),
                           dt=_xt(d_t), kinks=((front, "convex"),),
                           valid_until=math.inf, family="blowup_vL",
                           domain=(-b, b), params=params)


# ---------------------------------------------------------------------------
# super_L: time-dependent wall exponent driven by an ODE
# ---------------------------------------------------------------------------


def super_mu(alpha: float, beta: float) -> float:
    """Auxiliary exponent max{0, (beta(2-alpha)-1)/(1-beta(1-alpha))}."""
    den = 1.0 - beta * (1.0 - alpha)
    if den <= 0.0:
        raise RegimeError(
            f"exponent undefined: needs beta(1-alpha) < 1, got alpha = "
            f"{alpha}, beta = {beta}")
    return max(0.0, (beta * (2.0 - alpha) - 1.0) / den)


def super_family(spec: ProblemSpec, v0, L0: float, nu: float
                 ) -> BarrierFunction:
    """Super-solution with steepening wall layers, valid up to a horizon T.

    ``v0`` supplies the smooth datum being dominated: either None (zero) or
    a triple of callables (value, first derivative, second derivative).
    The wall layers carry L(t)^mu (2 - 2|x|/b)^(-L(t)) with L(t) integrated
    from L'(t) = C4 L^(beta(1-alpha)(1+mu)-mu) (L+1)^beta; the middle piece
    is a shallow circular arc of steepness sqrt(nu).  The horizon T is where
    the kink admissibility at |x| = 2b/3 would fail; it grows without bound
    in nu.  C4 and the drift constant c are certified by dense sweeps with
    a factor-2 margin and recorded on the returned parameters.
    """
    alpha = spec.g.alpha
    beta = spec.f.beta
    if beta is None:
        raise ParameterError(
            "this family needs a declared growth rate for f")
    if not (alpha == 1.0 or (alpha < 1.0 and beta < 1.0 / (1.0 - alpha))):
        raise RegimeError(
            f"needs alpha = 1, or alpha < 1 with beta < 1/(1-alpha); got "
            f"alpha = {alpha}, beta = {beta}")
    b = spec.b
    mu = super_mu(alpha, beta)

    if v0 is None:
        v0_fns = (lambda x: np.zeros_like(np.asarray(x, dtype=float)),) * 3
    elif isinstance(v0, (tuple, list)) and len(v0) == 3:
        v0_fns = tuple(v0)
    else:
        raise ParameterError(
            "v0 must be None or a (value, slope, curvature) triple of "
            "callables")

    def v0_at(i: int, xs: np.ndarray) -> np.ndarray:
        res = np.asarray(v0_fns[i](xs), dtype=float)
        return np.zeros_like(xs) + res

    den = 1.0 - beta * (1.0 - alpha)
    l0_bound = max((1.0 - beta * (1.0 - alpha)) / (beta * (2.0 - alpha)),
                   beta * (2.0 - alpha) / den)
    if L0 <= l0_bound:
        raise ParameterError(
            f"initial exponent L0 = {L0} must exceed {l0_bound:.6g} for "
            "these growth rates")

    c_star = max(8.0 * b / 9.0, 16.0 / 9.0, 4.0 / b ** 2)

    def steepness_needed(length: float) -> float:
        return (c_star * length ** (2.0 * mu + 2.0)
                * 1.5 ** (2.0 * length + 2.0))

    if nu <= steepness_needed(L0):
        raise ParameterError(
            f"steepness nu = {nu:g} must exceed {steepness_needed(L0):.6g} "
            f"for L0 = {L0}")

    # Terminal exponent: where the kink-admissibility reserve is used up.
    hi = max(2.0 * L0, 4.0)
    while steepness_needed(hi) < nu:
        hi *= 2.0
    l_max = brentq(lambda ln: steepness_needed(ln) - nu, L0, hi,
                   xtol=1e-12, rtol=4.0 * np.finfo(float).eps)

    root_nu = math.sqrt(nu)
    two_thirds = 2.0 * b / 3.0
    r_arc_sq = two_thirds ** 2 + two_thirds ** 2 / nu ** 2
    a_exp = beta * (1.0 - alpha) * (1.0 + mu) - mu

    def arc_gap_sq(xs: np.ndarray) -> np.ndarray:
        # r_arc^2 - x^2 in a cancellation-free form: for nu beyond 1e8 the
        # naive difference rounds to zero at the junctions.
        return ((two_thirds - xs) * (two_thirds + xs)
                + two_thirds ** 2 / nu ** 2)

    # C4 certification sweep over (wall distance, exponent).  The exponent
    # grid top is held at a fixed floor so sweeps for nested nu ranges share
    # the constant, keeping T strictly monotone in nu.
    d_grid = np.logspace(math.log10(C4_D_MIN), math.log10(2.0 / 3.0),
                         C4_D_POINTS)
    l_grid = np.logspace(math.log10(L0),
                         math.log10(max(2.0 * l_max, C4_L_GRID_MIN)),
                         C4_L_POINTS)
    x_of_d = b * (2.0 - d_grid) / 2.0
    v0x = v0_at(1, x_of_d)
    v0xx = v0_at(2, x_of_d)
    ratio_max = 0.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for length in l_grid:
            vx = (2.0 / b) * length ** (mu + 1.0) \
                * d_grid ** (-length - 1.0) + v0x
            vxx = (4.0 / b ** 2) * length ** (mu + 1.0) * (length + 1.0) \
                * d_grid ** (-length - 2.0) + v0xx
            weight = np.asarray(spec.g.eval(vx), dtype=float)
            rhs = np.asarray(spec.f.eval(2.0 * weight * vxx), dtype=float)
            denom = (length ** (beta * (1.0 - alpha) * (1.0 + mu))
                     * (length + 1.0) ** beta * np.log(1.0 / d_grid))
            ratios = rhs * d_grid ** length / denom
            # Entries past float range have a positive d-exponent (the
            # closed admissibility condition), so their true value tends
            # to zero; dropping the non-finite ones is conservative.
            good = np.isfinite(ratios)
            if good.any():
                ratio_max = max(ratio_max, float(np.max(ratios[good])))
    c4 = C4_SAFETY * ratio_max

    # Drift constant covering the middle region (time-independent there).
    xs_mid = np.linspace(-two_thirds, two_thirds, MIDDLE_SWEEP_POINTS)
    gap_sq = arc_gap_sq(xs_mid)
    vmx = xs_mid / (root_nu * np.sqrt(gap_sq)) + v0_at(1, xs_mid)
    vmxx = r_arc_sq / (root_nu * gap_sq ** 1.5) + v0_at(2, xs_mid)
    with np.errstate(over="ignore"):
        wmid = np.asarray(spec.g.eval(vmx), dtype=float)
        fmid = np.asarray(spec.f.eval(2.0 * wmid * vmxx), dtype=float)
    if not np.all(np.isfinite(fmid)):
        raise ParameterError(
            "middle-region drift estimate overflowed; steepness nu is too "
            "large for these nonlinearities")
    drift = max(2.0 * float(np.max(np.abs(fmid))), 1.0)

    def ode_rhs(t: float, y):
        length = y[0]
        return [c4 * length ** a_exp * (length + 1.0) ** beta]

    # Horizon estimate by quadrature of dL / L', then the exact event time.
    l_quad = np.logspace(math.log10(L0), math.log10(l_max), 4001)
    t_guess = float(np.trapezoid(1.0 / (c4 * l_quad ** a_exp
                                        * (l_quad + 1.0) ** beta), l_quad))

    def hit_top(t: float, y):
        return y[0] - l_max
    hit_top.terminal = True
    hit_top.direction = 1.0

    horizon = None
    t_hi = max(2.5 * t_guess, 1e-9)
    for _ in range(8):
        sol = solve_ivp(ode_rhs, (0.0, t_hi), [L0], rtol=ODE_RTOL,
                        atol=ODE_ATOL, dense_output=True, events=hit_top,
                        method="RK45")
        if sol.t_events[0].size:
            horizon = float(sol.t_events[0][0])
            break
        t_hi *= 4.0
    if horizon is None:
        raise ParameterError(
            "exponent ODE never reached its terminal value; parameters "
            "are outside the family's workable range")
    dense = sol.sol
    log.info("super_family: mu = %g, L0 = %g, nu = %g, C4 = %.6g, "
             "c = %.6g, T = %.6g, L(T) = %.6g", mu, L0, nu, c4, drift,
             horizon, l_max)

    def exponent_at(t: float) -> float:
        t = float(t)
        if t < 0.0 or t > horizon:
            raise HorizonError(
                f"t = {t:.6g} outside the validity window [0, "
                f"{horizon:.6g}]")
        return float(dense(t)[0])

    offset = L0 ** mu * 1.5 ** L0

    def common_tail(t: float) -> float:
        return drift * t + 1.0 / (horizon - t) - 1.0 / horizon - offset

    def regions(xs: np.ndarray):
        a = np.abs(xs)
        outer = a >= 2.0 * b / 3.0
        return a, outer, ~outer

    def val(xs: np.ndarray, t: float) -> np.ndarray:
        length = exponent_at(t)
        a, outer, mid = regions(xs)
        out = v0_at(0, xs) + common_tail(t)
        if np.any(outer):
            d = 2.0 - 2.0 * a[outer] / b
            out[outer] += length ** mu * d ** (-length)
        if np.any(mid):
            out[mid] += (-np.sqrt(arc_gap_sq(xs[mid])) / root_nu
                         + 2.0 * b / (3.0 * nu * root_nu)
                         + length ** mu * 1.5 ** length)
        return out

    def d1(xs: np.ndarray, t: float) -> np.ndarray:
        length = exponent_at(t)
        a, outer, mid = regions(xs)
        out = v0_at(1, xs)
        if np.any(outer):
            d = 2.0 - 2.0 * a[outer] / b
            out[outer] += (np.sign(xs[outer]) * (2.0 / b)
                           * length ** (mu + 1.0) * d ** (-length - 1.0))
        if np.any(mid):
            out[mid] += xs[mid] / (root_nu * np.sqrt(arc_gap_sq(xs[mid])))
        return out

    def d2(xs: np.ndarray, t: float) -> np.ndarray:
        length = exponent_at(t)
        a, outer, mid = regions(xs)
        out = v0_at(2, xs)
        if np.any(outer):
            d = 2.0 - 2.0 * a[outer] / b
            out[outer] += ((4.0 / b ** 2) * length ** (mu + 1.0)
                           * (length + 1.0) * d ** (-length - 2.0))
        if np.any(mid):
            out[mid] += r_arc_sq / (root_nu * arc_gap_sq(xs[mid]) ** 1.5)
        return out

    def d_t(xs: np.ndarray, t: float) -> np.ndarray:
        length = exponent_at(t)
        rate = c4 * length ** a_exp * (length + 1.0) ** beta
        mu_term = mu * length ** (mu - 1.0) if mu > 0.0 else 0.0
        base = drift + 1.0 / (horizon - t) ** 2
        a, outer, mid = regions(xs)
        out = np.full_like(a, base)
        if np.any(outer):
            d = 2.0 - 2.0 * a[outer] / b
            out[outer] += (rate * d ** (-length)
                           * (mu_term + length ** mu * np.log(1.0 / d)))
        if np.any(mid):
            out[mid] += (rate * 1.5 ** length
                         * (mu_term + length ** mu * math.log(1.5)))
        return out

    params = SuperFamilyParams(mu=mu, L0=L0, nu=nu, c=drift, T=horizon,
                               L=exponent_at, C4=c4)
    kinks = ((lambda t: 2.0 * b / 3.0, "concave"),
             (lambda t: -2.0 * b / 3.0, "concave"))

    # Closed-form one-sided slopes at the junctions.  The arc slope climbs
    # to sqrt(nu) inside a layer of width about b/nu^2, far below any probe
    # step, so a finite-difference check there would understate the margin.
    def outer_slope(t: float) -> float:
        ell = exponent_at(t)
        return (2.0 / b) * ell ** (mu + 1.0) * 1.5 ** (ell + 1.0)

    v0x_plus = float(v0_at(1, np.array([two_thirds]))[0])
    v0x_minus = float(v0_at(1, np.array([-two_thirds]))[0])
    kink_slopes = (
        (lambda t: root_nu + v0x_plus,
         lambda t: outer_slope(t) + v0x_plus),
        (lambda t: -outer_slope(t) + v0x_minus,
         lambda t: -root_nu + v0x_minus),
    )
    return BarrierFunction(eval=_xt(val), dx=_xt(d1), dxx=_xt(d2),
                           dt=_xt(d_t), kinks=kinks, valid_until=horizon,
                           family="super_L", domain=(-b, b), params=params,
                           kink_slopes=kink_slopes)


# ---------------------------------------------------------------------------
# convex_envelope and translate_wave
# ---------------------------------------------------------------------------


def convex_envelope(x, values) -> BarrierFunction:
    """Greatest convex minorant of sampled data, as a stationary barrier.

    Monotone-chain construction; the result is piecewise linear with zero
    curvature almost everywhere and convex kinks at the hull vertices, so
    it is always an admissible stationary sub-solution.
    """
    xs = np.asarray(x, dtype=float)
    vals = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != vals.shape or xs.size < 2:
        raise ParameterError("need matching 1-d arrays with >= 2 points")
    if np.any(np.diff(xs) <= 0.0):
        raise ParameterError("sample abscissae must be strictly increasing")
    if not np.all(np.isfinite(vals)):
        raise ParameterError("sampled values must be finite")

    hull: List[Tuple[float, float]] = []
    for px, py in zip(xs, vals):
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            if (ax - ox) * (py - oy) - (ay - oy) * (px - ox) <= 0.0:
                hull.pop()
            else:
                break
        hull.append((float(px), float(py)))
    hx = np.asarray([p[0] for p in hull])
    hy = np.asarray([p[1] for p in hull])
    slopes = np.diff(hy) / np.diff(hx)

    def val(q: np.ndarray, t: float) -> np.ndarray:
        return np.interp(q, hx, hy)

    def d1(q: np.ndarray, t: float) -> np.ndarray:
        idx = np.clip(np.searchsorted(hx, q, side="right") - 1, 0,
                      slopes.size - 1)
        return slopes[idx]

    def make_loc(xv: float):
        return lambda t: xv

    kinks = tuple((make_loc(float(hx[j])), "convex")
                  for j in range(1, hx.size - 1))
    params = {"n_input": int(xs.size), "n_vertices": int(hx.size)}
    return _stationary(val, d1, lambda q, t: np.zeros_like(q), kinks,
                       "convex_envelope", (float(hx[0]), float(hx[-1])),
                       params)


def translate_wave(profile: WaveProfile, spec: ProblemSpec,
                   shift: float = 0.0) -> BarrierFunction:
    """The exact traveling solution W(x) + c t + shift as a barrier.

    Its residual vanishes identically (the curvature closure is derived
    from the quadrature identity g(W_x) W_xx = f^{-1}(c), so no numerical
    differentiation enters), which makes it the calibration case for
    verify_inequality: it must pass as both a sub- and a super-solution.
    """
    if abs(profile.b - spec.b) > 1e-12 * max(1.0, spec.b):
        raise ParameterError(
            f"profile half-width {profile.b} does not match the problem "
            f"half-width {spec.b}")
    q = profile.f_inv_c

    def val(xs: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(profile.w(xs), dtype=float) + profile.c * t + shift

    def d1(xs: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(profile.wx(xs), dtype=float)

    def d2(xs: np.ndarray, t: float) -> np.ndarray:
        slope = np.asarray(profile.wx(xs), dtype=float)
        return q / np.asarray(spec.g.eval(slope), dtype=float)

    def d_t(xs: np.ndarray, t: float) -> np.ndarray:
        return np.full_like(xs, profile.c)

    params = {"c": profile.c, "shift": shift}
    return BarrierFunction(eval=_xt(val), dx=_xt(d1), dxx=_xt(d2),
                           dt=_xt(d_t), kinks=(), valid_until=math.inf,
                           family="translate_wave",
                           domain=(-profile.b, profile.b), params=params)


# ---------------------------------------------------------------------------
# verify_inequality
# ---------------------------------------------------------------------------


def _parse_side(side) -> Tuple[str, float, int, bool]:
    """Return (label, factor, orientation, check_dt_sign)."""
    if isinstance(side, (tuple, list)) and len(side) == 2:
        name, delta = str(side[0]).strip(), float(side[1])
        side = f"{name}({delta:g})" if name.endswith("_strict") else name
    else:
        name, delta = str(side).strip(), None
        m = _SIDE_PATTERN.match(name)
        if m:
            name = m.group(1) + "_strict"
            delta = float(m.group(2))
    if name == "sub":
        return "sub", 1.0, -1, False
    if name == "super":
        return "super", 1.0, +1, False
    if name == "sub_strict":
        if delta is None or delta < 0.0:
            raise ParameterError("sub_strict needs a nonnegative margin")
        return f"sub_strict({delta:g})", 1.0 / (1.0 + delta), -1, False
    if name == "super_strict":
        if delta is None or delta < 0.0:
            raise ParameterError("super_strict needs a nonnegative margin")
        return f"super_strict({delta:g})", 1.0 + delta, +1, True
    raise ParameterError(
        f"unknown side {side!r}; expected sub, super, sub_strict(d) or "
        "super_strict(d)")


def _kink_checks(bf: BarrierFunction, times: Sequence[float],
                 x_lo: float, x_hi: float, probe: float) -> List[Dict]:
    checks: List[Dict] = []
    for idx, (loc, kind) in enumerate(bf.kinks):
        slopes = None
        if bf.kink_slopes is not None and idx < len(bf.kink_slopes):
            slopes = bf.kink_slopes[idx]
        worst = None
        for t in times:
            xk = float(loc(t))
            if not math.isfinite(xk):
                continue
            if not (x_lo + 2.0 * probe < xk < x_hi - 2.0 * probe):
                continue
            if slopes is not None:
                left = float(slopes[0](t))
                right = float(slopes[1](t))
            else:
                left = float(bf.dx(xk - probe, t))
                right = float(bf.dx(xk + probe, t))
            margin = (right - left) if kind == "convex" else (left - right)
            if worst is None or margin < worst["margin"]:
                worst = {"kink": idx, "kind": kind, "t": t, "x": xk,
                         "left_slope": left, "right_slope": right,
                         "margin": margin, "analytic": slopes is not None}
        if worst is not None:
            scale = max(1.0, abs(worst["left_slope"]),
                        abs(worst["right_slope"]))
            worst["pass"] = bool(worst["margin"] >= -KINK_SLOPE_TOL * scale)
            checks.append(worst)
    return checks


def _constant_estimates(params) -> Dict[str, float]:
    if isinstance(params, SuperFamilyParams):
        return {"mu": params.mu, "L0": params.L0, "nu": params.nu,
                "c": params.c, "T": params.T, "C4": params.C4}
    if isinstance(params, dict):
        return {key: val for key, val in params.items()
                if isinstance(val, (int, float))}
    return {}


def verify_inequality(bf: BarrierFunction, spec: ProblemSpec, side,
                      samples: int, t_window: Optional[Tuple[float, float]]
                      = None, seed: int = 0,
                      n_jobs: Optional[int] = None) -> Dict:
    """Check the barrier's differential inequality on a stratified sample.

    The residual dt - f(factor * g(dx) * dxx) must be <= 0 for sub sides
    and >= 0 for super sides, within an absolute slack of 1e-9; the factor
    is 1/(1+delta) for sub_strict(delta) and (1+delta) for
    super_strict(delta), which also requires dt >= -slack (the
    nonnegative-speed form).  Sampling is stratified over time slices and
    space bins with a fixed seed, keeps an exclusion radius of 1e-8 around
    kinks, and adds one-sided slope checks at every kink inside the domain.
    Time slices run over ``t_window`` (default: up to min(horizon, 1));
    windows beyond the validity horizon raise a horizon error.
    """
    if samples < 1000:
        raise ParameterError(f"need at least 1000 samples, got {samples}")
    label, factor, orientation, check_dt = _parse_side(side)

    hi_default = bf.valid_until
    if math.isfinite(hi_default):
        hi_default = hi_default * (1.0 - 1e-3)
    t_lo, t_hi = t_window if t_window is not None else \
        (0.0, min(hi_default, DEFAULT_T_CAP))
    if t_hi > bf.valid_until:
        raise HorizonError(
            f"time window up to {t_hi:g} exceeds the validity horizon "
            f"{bf.valid_until:g}")
    if not (0.0 <= t_lo < t_hi):
        raise ParameterError(f"bad time window ({t_lo}, {t_hi})")

    x_lo = max(-spec.b, bf.domain[0])
    x_hi = min(spec.b, bf.domain[1])
    margin = EDGE_MARGIN * max(1.0, x_hi - x_lo)
    x_lo, x_hi = x_lo + margin, x_hi - margin
    if x_hi <= x_lo:
        raise ParameterError("barrier domain does not overlap the problem "
                             "domain")

    n_t = T_STRATA
    n_x = -(-samples // n_t)
    streams = np.random.SeedSequence(seed).spawn(n_t)

    def run_stratum(j: int):
        rng = np.random.default_rng(streams[j])
        t = t_lo + (t_hi - t_lo) * (j + rng.random()) / n_t
        bins = (np.arange(n_x) + rng.random(n_x)) / n_x
        xs = x_lo + (x_hi - x_lo) * bins
        locs = [float(loc(t)) for loc, _ in bf.kinks]
        locs = [xk for xk in locs if math.isfinite(xk)]
        if locs:
            for _ in range(60):
                near = np.zeros(xs.shape, dtype=bool)
                for xk in locs:
                    near |= np.abs(xs - xk) <= KINK_EXCLUSION
                if not near.any():
                    break
                redraw = (np.flatnonzero(near) + rng.random(int(near.sum()))
                          ) / n_x
                xs[near] = x_lo + (x_hi - x_lo) * redraw
        dxv = np.asarray(bf.dx(xs, t), dtype=float)
        dxxv = np.asarray(bf.dxx(xs, t), dtype=float)
        dtv = np.asarray(bf.dt(xs, t), dtype=float)
        weight = np.asarray(spec.g.eval(dxv), dtype=float)
        # Barriers may legitimately reach inf near a wall or front; an
        # inf - inf there yields nan, which argmax/argmin treat as extreme,
        # so a nan residual fails the check loudly rather than hiding.
        with np.errstate(over="ignore", invalid="ignore"):
            res = dtv - np.asarray(spec.f.eval(factor * weight * dxxv),
                                   dtype=float)
        i_hi = int(np.argmax(res))
        i_lo = int(np.argmin(res))
        return (t, res[i_hi], xs[i_hi], res[i_lo], xs[i_lo],
                float(np.min(dtv)), xs.size)

    workers = min(_thread_count(n_jobs), n_t)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_stratum, range(n_t)))
    else:
        results = [run_stratum(j) for j in range(n_t)]

    worst_hi = max(results, key=lambda r: r[1])
    worst_lo = min(results, key=lambda r: r[3])
    dt_min = min(r[5] for r in results)
    total = sum(r[6] for r in results)

    if orientation < 0:
        worst_res, worst_point = worst_hi[1], (worst_hi[2], worst_hi[0])
        residual_ok = worst_res <= RESIDUAL_SLACK
    else:
        worst_res, worst_point = worst_lo[3], (worst_lo[4], worst_lo[0])
        residual_ok = worst_res >= -RESIDUAL_SLACK

    times = [r[0] for r in results]
    probe = KINK_PROBE * max(1.0, spec.b)
    kink_checks = _kink_checks(bf, times, x_lo, x_hi, probe)
    kinks_ok = all(entry["pass"] for entry in kink_checks)
    dt_ok = (dt_min >= -RESIDUAL_SLACK) if check_dt else True

    report = {
        "family": bf.family,
        "side": label,
        "n_samples": total,
        "worst_residual": float(worst_res),
        "worst_point": (float(worst_point[0]), float(worst_point[1])),
        "kink_checks": kink_checks,
        "constant_estimates": _constant_estimates(bf.params),
        "pass": bool(residual_ok and kinks_ok and dt_ok),
    }
    if check_dt:
        report["dt_min"] = float(dt_min)
    return report
