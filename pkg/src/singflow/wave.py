"""Traveling-wave profiles by tail-corrected quadrature and monotone inversion.

A traveling wave W(x) + c t of the flow u_t = f(g(u_x) u_xx) on (-b, b)
solves the profile identity g(W_x) W_xx = f^{-1}(c).  Integrating once gives
G(W_x(x)) = (x + b) G(inf) / (2b) with G the antiderivative of g from -inf,
so the whole construction reduces to

    c    = f(G(inf) / (2b)),
    W_x  = G^{-1}((x + b) G(inf) / (2b)),
    W    = w0 + (H(W_x(x)) - H(W_x(0))) / f^{-1}(c),

where H(s) = int_0^s t g(t) dt.  The last line is the substitution
w = G(s) applied to the integral of W_x, and makes W exact wherever W_x is:
no quadrature runs over the steep boundary layers.

G converges only for tail exponents alpha > 1; the integrable tails are
handled analytically.  Beyond a cut |s| > S0 the weight is replaced by its
declared asymptote cg * |s|^(-alpha), with S0 doubled until (i) the true
weight matches the asymptote to 1e-7 at the cut and (ii) the tail-corrected
total G(inf) is stable to 1e-11 between doublings.  Everything downstream
(speed, inversion, H) is then exact for the hybrid weight, which matches g
pointwise inside the cut and to 1e-7 relative outside.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (DomainError, ParameterError, RateExtractionError,
                     RegimeError)
from .model import DiffusionWeight, ProblemSpec, psi

# Tail cut search.
_S0_INIT = 8.0
_S0_MAX = 1.0e13
_TAIL_POINT_RTOL = 1.0e-7
_TAIL_TOTAL_RTOL = 1.0e-11

# Panel quadrature.
_PANEL_ABS_TOL = 1.0e-14
_PANEL_MAX_DEPTH = 28
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)

# Inversion.
_BISECT_ITERS = 80

# Geometric boundary grid x = +-(b - b 2^-j).
_J_LO = 3
_J_HI = 40
_J_CAP = 50          # beyond this b - b*2^-j collides with b in float
_SLOPE_TARGET = 1.0e6
_WX_CAP = 1.0e280

# Residual check points keep a float-safe distance from the walls.
_CHECK_J_MAX = 26

_RATE_SPREAD_MAX = 0.10


def _gl_partial(fn, a, s):
    """Vectorized 24-node Gauss-Legendre integral of fn over [a_i, s_i]."""
    a = np.asarray(a, dtype=float)
    s = np.asarray(s, dtype=float)
    half = 0.5 * (s - a)
    pts = a[..., None] + half[..., None] * (_GL_NODES + 1.0)
    vals = np.asarray(fn(pts), dtype=float)
    return half * (vals @ _GL_WEIGHTS)


class _TailCorrectedG:
    """Hybrid antiderivative G(s) = int_{-inf}^s g with analytic tails.

    Inside [-S0, S0] the integral runs over the true weight on an adaptively
    refined dyadic panel table; outside, over the declared asymptote, which
    integrates and inverts in closed form.  Also carries H(s) = int_0^s t g,
    needed to reconstruct profiles without boundary-layer quadrature.
    """

    def __init__(self, g: DiffusionWeight):
        if g.alpha <= 1.0:
            raise RegimeError(
                f"the weight integral diverges for tail exponent alpha = "
                f"{g.alpha:g} <= 1; no finite antiderivative exists")
        self.g = g
        self.alpha = float(g.alpha)
        self._pick_cut()
        self._build_tables()

    # -- construction ------------------------------------------------------

    def _tail_mass(self, cg: float, s0: float) -> float:
        return cg * s0 ** (1.0 - self.alpha) / (self.alpha - 1.0)

    def _finite_part(self, s0: float) -> float:
        bps = self._breakpoints(s0)
        total = 0.0
        for a, bb in zip(bps[:-1], bps[1:]):
            total += self._refine(a, bb)[1]
        return total

    def _breakpoints(self, s0: float) -> np.ndarray:
        k_max = int(np.ceil(np.log2(s0 * 64.0)))
        pos = s0 * 2.0 ** (-np.arange(k_max + 1, dtype=float))
        return np.concatenate([-pos, [0.0], pos[::-1]])

    def _refine(self, a: float, bb: float):
        """Adaptive bisection of one panel; returns (subpanels, integral)."""
        g = self.g.eval
        out = []
        stack = [(a, bb, 0)]
        total = 0.0
        while stack:
            lo, hi, depth = stack.pop()
            mid = 0.5 * (lo + hi)
            whole = float(_gl_partial(g, lo, hi))
            halves = float(_gl_partial(g, lo, mid)) + \
                float(_gl_partial(g, mid, hi))
            if depth >= _PANEL_MAX_DEPTH or \
                    abs(whole - halves) <= _PANEL_ABS_TOL * (1.0 + abs(halves)):
                out.append((lo, hi))
                total += halves
            else:
                stack.append((mid, hi, depth + 1))
                stack.append((lo, mid, depth + 1))
        out.sort()
        return out, total

    def _pick_cut(self) -> None:
        g, alpha = self.g, self.alpha
        s0 = _S0_INIT
        prev_total = None
        while True:
            dev_p = abs(float(np.asarray(g.eval(np.asarray(s0))))
                        * s0 ** alpha / g.cg_plus - 1.0)
            dev_m = abs(float(np.asarray(g.eval(np.asarray(-s0))))
                        * s0 ** alpha / g.cg_minus - 1.0)
            total = (self._finite_part(s0)
                     + self._tail_mass(g.cg_minus, s0)
                     + self._tail_mass(g.cg_plus, s0))
            settled = (prev_total is not None and
                       abs(total - prev_total) <=
                       _TAIL_TOTAL_RTOL * max(1.0, abs(total)))
            if max(dev_p, dev_m) <= _TAIL_POINT_RTOL and settled:
                break
            prev_total = total
            s0 *= 2.0
            if s0 > _S0_MAX:
                raise ParameterError(
                    "weight tail never stabilizes against its declared "
                    "asymptote; check alpha and the tail constants")
        self.s0 = s0

    def _build_tables(self) -> None:
        g = self.g
        subpanels = []
        for a, bb in zip(self._breakpoints(self.s0)[:-1],
                         self._breakpoints(self.s0)[1:]):
            subpanels.extend(self._refine(a, bb)[0])
        bps = np.array([p[0] for p in subpanels] + [subpanels[-1][1]])
        vals_g = _gl_partial(g.eval, bps[:-1], bps[1:])
        vals_h = _gl_partial(lambda t: t * np.asarray(g.eval(t)),
                             bps[:-1], bps[1:])

        self.bps = bps
        self.tm_minus = self._tail_mass(g.cg_minus, self.s0)
        self.tm_plus = self._tail_mass(g.cg_plus, self.s0)
        self.cum = np.concatenate([[self.tm_minus],
                                   self.tm_minus + np.cumsum(vals_g)])
        self.total = float(self.cum[-1] + self.tm_plus)

        hraw = np.concatenate([[0.0], np.cumsum(vals_h)])
        i0 = int(np.searchsorted(bps, 0.0))
        if bps[i0] != 0.0:
            raise AssertionError("panel table lost the origin breakpoint")
        self.hcum = hraw - hraw[i0]

    # -- evaluation --------------------------------------------------------

    def value(self, s):
        """G(s), vectorized; accepts +-inf."""
        arr = np.asarray(s, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr).astype(float)
        out = np.empty_like(arr)
        alpha = self.alpha

        below = arr <= -self.s0
        above = arr >= self.s0
        mid = ~(below | above)
        if np.any(below):
            # |s|^(1-alpha) -> 0 handles s = -inf for free.
            out[below] = self.g.cg_minus * np.abs(arr[below]) ** \
                (1.0 - alpha) / (alpha - 1.0)
        if np.any(above):
            gap = self.g.cg_plus * arr[above] ** (1.0 - alpha) / (alpha - 1.0)
            out[above] = self.total - gap
        if np.any(mid):
            sm = arr[mid]
            idx = np.clip(np.searchsorted(self.bps, sm, side="right") - 1,
                          0, len(self.bps) - 2)
            out[mid] = self.cum[idx] + _gl_partial(self.g.eval,
                                                   self.bps[idx], sm)
        return float(out[0]) if scalar else out

    def h_value(self, s):
        """H(s) = int_0^s t g(t) dt for the hybrid weight, vectorized."""
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        scalar = np.asarray(s).ndim == 0
        out = np.empty_like(arr)
        alpha, s0 = self.alpha, self.s0

        def tail_increment(cg, mag):
            if alpha == 2.0:
                return cg * np.log(mag / s0)
            return cg * (mag ** (2.0 - alpha) - s0 ** (2.0 - alpha)) / (2.0 - alpha)

        below = arr <= -s0
        above = arr >= s0
        mid = ~(below | above)
        if np.any(below):
            out[below] = self.hcum[0] + tail_increment(self.g.cg_minus,
                                                       -arr[below])
        if np.any(above):
            out[above] = self.hcum[-1] + tail_increment(self.g.cg_plus,
                                                        arr[above])
        if np.any(mid):
            sm = arr[mid]
            idx = np.clip(np.searchsorted(self.bps, sm, side="right") - 1,
                          0, len(self.bps) - 2)
            out[mid] = self.hcum[idx] + _gl_partial(
                lambda t: t * np.asarray(self.g.eval(t)),
                self.bps[idx], sm)
        return float(out[0]) if scalar else out

    def inv_from_top(self, gap):
        """G^{-1}(total - gap) for gap inside the upper analytic tail."""
        g = np.asarray(gap, dtype=float)
        alpha = self.alpha
        return (self.g.cg_plus / ((alpha - 1.0) * g)) ** (1.0 / (alpha - 1.0))

    def inverse(self, w):
        """G^{-1}(w), vectorized bisection inside, closed form in the tails."""
        arr = np.atleast_1d(np.asarray(w, dtype=float))
        scalar = np.asarray(w).ndim == 0
        if np.any(arr <= 0.0) or np.any(arr >= self.total):
            raise DomainError(
                f"G^-1 needs arguments strictly inside (0, {self.total:g})")
        out = np.empty_like(arr)
        alpha = self.alpha

        below = arr <= self.cum[0]
        above = arr >= self.cum[-1]
        mid = ~(below | above)
        if np.any(below):
            out[below] = -(self.g.cg_minus / ((alpha - 1.0) * arr[below])) \
                ** (1.0 / (alpha - 1.0))
        if np.any(above):
            out[above] = self.inv_from_top(self.total - arr[above])
        if np.any(mid):
            wm = arr[mid]
            idx = np.clip(np.searchsorted(self.cum, wm, side="right") - 1,
                          0, len(self.bps) - 2)
            lo = self.bps[idx].copy()
            hi = self.bps[idx + 1].copy()
            anchor = self.bps[idx]
            tau = wm - self.cum[idx]
            for _ in range(_BISECT_ITERS):
                mid_pt = 0.5 * (lo + hi)
                high = _gl_partial(self.g.eval, anchor, mid_pt) > tau
                hi = np.where(high, mid_pt, hi)
                lo = np.where(high, lo, mid_pt)
            out[mid] = 0.5 * (lo + hi)
        return float(out[0]) if scalar else out


_G_CACHE: "weakref.WeakKeyDictionary[DiffusionWeight, _TailCorrectedG]" = \
    weakref.WeakKeyDictionary()


def _antiderivative(g: DiffusionWeight) -> _TailCorrectedG:
    table = _G_CACHE.get(g)
    if table is None:
        table = _TailCorrectedG(g)
        _G_CACHE[g] = table
    return table


def g_antiderivative(g: DiffusionWeight, s) -> float:
    """G(s) = int_{-inf}^s g, tail-corrected; accepts s = +inf for the total.

    Raises
    ------
    RegimeError
        When g.alpha <= 1 (the integral diverges; no traveling wave exists).
    """
    return _antiderivative(g).value(s)


@dataclass(frozen=True)
class WaveProfile:
    """Traveling-wave profile W with speed c on (-b, b).

    ``w`` and ``wx`` are closed maps valid at any interior point; ``x_grid``
    and ``w_values`` sample them on a grid that is uniform in the middle and
    geometric near the walls (distances b * 2^-j).  ``f_inv_c`` stores
    f^{-1}(c) = G(inf)/(2b) exactly as used by the construction.
    """

    c: float
    x_grid: np.ndarray
    w_values: np.ndarray
    w: Callable[[np.ndarray], np.ndarray]
    wx: Callable[[np.ndarray], np.ndarray]
    d_plus: Optional[float]
    d_minus: Optional[float]
    g_total: float
    b: float
    f_inv_c: float


def _tail_js(b: float, q: float, table: _TailCorrectedG) -> np.ndarray:
    """Geometric tail indices j: default 3..40, trimmed where W_x would
    overflow, extended (never past 50) until the last slope clears 1e6."""
    alpha = table.alpha
    m = 1.0 / (alpha - 1.0)

    def model_wx(j: float) -> float:
        gap = q * b * 2.0 ** (-j)
        gap = min(gap, table.tm_plus)  # inside the analytic-tail regime
        return float((table.g.cg_plus / ((alpha - 1.0) * gap)) ** m)

    j_hi = _J_HI
    while model_wx(j_hi) > _WX_CAP and j_hi > _J_LO:
        j_hi -= 1
    while model_wx(j_hi) < _SLOPE_TARGET and j_hi < _J_CAP:
        j_hi += 1
    return np.arange(_J_LO, j_hi + 1, dtype=float)


def compute_wave(spec: ProblemSpec, n_grid: int = 512,
                 w0: float = 0.0) -> WaveProfile:
    """Compute the traveling-wave profile (W, c) for ``spec``.

    Parameters
    ----------
    spec : ProblemSpec
        Only b, f, g are used; the initial datum plays no role here.
    n_grid : int
        Points of the uniform interior grid on [-0.75 b, 0.75 b]; at least
        64.  Geometric boundary points are appended on both sides.
    w0 : float
        Anchor value W(0); profiles are unique up to this vertical shift.

    Raises
    ------
    RegimeError
        For alpha <= 1, where the defining integral G(inf) diverges.
    """
    if n_grid < 64:
        raise ParameterError(f"n_grid must be at least 64, got {n_grid}")
    b = spec.b
    table = _antiderivative(spec.g)
    q = table.total / (2.0 * b)        # = f^{-1}(c) by construction
    c = float(np.asarray(spec.f.eval(np.asarray(q))))
    alpha = table.alpha

    def wx_fn(x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        scalar = np.asarray(x).ndim == 0
        if np.any(np.abs(arr) >= b):
            raise DomainError("the profile slope is only defined on (-b, b)")
        out = np.empty_like(arr)
        # Near the right wall, b - x is exact (Sterbenz) and the target sits
        # in the analytic tail: invert from the top gap to dodge the
        # catastrophic cancellation in G(inf) - (x+b) q.
        gap = q * (b - arr)
        top = gap <= table.tm_plus
        if np.any(top):
            out[top] = table.inv_from_top(gap[top])
        if np.any(~top):
            out[~top] = table.inverse((arr[~top] + b) * q)
        return float(out[0]) if scalar else out

    wx0 = float(wx_fn(0.0))
    h0 = table.h_value(wx0)

    def w_fn(x):
        return w0 + (table.h_value(wx_fn(x)) - h0) / q

    js = _tail_js(b, q, table)
    dists = b * 2.0 ** (-js)
    x_grid = np.union1d(
        np.union1d(np.linspace(-0.75 * b, 0.75 * b, n_grid), [0.0]),
        np.union1d(b - dists, -(b - dists)))
    w_values = w_fn(x_grid)

    d_plus = d_minus = None
    if 1.0 < alpha <= 2.0:
        d_plus, d_minus = _fit_divergence(x_grid, w_values, b, alpha)

    return WaveProfile(c=c, x_grid=x_grid, w_values=w_values, w=w_fn,
                       wx=wx_fn, d_plus=d_plus, d_minus=d_minus,
                       g_total=table.total, b=b, f_inv_c=q)


def _fit_divergence(x_grid: np.ndarray, w_values: np.ndarray, b: float,
                    alpha: float) -> Tuple[float, float]:
    """Slope of W against psi_gamma(wall distance) over the last decade of
    grid points on each side, with an intercept to absorb the anchor shift."""
    gamma = (2.0 - alpha) / (alpha - 1.0)
    out = []
    for side in (+1, -1):
        dist = b - side * x_grid
        keep = (side * x_grid > 0.75 * b)
        d_min = float(np.min(dist[keep]))
        sel = keep & (dist <= 10.0 * d_min)
        if int(np.count_nonzero(sel)) < 3:
            raise RateExtractionError(
                "not enough boundary-layer points for a rate fit")
        basis = psi(gamma, dist[sel])
        design = np.column_stack([basis, np.ones_like(basis)])
        norms = np.linalg.norm(design, axis=0)
        coef, *_ = np.linalg.lstsq(design / norms, w_values[sel], rcond=None)
        coef = coef / norms
        slopes = (w_values[sel] - coef[1]) / basis
        mean = float(np.mean(slopes))
        spread = float((np.max(slopes) - np.min(slopes)) / abs(mean)) \
            if mean != 0.0 else np.inf
        if spread > _RATE_SPREAD_MAX:
            raise RateExtractionError(
                f"divergence-rate fit did not converge (spread {spread:.3g} "
                f"over the last decade)")
        out.append(float(coef[0]))
    return out[0], out[1]


def divergence_rate(profile: WaveProfile, g_alpha: float):
    """Boundary divergence constants (d_plus, d_minus) of the profile.

    For 1 < alpha <= 2 the profile diverges like D * psi_gamma(wall
    distance) with gamma = (2 - alpha)/(alpha - 1) (the log profile at
    alpha = 2); the constants come from a last-decade fit.  For alpha > 2
    the wave is bounded and (None, None) is returned.

    Raises
    ------
    ParameterError
        For g_alpha <= 1 (no profile exists there at all).
    RateExtractionError
        When the per-point slopes spread more than 10%.
    """
    if g_alpha <= 1.0:
        raise ParameterError(
            "divergence rates require a tail exponent above 1")
    if g_alpha > 2.0:
        return None, None
    return _fit_divergence(profile.x_grid, profile.w_values, profile.b,
                           g_alpha)


def check_points(profile: WaveProfile) -> np.ndarray:
    """Grid points far enough from the walls for finite-difference checks
    (wall distance at least b * 2^-26)."""
    floor = profile.b * 2.0 ** (-_CHECK_J_MAX)
    keep = np.minimum(profile.b - profile.x_grid,
                      profile.b + profile.x_grid) >= floor
    return profile.x_grid[keep]


def profile_residuals(profile: WaveProfile, spec: ProblemSpec,
                      xs: np.ndarray) -> np.ndarray:
    """Relative residual |f^{-1}(c) - g(W_x) W_xx| / f^{-1}(c) with W_xx by
    centered differencing of the slope map (step 1e-4 of wall distance,
    using the actually representable step after rounding)."""
    xs = np.asarray(xs, dtype=float)
    dist = np.minimum(profile.b - xs, profile.b + xs)
    h = np.maximum(1e-4 * dist, 4.0 * np.finfo(float).eps * np.abs(xs))
    xp = xs + h
    xm = xs - h
    wxx = (profile.wx(xp) - profile.wx(xm)) / (xp - xm)
    q = profile.f_inv_c
    return np.abs(q - np.asarray(spec.g.eval(profile.wx(xs))) * wxx) / abs(q)
