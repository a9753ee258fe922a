"""Existence / non-existence classification for the singular Dirichlet flow.

The decisive quantities are the tail exponent alpha of the diffusion weight
(how fast g decays along large gradients), the growth rate beta of the outer
nonlinearity f, and the boundary class of the initial datum:

* alpha > 2       -- solutions exist for divergent (B2) data and are unique
                     when the datum has an exact boundary rate (B3).
* 1 < alpha <= 2  -- solutions exist for bounded and divergent data alike;
                     uniqueness needs boundary rates gamma >= (2-a)/(a-1).
* alpha <= 1      -- the growth of f takes over: fast-growing f
                     (beta >= 1/(1-alpha)) forces instantaneous blow-up and
                     no solution can exist, slow-growing f still admits one.

Everything here is a pure function of the declared exponents plus the datum
class.  The one sampled ingredient is a bounded-below check on the datum,
which the non-existence branch requires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .model import ProblemSpec

# Verdict tags.
EXISTS_UNIQUE = "exists_unique"
EXISTS = "exists"
NOT_EXISTS = "not_exists"
NEEDS_B2 = "needs_B2"
OUTSIDE_THEORY = "outside_theory"

WAVE_EXISTS_BOUNDED = "exists_bounded"
WAVE_EXISTS_UNBOUNDED = "exists_unbounded"
WAVE_NOT_EXISTS = "not_exists"


@dataclass(frozen=True)
class RegimeVerdict:
    verdict: str
    theorem: str
    notes: str


def uniqueness_threshold(alpha: float) -> float:
    """Smallest boundary rate that guarantees uniqueness, max{(2-a)/(a-1), 0}.

    Defined for alpha > 1 (below that no divergent-data uniqueness result
    applies).
    """
    if alpha <= 1.0:
        raise ParameterError(
            f"uniqueness threshold is defined for alpha > 1, got {alpha}")
    return max((2.0 - alpha) / (alpha - 1.0), 0.0)


def _bounded_below(spec: ProblemSpec) -> bool:
    """Sampled certificate that the datum does not dip to -infinity."""
    xs = np.linspace(-spec.b + 1e-9, spec.b - 1e-9, 4097)
    vals = np.asarray(spec.u0.values(xs), dtype=float)
    if np.any(np.isnan(vals)):
        raise ParameterError("initial datum evaluates to NaN inside the domain")
    return bool(np.min(vals) > -np.inf)


def classify(spec: ProblemSpec) -> RegimeVerdict:
    """Decide existence / uniqueness / blow-up for a problem specification.

    Raises
    ------
    InsufficientDataError
        When alpha <= 1 and the nonlinearity declares no growth rate beta;
        the classification genuinely depends on it there.
    """
    alpha = spec.g.alpha
    u0 = spec.u0

    if alpha > 2.0:
        if u0.klass == "B1":
            return RegimeVerdict(
                verdict=NEEDS_B2,
                theorem="unresolved: alpha > 2 with bounded data",
                notes=(f"alpha = {alpha:g} > 2 has an existence result only "
                       "for data diverging at both endpoints (class B2); "
                       "bounded data are not covered either way"))
        if u0.klass == "B3":
            # B3 constructors enforce gamma_+- >= 0, which is exactly the
            # uniqueness threshold in this range.
            return RegimeVerdict(
                verdict=EXISTS_UNIQUE,
                theorem=("existence and uniqueness: alpha > 2 with exact "
                         "boundary rates gamma_+- >= 0"),
                notes=(f"alpha = {alpha:g}; rates gamma_+ = {u0.gamma_plus:g}, "
                       f"gamma_- = {u0.gamma_minus:g} meet the threshold "
                       f"{uniqueness_threshold(alpha):g}"))
        return RegimeVerdict(
            verdict=EXISTS,
            theorem="existence: alpha > 2 with divergent (B2) data",
            notes=f"alpha = {alpha:g}; datum class {u0.klass}")

    if alpha > 1.0:  # 1 < alpha <= 2, including the log-rate endpoint.
        thr = uniqueness_threshold(alpha)
        if (u0.klass == "B3" and u0.gamma_plus >= thr
                and u0.gamma_minus >= thr):
            return RegimeVerdict(
                verdict=EXISTS_UNIQUE,
                theorem=("existence and uniqueness: 1 < alpha <= 2 with "
                         "boundary rates gamma_+- >= (2-alpha)/(alpha-1)"),
                notes=(f"alpha = {alpha:g}; threshold {thr:g}; rates "
                       f"gamma_+ = {u0.gamma_plus:g}, "
                       f"gamma_- = {u0.gamma_minus:g}"))
        return RegimeVerdict(
            verdict=EXISTS,
            theorem="existence: 1 < alpha <= 2 with bounded or divergent data",
            notes=(f"alpha = {alpha:g}; datum class {u0.klass}"
                   + (f"; uniqueness would need gamma_+- >= {thr:g}"
                      if u0.klass == "B3" else "")))

    # alpha <= 1: the growth rate of f is decisive.
    beta = spec.f.beta
    if beta is None:
        raise InsufficientDataError(
            "classification with alpha <= 1 needs the growth rate beta of f; "
            "declare it on the nonlinearity")

    if alpha == 1.0:
        return RegimeVerdict(
            verdict=EXISTS,
            theorem="existence: alpha = 1 (any growth rate of f)",
            notes=f"alpha = 1, beta = {beta:g}; datum class {u0.klass}")

    critical = 1.0 / (1.0 - alpha)
    if beta >= critical:
        if _bounded_below(spec):
            return RegimeVerdict(
                verdict=NOT_EXISTS,
                theorem=("non-existence: alpha < 1 with fast-growing f "
                         "(beta >= 1/(1-alpha)) and data bounded below"),
                notes=(f"alpha = {alpha:g}, beta = {beta:g} >= critical "
                       f"{critical:g}: the flow blows up instantly in the "
                       "interior, no solution attains the boundary data"))
        return RegimeVerdict(
            verdict=OUTSIDE_THEORY,
            theorem="outside the classified regimes",
            notes=(f"alpha = {alpha:g}, beta = {beta:g} >= critical "
                   f"{critical:g}, but the datum is unbounded below; the "
                   "non-existence argument needs inf u0 > -infinity"))
    return RegimeVerdict(
        verdict=EXISTS,
        theorem=("existence: alpha < 1 with slow-growing f "
                 "(beta < 1/(1-alpha))"),
        notes=(f"alpha = {alpha:g}, beta = {beta:g} < critical {critical:g}; "
               f"datum class {u0.klass}"))


def classify_wave(spec: ProblemSpec) -> str:
    """Traveling-wave trichotomy for the profile equation f(g(W_x)W_xx) = c.

    Returns one of the tags ``exists_bounded`` (alpha > 2),
    ``exists_unbounded`` (1 < alpha <= 2, profile diverging like
    psi_{(2-alpha)/(alpha-1)} at the walls), ``not_exists`` (alpha <= 1,
    the defining integral for the wave speed diverges).
    """
    alpha = spec.g.alpha
    if alpha > 2.0:
        return WAVE_EXISTS_BOUNDED
    if alpha > 1.0:
        return WAVE_EXISTS_UNBOUNDED
    return WAVE_NOT_EXISTS
