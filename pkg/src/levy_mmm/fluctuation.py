"""Fluctuation identities for spectrally one-sided models.

Root finding (``find_nu``, ``phi``) relies on convexity of the Laplace
exponent: a sign-change bracket is grown by doubling, bisected down to
machine width and polished by Newton steps that are kept inside the bracket.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .models import DomainError, LevyModel, psi, psi_prime


class ApplicabilityError(ValueError):
    """Raised when a closed form requires a spectrally one-sided model."""


class NoRoot(ValueError):
    """psi stays negative up to the boundary of its domain."""


class NotDrifting(ValueError):
    """E X(1) >= 0, so psi has no positive root."""


SPECTRALLY_NEGATIVE = "spectrally_negative"
SPECTRALLY_POSITIVE = "spectrally_positive"
BROWNIAN = "brownian"
MONTE_CARLO = "monte_carlo"

_SINGULAR_GAP = 1e-8


@dataclass
class FluctuationConstants:
    nu: float
    psi_nu: float
    psi_prime_nu: float
    mean: float
    c0: Optional[float]
    c_killed: Optional[float]
    method: str

    def to_dict(self) -> dict:
        return asdict(self)


def _bracket_above(f, lo: float, upper: float) -> float:
    """Probe ``hi > lo`` with ``f(hi) > 0`` for ``f`` increasing beyond ``lo``.

    Widths double from 1; a finite ``upper`` is approached geometrically.
    """
    width = 1.0
    while width < 1e12:
        hi = lo + width
        if hi >= upper:
            hi = lo
            for _ in range(200):
                hi = upper - (upper - hi) / 2.0
                if f(hi) > 0:
                    return hi
            break
        if f(hi) > 0:
            return hi
        width *= 2.0
    raise NoRoot("function stays non-positive up to the domain boundary")


def _bisect_newton(f, fprime, lo: float, hi: float, newton_steps: int = 2) -> float:
    """Root of increasing ``f`` on ``[lo, hi]`` with ``f(lo) <= 0 < f(hi)``."""
    while hi - lo > 1e-12 * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        d = fprime(x)
        if d <= 0:
            break
        step = x - f(x) / d
        if not lo - 1e-12 <= step <= hi + 1e-12:
            break
        x = step
    return x


def find_nu(model: LevyModel, tol: float = 1e-12) -> float:
    """Positive root of ``psi(nu) = 0`` for a model drifting to minus infinity."""
    mean = psi_prime(model, 0.0)
    if mean >= 0:
        raise NotDrifting(f"E X(1) = {mean} >= 0")
    upper = model.domain().upper
    f = lambda t: psi(model, t)
    lo = 1e-6 if upper > 1e-6 else upper / 2.0
    while f(lo) > 0:
        lo /= 2.0
    hi = _bracket_above(f, lo, upper)
    nu = _bisect_newton(f, lambda t: psi_prime(model, t), lo, hi)
    if abs(psi(model, nu)) >= tol:
        raise NoRoot(f"|psi(nu)| = {abs(psi(model, nu))} exceeds tolerance {tol}")
    return nu


def _argmin_psi(model: LevyModel) -> float:
    """Minimiser of the convex Laplace exponent (root of the increasing psi')."""
    dom = model.domain()
    d = lambda t: psi_prime(model, t)
    if d(0.0) < 0:
        return _bisect_newton(d, lambda t: 1.0, 0.0, _bracket_above(d, 0.0, dom.upper), 0)
    if d(0.0) == 0:
        return 0.0
    mirrored = lambda t: -d(-t)
    try:
        hi = _bracket_above(mirrored, 0.0, -dom.lower)
    except NoRoot:
        return dom.lower
    return -_bisect_newton(mirrored, lambda t: 1.0, 0.0, hi, 0)


def _require_negative(model: LevyModel) -> None:
    if not model.spectrally_negative:
        raise ApplicabilityError("closed form requires a model without positive jumps")


def phi(model: LevyModel, q: float) -> float:
    """Right-most root of ``psi(theta) = q`` for a spectrally negative model.

    Values of ``q`` below zero are accepted down to ``min psi`` (analytic
    continuation); the root then lies right of the minimiser.
    """
    _require_negative(model)
    theta_min = _argmin_psi(model)
    if theta_min not in model.domain():
        raise DomainError("psi has no interior minimum")
    floor = psi(model, theta_min)
    if q < floor - 1e-14:
        raise DomainError(f"q={q} below min psi = {floor}")
    f = lambda t: psi(model, t) - q
    if f(theta_min) > 0:
        return theta_min
    lo = theta_min
    hi = _bracket_above(f, lo, model.domain().upper)
    return _bisect_newton(f, lambda t: psi_prime(model, t), lo, hi)


def _k_down_negative(model: LevyModel, alpha: float, beta: float) -> float:
    gap = phi(model, alpha) - beta
    if abs(gap) < _SINGULAR_GAP:
        return psi_prime(model, beta)
    return (alpha - psi(model, beta)) / gap


def ladder_exponents(
    model: LevyModel, alpha: float, beta: float, method: Optional[str] = None
) -> tuple[float, float]:
    """Bivariate ascending/descending ladder exponents ``(k_up, k_down)``.

    Spectrally negative models use ``k_up = Phi(alpha) + beta`` and
    ``k_down = (alpha - psi(beta)) / (Phi(alpha) - beta)``; spectrally positive
    models use the same formulas written for ``-X`` with the roles swapped.
    The removable singularity ``Phi(alpha) = beta`` evaluates to ``psi'(beta)``.
    """
    method = method or _default_method(model)
    if method == SPECTRALLY_NEGATIVE:
        _require_negative(model)
        return phi(model, alpha) + beta, _k_down_negative(model, alpha, beta)
    if method == SPECTRALLY_POSITIVE:
        if not model.spectrally_positive:
            raise ApplicabilityError("closed form requires a model without negative jumps")
        dual = model.negated()
        return _k_down_negative(dual, alpha, beta), phi(dual, alpha) + beta
    raise ApplicabilityError(f"no closed-form ladder exponents for method {method!r}")


def _default_method(model: LevyModel) -> str:
    if model.spectrally_negative:
        return SPECTRALLY_NEGATIVE
    if model.spectrally_positive:
        return SPECTRALLY_POSITIVE
    raise ApplicabilityError(
        "model has jumps of both signs; closed-form constants are unavailable "
        "(use the Monte Carlo estimator, CLI `estimate-c0`)"
    )


def c0(model: LevyModel, nu: float, method: Optional[str] = None, tol: float = 1e-9) -> float:
    """Mixed moving maxima intensity constant in the regime ``psi(nu) = 0``."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    if abs(psi(model, nu)) > tol:
        raise ValueError(f"psi(nu) = {psi(model, nu)} is not zero")
    method = method or _default_method(model)
    if method == SPECTRALLY_NEGATIVE:
        _require_negative(model)
        return nu * psi_prime(model, nu)
    if method == SPECTRALLY_POSITIVE:
        if not model.spectrally_positive:
            raise ApplicabilityError("closed form requires a model without negative jumps")
        return -nu * psi_prime(model, 0.0)
    raise ApplicabilityError(f"unknown method {method!r}")


def c_killed(
    model: LevyModel, nu: float, p: float, q: float, method: Optional[str] = None
) -> float:
    """Constant relating the killed two-sided process to its conditioned version."""
    if not (p > 0 and q > 0):
        raise ValueError("killing rates must be positive")
    psi_nu = psi(model, nu)
    method = method or _default_method(model)
    if method == SPECTRALLY_NEGATIVE:
        _require_negative(model)
        return p * phi(model, q) / (phi(model, p + psi_nu) - nu)
    if method == SPECTRALLY_POSITIVE:
        if not model.spectrally_positive:
            raise ApplicabilityError("closed form requires a model without negative jumps")
        dual = model.negated()
        return q * (phi(dual, p + psi_nu) + nu) / phi(dual, q)
    raise ApplicabilityError(f"unknown method {method!r}")


def fluctuation_constants(
    model: LevyModel,
    nu: Optional[float] = None,
    p: float = 0.0,
    q: float = 0.0,
) -> FluctuationConstants:
    """Collect the constants for a model; ``nu=None`` solves ``psi(nu) = 0``."""
    if nu is None:
        nu = find_nu(model)
    try:
        method = _default_method(model)
    except ApplicabilityError:
        method = MONTE_CARLO
    if model.is_brownian:
        method = BROWNIAN
    psi_nu = psi(model, nu)
    constant0 = killed = None
    if method != MONTE_CARLO:
        one_sided = SPECTRALLY_NEGATIVE if model.spectrally_negative else SPECTRALLY_POSITIVE
        if nu > 0 and abs(psi_nu) < 1e-9:
            constant0 = c0(model, nu, one_sided)
        if p > 0 and q > 0:
            killed = c_killed(model, nu, p, q, one_sided)
    return FluctuationConstants(
        nu=nu,
        psi_nu=psi_nu,
        psi_prime_nu=psi_prime(model, nu),
        mean=psi_prime(model, 0.0),
        c0=constant0,
        c_killed=killed,
        method=method,
    )

