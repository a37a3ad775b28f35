"""Catalog of Lévy processes with closed-form Laplace exponents.

Every model is a Brownian motion with linear drift plus an optional finite
activity jump part, so that

    psi(theta) = a*theta + sigma2*theta**2/2 + J(theta),
    J(theta)   = int (exp(theta*x) - 1) Pi(dx),

with J available in closed form on its (open) finiteness interval.  The jump
part is *not* compensated: ``drift`` is the linear drift of the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np


class DomainError(ValueError):
    """Raised when a Laplace exponent is requested outside its finiteness domain."""


@dataclass(frozen=True)
class ThetaDomain:
    """Open interval ``(lower, upper)`` on which the Laplace exponent is finite."""

    lower: float = -math.inf
    upper: float = math.inf

    def __contains__(self, theta: float) -> bool:
        return self.lower < theta < self.upper

    def shifted(self, nu: float) -> "ThetaDomain":
        """Domain of ``theta -> psi(theta + nu)``."""
        return ThetaDomain(self.lower - nu, self.upper - nu)


@dataclass(frozen=True)
class GaussianJumps:
    """Compound Poisson jumps with N(mean, var) sizes (Merton type)."""

    rate: float
    mean: float
    var: float

    kind = "gaussian"

    def domain(self) -> ThetaDomain:
        return ThetaDomain()

    def transform(self, theta: float) -> float:
        return self.rate * math.expm1(self.mean * theta + 0.5 * self.var * theta * theta)

    def transform_prime(self, theta: float) -> float:
        return (
            self.rate
            * (self.mean + self.var * theta)
            * math.exp(self.mean * theta + 0.5 * self.var * theta * theta)
        )

    def tilted(self, nu: float) -> "GaussianJumps":
        rate = self.rate * math.exp(nu * self.mean + 0.5 * nu * nu * self.var)
        return GaussianJumps(rate, self.mean + nu * self.var, self.var)

    def violations(self) -> list[str]:
        out = []
        if not self.rate > 0:
            out.append("jumps.rate must be positive")
        if not self.var > 0:
            out.append("jumps.var must be positive")
        return out

    def sum_of_jumps(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        counts = np.asarray(counts)
        return counts * self.mean + np.sqrt(counts * self.var) * rng.standard_normal(counts.shape)

    def density(self, x):
        """Lévy density (rate times jump-size density); used by quadrature checks."""
        z = (np.asarray(x) - self.mean) / math.sqrt(self.var)
        return self.rate * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * self.var)

    @property
    def has_positive(self) -> bool:
        return True

    @property
    def has_negative(self) -> bool:
        return True


@dataclass(frozen=True)
class DoubleExpJumps:
    """Kou double-exponential jumps: up with probability ``up_prob``."""

    rate: float
    up_prob: float
    up_decay: float
    down_decay: float

    kind = "double_exp"

    def domain(self) -> ThetaDomain:
        return ThetaDomain(-self.down_decay, self.up_decay)

    def transform(self, theta: float) -> float:
        p, eu, ed = self.up_prob, self.up_decay, self.down_decay
        return self.rate * (p * eu / (eu - theta) + (1.0 - p) * ed / (ed + theta) - 1.0)

    def transform_prime(self, theta: float) -> float:
        p, eu, ed = self.up_prob, self.up_decay, self.down_decay
        return self.rate * (p * eu / (eu - theta) ** 2 - (1.0 - p) * ed / (ed + theta) ** 2)

    def tilted(self, nu: float) -> "DoubleExpJumps":
        eu, ed = self.up_decay - nu, self.down_decay + nu
        if eu <= 0 or ed <= 0:
            raise DomainError(f"tilt by {nu} leaves a non-positive exponential decay")
        up_mass = self.rate * self.up_prob * self.up_decay / eu
        down_mass = self.rate * (1.0 - self.up_prob) * self.down_decay / ed
        rate = up_mass + down_mass
        return DoubleExpJumps(rate, up_mass / rate, eu, ed)

    def violations(self) -> list[str]:
        out = []
        if not self.rate > 0:
            out.append("jumps.rate must be positive")
        if not 0.0 < self.up_prob < 1.0:
            out.append("jumps.up_prob must lie in (0, 1)")
        if not self.up_decay > 0:
            out.append("jumps.up_decay must be positive")
        if not self.down_decay > 0:
            out.append("jumps.down_decay must be positive")
        return out

    def sum_of_jumps(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        counts = np.asarray(counts)
        ups = rng.binomial(counts, self.up_prob)
        up = rng.gamma(ups, 1.0 / self.up_decay)
        down = rng.gamma(counts - ups, 1.0 / self.down_decay)
        return up - down

    def density(self, x):
        x = np.asarray(x, dtype=float)
        up = self.up_prob * self.up_decay * np.exp(-self.up_decay * np.abs(x))
        down = (1.0 - self.up_prob) * self.down_decay * np.exp(-self.down_decay * np.abs(x))
        return self.rate * np.where(x > 0, up, down)

    @property
    def has_positive(self) -> bool:
        return True

    @property
    def has_negative(self) -> bool:
        return True


@dataclass(frozen=True)
class OneSidedExpJumps:
    """Exponential jumps of a single sign (``sign`` is +1 or -1)."""

    sign: int
    rate: float
    decay: float

    kind = "one_sided_exp"

    def domain(self) -> ThetaDomain:
        if self.sign > 0:
            return ThetaDomain(-math.inf, self.decay)
        return ThetaDomain(-self.decay, math.inf)

    def transform(self, theta: float) -> float:
        return self.rate * (self.decay / (self.decay - self.sign * theta) - 1.0)

    def transform_prime(self, theta: float) -> float:
        return self.rate * self.sign * self.decay / (self.decay - self.sign * theta) ** 2

    def tilted(self, nu: float) -> "OneSidedExpJumps":
        decay = self.decay - self.sign * nu
        if decay <= 0:
            raise DomainError(f"tilt by {nu} leaves a non-positive exponential decay")
        return OneSidedExpJumps(self.sign, self.rate * self.decay / decay, decay)

    def violations(self) -> list[str]:
        out = []
        if self.sign not in (1, -1):
            out.append("jumps.sign must be + or -")
        if not self.rate > 0:
            out.append("jumps.rate must be positive")
        if not self.decay > 0:
            out.append("jumps.decay must be positive")
        return out

    def sum_of_jumps(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.sign * rng.gamma(np.asarray(counts), 1.0 / self.decay)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        y = self.sign * x
        return np.where(y > 0, self.rate * self.decay * np.exp(-self.decay * np.abs(y)), 0.0)

    @property
    def has_positive(self) -> bool:
        return self.sign > 0

    @property
    def has_negative(self) -> bool:
        return self.sign < 0


JumpSpec = Union[None, GaussianJumps, DoubleExpJumps, OneSidedExpJumps]


@dataclass(frozen=True)
class LevyModel:
    """Characteristic triplet ``(drift, sigma2, jumps)`` of a catalog model."""

    drift: float
    sigma2: float
    jumps: JumpSpec = None

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def jump_rate(self) -> float:
        return 0.0 if self.jumps is None else self.jumps.rate

    def domain(self) -> ThetaDomain:
        return ThetaDomain() if self.jumps is None else self.jumps.domain()

    @property
    def spectrally_negative(self) -> bool:
        return self.jumps is None or not self.jumps.has_positive

    @property
    def spectrally_positive(self) -> bool:
        return self.jumps is None or not self.jumps.has_negative

    @property
    def is_brownian(self) -> bool:
        return self.jumps is None

    def negated(self) -> "LevyModel":
        """Model of ``-X``: Laplace exponent ``theta -> psi(-theta)``."""
        jumps = self.jumps
        if isinstance(jumps, GaussianJumps):
            jumps = GaussianJumps(jumps.rate, -jumps.mean, jumps.var)
        elif isinstance(jumps, DoubleExpJumps):
            jumps = DoubleExpJumps(jumps.rate, 1.0 - jumps.up_prob, jumps.down_decay, jumps.up_decay)
        elif isinstance(jumps, OneSidedExpJumps):
            jumps = OneSidedExpJumps(-jumps.sign, jumps.rate, jumps.decay)
        return LevyModel(-self.drift, self.sigma2, jumps)

    def describe(self) -> dict:
        out = {"drift": self.drift, "sigma2": self.sigma2, "jumps": None}
        if self.jumps is not None:
            params = {k: getattr(self.jumps, k) for k in self.jumps.__dataclass_fields__}
            out["jumps"] = {"kind": self.jumps.kind, **params}
        return out


def psi(model: LevyModel, theta: float) -> float:
    """Laplace exponent ``log E exp(theta X(1))``."""
    if theta not in model.domain():
        raise DomainError(f"theta={theta} outside {model.domain()}")
    out = model.drift * theta + 0.5 * model.sigma2 * theta * theta
    if model.jumps is not None:
        out += model.jumps.transform(theta)
    return out


def psi_prime(model: LevyModel, theta: float) -> float:
    """Derivative of :func:`psi`; at 0 it equals ``E X(1)``."""
    if theta not in model.domain():
        raise DomainError(f"theta={theta} outside {model.domain()}")
    out = model.drift + model.sigma2 * theta
    if model.jumps is not None:
        out += model.jumps.transform_prime(theta)
    return out


def esscher_tilt(model: LevyModel, nu: float) -> LevyModel:
    """Model of the exponentially tilted process ``X^nu``.

    The Brownian variance is unchanged, the Lévy measure becomes
    ``exp(nu x) Pi(dx)`` and the drift picks up ``sigma2 * nu``, so that
    ``psi(tilted, theta) == psi(model, theta + nu) - psi(model, nu)``.
    """
    if nu not in model.domain():
        raise DomainError(f"nu={nu} outside {model.domain()}")
    jumps = None if model.jumps is None else model.jumps.tilted(nu)
    return LevyModel(model.drift + model.sigma2 * nu, model.sigma2, jumps)


@dataclass
class ModelDiagnostics:
    ok: bool
    violations: list[str] = field(default_factory=list)
    domain: Optional[ThetaDomain] = None


def validate(model: LevyModel) -> ModelDiagnostics:
    """Check the catalog restrictions; never raises."""
    violations = []
    if not (isinstance(model.sigma2, (int, float)) and model.sigma2 > 0):
        violations.append("monotone/degenerate: sigma2 must be positive")
    if not math.isfinite(model.drift):
        violations.append("drift must be finite")
    if model.jumps is not None:
        violations.extend(model.jumps.violations())
    domain = None if violations else model.domain()
    return ModelDiagnostics(not violations, violations, domain)


def require_valid(model: LevyModel) -> LevyModel:
    diag = validate(model)
    if not diag.ok:
        raise ValueError("invalid model: " + "; ".join(diag.violations))
    return model
