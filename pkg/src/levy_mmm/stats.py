"""Kolmogorov-Smirnov tests and the reporting record used by the suites."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

MIN_SAMPLE = 10
KOLMOGOROV_TERMS = 20


class InsufficientSample(ValueError):
    pass


@dataclass
class TestReport:
    """Outcome of one check.  ``passed`` is decided by ``p_value > alpha`` for
    distributional tests and by ``|z_score| < z_limit`` for estimator
    comparisons; deterministic checks carry neither."""

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    passed: bool
    n: int = 0
    p_value: Optional[float] = None
    z_score: Optional[float] = None
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "z_score": self.z_score,
            "pass": self.passed,
            "n": self.n,
            "notes": self.notes,
        }


def kolmogorov_sf(lam: float, terms: int = KOLMOGOROV_TERMS) -> float:
    """``P(K > lam)`` for the Kolmogorov distribution, by its alternating series."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for j in range(1, terms + 1):
        total += (-1) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return min(1.0, max(0.0, 2.0 * total))


def _p_value(d: float, n_eff: float) -> float:
    if d == 0:
        return 1.0
    root = math.sqrt(n_eff)
    # small-sample correction of the scaling (Stephens 1970)
    return kolmogorov_sf((root + 0.12 + 0.11 / root) * d)


def _as_sample(x: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < MIN_SAMPLE:
        raise InsufficientSample(f"{name} has {arr.size} values; need at least {MIN_SAMPLE}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.sort(arr)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sample KS statistic with its asymptotic p-value."""
    a = _as_sample(a, "first sample")
    b = _as_sample(b, "second sample")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    return d, _p_value(d, a.size * b.size / (a.size + b.size))


def ks_one_sample(samples: Sequence[float], cdf) -> tuple[float, float]:
    """One-sample KS test against a continuous ``cdf`` (vectorised callable)."""
    x = _as_sample(samples, "sample")
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    d = float(max(upper.max(), lower.max()))
    return d, _p_value(d, n)


def gumbel_cdf(x, nu: float):
    """``exp(-e^{-nu x} / nu)``, the marginal law of the max-stable field."""
    return np.exp(-np.exp(-nu * np.asarray(x, dtype=float)) / nu)


def gumbel_quantile(prob, nu: float):
    prob = np.asarray(prob, dtype=float)
    return -np.log(-nu * np.log(prob)) / nu


def ks_vs_gumbel(samples: Sequence[float], nu: float) -> tuple[float, float]:
    if not nu > 0:
        raise ValueError("nu must be positive")
    return ks_one_sample(samples, lambda x: gumbel_cdf(x, nu))


def z_report(name: str, lhs, rhs, z_limit: float = 3.0, notes: str = "") -> TestReport:
    """Compare two Monte Carlo estimates (anything with ``mean``/``std_error``)."""
    se = math.hypot(lhs.std_error, rhs.std_error)
    diff = lhs.mean - rhs.mean
    z = 0.0 if diff == 0 else (diff / se if se > 0 else math.copysign(math.inf, diff))
    return TestReport(name, diff, abs(z) < z_limit, min(lhs.n, rhs.n), z_score=z, notes=notes)


def ks_report(name: str, statistic: float, p_value: float, n: int, alpha: float, notes: str = "") -> TestReport:
    return TestReport(name, statistic, p_value > alpha, n, p_value=p_value, notes=notes)


def exact_report(name: str, value: float, expected: float, tol: float = 1e-9, notes: str = "") -> TestReport:
    err = abs(value - expected)
    return TestReport(name, err, err <= tol, 0, notes=notes or f"value={value!r} expected={expected!r} tol={tol}")
