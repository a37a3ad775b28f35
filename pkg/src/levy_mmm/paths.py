"""Grid skeletons of Lévy paths, the two-sided process Z and the process Y
seen from its supremum.

Left limits ``X((-t)-)`` are identified with grid values.  Suprema computed
on the grid sit below the continuous-time supremum by about
``GRID_SUP_SHIFT * sigma * sqrt(dt)``; see :func:`grid_shift`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .models import LevyModel, esscher_tilt, psi, psi_prime, require_valid

# -zeta(1/2) / sqrt(2 pi): expected gap between the supremum of a Brownian
# motion and its maximum over a grid of mesh dt, in units of sigma*sqrt(dt).
GRID_SUP_SHIFT = 0.5825971579390106

MAX_DOUBLINGS = 6


class HorizonExhausted(RuntimeError):
    """The adaptive horizon hit its doubling cap without settling the extremum."""


@dataclass
class GridPath:
    """Values ``X(t0 + k*dt)``; with a ``lifetime`` only grid points before it."""

    t0: float
    dt: float
    values: np.ndarray
    lifetime: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise ValueError("GridPath needs at least one value")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def end_time(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)


@dataclass
class TwoSidedPath:
    """``left.values[k] = Z(-k dt)`` and ``right.values[k] = Z(k dt)``."""

    left: GridPath
    right: GridPath

    @property
    def dt(self) -> float:
        return self.right.dt

    def at(self, k: int) -> Optional[float]:
        """Value at grid index ``k`` (negative indices read the left side);
        ``None`` outside the simulated/alive range."""
        side, j = (self.right, k) if k >= 0 else (self.left, -k)
        if j < side.values.size:
            return float(side.values[j])
        return None

    def at_many(self, ks: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`at`; NaN marks points outside the path."""
        ks = np.asarray(ks, dtype=np.int64)
        out = np.full(ks.shape, np.nan)
        r = (ks >= 0) & (ks < self.right.values.size)
        out[r] = self.right.values[ks[r]]
        l = (ks < 0) & (-ks < self.left.values.size)
        out[l] = self.left.values[-ks[l]]
        return out

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Times and values in increasing time order (t = 0 once)."""
        nl = self.left.values.size
        t = self.dt * np.arange(-(nl - 1), self.right.values.size)
        v = np.concatenate([self.left.values[:0:-1], self.right.values])
        return t, v


@dataclass
class SplitResult:
    sup_value: float
    sup_time: float
    sup_index: int
    post_path: GridPath
    pre_path: GridPath

    @property
    def shifted(self) -> TwoSidedPath:
        """``s -> Z(T + s) - sup Z`` as a two-sided path."""
        return TwoSidedPath(left=self.pre_path, right=self.post_path)


def grid_shift(model: LevyModel, dt: float) -> float:
    """First-order gap between continuous and grid extrema of ``model``."""
    return GRID_SUP_SHIFT * model.sigma * math.sqrt(dt)


def increments(model: LevyModel, n: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent increments over steps of length ``dt``, exact in law."""
    out = rng.normal(model.drift * dt, model.sigma * math.sqrt(dt), size=n)
    if model.jumps is not None and n > 0:
        counts = rng.poisson(model.jumps.rate * dt, size=n)
        hit = np.flatnonzero(counts)
        if hit.size:
            out[hit] += model.jumps.sum_of_jumps(counts[hit], rng)
    return out


def _path_from_increments(incr: np.ndarray) -> np.ndarray:
    values = np.empty(incr.size + 1)
    values[0] = 0.0
    np.cumsum(incr, out=values[1:])
    return values


def sample_path(model: LevyModel, t_end: float, dt: float, rng: np.random.Generator) -> GridPath:
    """Skeleton of ``X`` on ``0, dt, ..., floor(t_end/dt) dt`` started at 0."""
    if not dt > 0 or not t_end >= dt:
        raise ValueError("need dt > 0 and t_end >= dt")
    n = int(math.floor(t_end / dt + 1e-9)) + 1
    return GridPath(0.0, dt, _path_from_increments(increments(model, n - 1, dt, rng)))


def sample_killed_path(model: LevyModel, rate: float, dt: float, rng: np.random.Generator) -> GridPath:
    """Skeleton of ``X`` killed at an independent Exponential(``rate``) time."""
    if not rate > 0 or not dt > 0:
        raise ValueError("need rate > 0 and dt > 0")
    lifetime = rng.exponential(1.0 / rate)
    n = max(1, int(math.ceil(lifetime / dt)))
    return GridPath(0.0, dt, _path_from_increments(increments(model, n - 1, dt, rng)), lifetime)


def _check_regime(model: LevyModel, nu: float, p: float, q: float) -> None:
    if p == 0 and q == 0:
        if not (nu > 0 and abs(psi(model, nu)) < 1e-8):
            raise ValueError("unkilled regime requires nu > 0 with psi(nu) = 0")
    elif not (p > 0 and q > 0):
        raise ValueError("killing rates must be both zero or both positive")


def build_z(
    model: LevyModel,
    nu: float,
    dt: float,
    p: float,
    q: float,
    horizon: float,
    rng: np.random.Generator,
) -> TwoSidedPath:
    """Two-sided process: ``X`` for t >= 0 and ``-X^nu(-t)`` for t < 0.

    With ``p = q = 0`` both sides run to ``horizon``; otherwise the right side
    is killed at rate ``q`` and the left at rate ``p``.
    """
    require_valid(model)
    _check_regime(model, nu, p, q)
    tilted = esscher_tilt(model, nu)
    rng_right, rng_left = rng.spawn(2)
    if q > 0:
        right = sample_killed_path(model, q, dt, rng_right)
        left = sample_killed_path(tilted, p, dt, rng_left)
    else:
        right = sample_path(model, horizon, dt, rng_right)
        left = sample_path(tilted, horizon, dt, rng_left)
    left.values = -left.values
    return TwoSidedPath(left=left, right=right)


def supremum_split(z: TwoSidedPath) -> SplitResult:
    """Split a two-sided path at the first grid time attaining its maximum."""
    nl = z.left.values.size
    _, values = z.arrays()
    i = int(np.argmax(values))
    top = float(values[i])
    k = i - (nl - 1)
    dt = z.dt
    sup_time = k * dt
    post_life = None if z.right.lifetime is None else z.right.lifetime - sup_time
    pre_life = None if z.left.lifetime is None else z.left.lifetime + sup_time
    post = GridPath(0.0, dt, values[i:] - top, post_life)
    pre = GridPath(0.0, dt, values[i::-1] - top, pre_life)
    return SplitResult(top, sup_time, k, post, pre)


def _post_supremum(
    model: LevyModel,
    rate: float,
    dt: float,
    window: float,
    margin: float,
    rng: np.random.Generator,
    horizon: Optional[float],
    max_doublings: int,
) -> GridPath:
    """Post-supremum path ``X(g + t) - sup X`` of a process drifting down."""
    if rate > 0:
        path = sample_killed_path(model, rate, dt, rng)
        g = int(np.argmax(path.values))
        top = path.values[g]
        return GridPath(0.0, dt, path.values[g:] - top, path.lifetime - g * dt)
    drift = psi_prime(model, 0.0)
    if drift >= 0:
        raise ValueError("post-supremum path needs a process drifting to -infinity")
    h = horizon if horizon is not None else 20.0 / abs(drift) + window
    n = int(math.ceil(h / dt))
    values = _path_from_increments(increments(model, n, dt, rng))
    doublings = 0
    while True:
        g = int(np.argmax(values))
        top = values[g]
        h = (values.size - 1) * dt
        if g * dt <= h - window and values[-1] <= top - margin:
            return GridPath(0.0, dt, values[g:] - top)
        doublings += 1
        if doublings > max_doublings:
            raise HorizonExhausted(f"horizon {h} still too short after {max_doublings} doublings")
        (ext,) = rng.spawn(1)
        more = values[-1] + np.cumsum(increments(model, values.size - 1, dt, ext))
        values = np.concatenate([values, more])


def sample_y(
    model: LevyModel,
    nu: float,
    dt: float,
    p: float,
    q: float,
    window: float,
    margin: float,
    rng: np.random.Generator,
    horizon: Optional[float] = None,
    max_doublings: int = MAX_DOUBLINGS,
) -> TwoSidedPath:
    """The two-sided process seen from its supremum.

    Right side: post-supremum path of ``X`` (killed at ``q`` when positive).
    Left side: minus the post-infimum path of ``X^nu`` (killed at ``p``),
    obtained as the post-supremum path of ``-X^nu``.  Without killing the
    horizon of each side doubles (a fresh sub-stream extends the same path)
    until the extremum lies at least ``window`` before the end and the end
    value is ``margin`` beyond the extremum.
    """
    require_valid(model)
    _check_regime(model, nu, p, q)
    reflected_tilt = esscher_tilt(model, nu).negated()
    rng_right, rng_left = rng.spawn(2)
    right = _post_supremum(model, q, dt, window, margin, rng_right, horizon, max_doublings)
    left = _post_supremum(reflected_tilt, p, dt, window, margin, rng_left, horizon, max_doublings)
    return TwoSidedPath(left=left, right=right)


def default_margin(nu: float) -> float:
    return 10.0 / nu
