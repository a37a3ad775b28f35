"""Max-stable field from the two stationary particle systems.

``psi2``: mixed moving maxima.  Points ``(V_i, T_i)`` with intensity
``C0 dt e^{-nu v} dv`` per lattice time, processed with ``V`` decreasing; each
carries an independent copy of ``Y``.  Since ``sup Y = 0`` the loop stops
exactly once ``V_k`` drops below the current minimum of the field.

``psi1``: particles ``U_i + Z_i`` with ``U`` a Poisson process of intensity
``e^{-nu u} du``, processed top-down.  Only the values of ``Z`` at the grid
times enter, so they are drawn exactly as sums of independent increments.
The loop stops once the expected number of discarded particles that could
still reach the field is at most ``delta``; the expectation is bounded with
a union/Chernoff bound on the grid maximum of ``Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Optional

import numpy as np

from .models import LevyModel, esscher_tilt, psi, psi_prime, require_valid
from .paths import default_margin, grid_shift, increments, sample_y
from .rng import parallel_map, stream

PSI1_BLOCK = 4096
PSI2_BLOCK = 64


@dataclass
class FieldConfig:
    t_grid: np.ndarray
    pad: float
    delta: float
    nu: float
    c0: float

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if self.t_grid.size == 0:
            raise ValueError("t_grid must be nonempty")
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        if not self.pad > 0:
            raise ValueError("pad must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not (self.nu > 0 and self.c0 > 0):
            raise ValueError("nu and c0 must be positive")


@dataclass
class MaxStableField:
    t_grid: np.ndarray
    eta: np.ndarray
    n_particles: int
    truncation_gap: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def default_pad(model: LevyModel, nu: float) -> float:
    return 15.0 / nu * max(1.0 / abs(psi_prime(model, 0.0)), 1.0)


def _grid_indices(t_grid: np.ndarray, dt: float) -> np.ndarray:
    idx = np.rint((t_grid - t_grid[0]) / dt).astype(np.int64)
    if not np.allclose(idx * dt, t_grid - t_grid[0], atol=1e-9 * max(1.0, dt)):
        raise ValueError("t_grid spacings must be multiples of dt")
    return idx


def sample_psi2_eta(
    model: LevyModel,
    cfg: FieldConfig,
    dt: float,
    seed: int,
    field_index: int = 0,
    margin: Optional[float] = None,
    extra_particles: int = 0,
    grid_correction: bool = True,
) -> MaxStableField:
    """One field from the mixed moving maxima representation.

    ``T_i`` is uniform on the dt-lattice of ``[t_min - pad, t_max + pad]``.
    ``extra_particles`` keeps sampling past the stopping point and records in
    the diagnostics whether any of them would have changed the field.
    """
    require_valid(model)
    nu, c0 = cfg.nu, cfg.c0
    margin = default_margin(nu) if margin is None else margin
    gidx = _grid_indices(cfg.t_grid, dt)
    pad_steps = int(math.ceil(cfg.pad / dt))
    j_lo, j_hi = -pad_steps, int(gidx[-1]) + pad_steps
    n_lattice = j_hi - j_lo + 1
    mass = c0 * n_lattice * dt / nu
    shift = grid_shift(model, dt) if grid_correction else 0.0

    vt = stream(seed, "psi2-points", field_index)
    eta = np.full(gidx.size, -np.inf)
    gamma = 0.0
    k = 0
    stopped_at = None
    extra_changed = 0
    edge_hits = 0
    edge = pad_steps // 10
    while True:
        spacings = vt.standard_exponential(PSI2_BLOCK)
        lattice = vt.integers(j_lo, j_hi + 1, size=PSI2_BLOCK)
        for e, j in zip(spacings, lattice):
            gamma += e
            v = -math.log(nu * gamma / mass) / nu
            if stopped_at is None and v - shift <= eta.min():
                stopped_at = k
            if stopped_at is not None and k >= stopped_at + extra_particles:
                return MaxStableField(
                    cfg.t_grid.copy(),
                    eta,
                    stopped_at,
                    0.0,
                    {"extra_changed": extra_changed, "edge_hits": edge_hits, "window": n_lattice * dt},
                )
            lags = gidx - j
            window = float(np.abs(lags).max()) * dt
            y = sample_y(model, nu, dt, 0.0, 0.0, window, margin, stream(seed, "psi2-particle", field_index, k))
            cand = v - shift + y.at_many(lags)
            better = cand > eta
            if better.any():
                if stopped_at is not None:
                    extra_changed += 1
                else:
                    eta = np.where(better, cand, eta)
                    if j < j_lo + edge or j > j_hi - edge:
                        edge_hits += 1
            k += 1


@lru_cache(maxsize=32)
def _chernoff_table(model: LevyModel, nu: float, offsets: tuple, step: float, top: float) -> np.ndarray:
    """``log`` of an upper bound on ``int_D^inf e^{nu a} P(max_k Z(s_k) > a) da``
    tabulated at ``D = 0, step, 2 step, ...``."""
    dom = model.domain()
    theta_max = min(dom.upper, nu - dom.lower)
    span = theta_max - nu if math.isfinite(theta_max) else 80.0
    thetas = nu + np.geomspace(1e-4, span * (1 - 1e-9), 1500)
    psi_nu = psi(model, nu)
    rows = []
    for s in offsets:
        if s > 0:
            rows.append([s * psi(model, t) for t in thetas])
        elif s < 0:
            rows.append([-s * (psi(model, nu - t) - psi_nu) for t in thetas])
    log_mgf = np.logaddexp.reduce(np.array(rows), axis=0)
    ds = np.arange(0.0, top + step, step)
    out = np.empty(ds.size)
    gap = thetas - nu
    base = log_mgf - np.log(gap)
    for start in range(0, ds.size, 512):
        chunk = ds[start:start + 512]
        out[start:start + 512] = np.min(base[None, :] - gap[None, :] * chunk[:, None], axis=1)
    return out


def psi1_block(
    model: LevyModel,
    cfg: FieldConfig,
    seed: int,
    field_index: int,
    b: int,
    clock: float = 0.0,
    block: int = PSI1_BLOCK,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Particles ``b*block, ..., (b+1)*block - 1`` of a Psi1 field.

    ``clock`` is the unit-rate arrival time of the previous block's last
    particle.  Returns the arrival times, the decreasing levels
    ``U = -log(nu * Gamma) / nu`` and ``Z[i, k] = Z_i(t_k)``.
    """
    nu, t = cfg.nu, cfg.t_grid
    tilted = esscher_tilt(model, nu)
    rng = stream(seed, "psi1-block", field_index, b)
    arrivals = clock + np.cumsum(rng.standard_exponential(block))
    u = -np.log(nu * arrivals) / nu
    z = np.zeros((block, t.size))
    for side, order, sign in ((model, np.flatnonzero(t > 0), 1.0), (tilted, np.flatnonzero(t < 0)[::-1], -1.0)):
        prev, acc = 0.0, np.zeros(block)
        for i in order:
            acc = acc + increments(side, block, abs(t[i]) - prev, rng)
            z[:, i] = sign * acc
            prev = abs(t[i])
    return arrivals, u, z


def sample_psi1_eta(
    model: LevyModel,
    cfg: FieldConfig,
    seed: int,
    field_index: int = 0,
    block: int = PSI1_BLOCK,
    table_step: float = 0.01,
    table_top: float = 200.0,
) -> MaxStableField:
    """One field from the particle system ``U_i + Z_i`` (exact at grid times).

    After particle ``k`` the discarded particles can only matter if some
    ``U_i + max_s Z_i(s)`` exceeds the current field minimum ``m``.  Their
    expected number is at most ``e^{-nu m} B(m - U_k)`` with ``B`` the
    tabulated Chernoff bound; sampling stops at the first ``k`` where this
    falls to ``cfg.delta``, which is reported as ``truncation_gap``.
    """
    require_valid(model)
    nu, t = cfg.nu, cfg.t_grid
    offsets = tuple(float(s) for s in t if s != 0)
    table = _chernoff_table(model, nu, offsets, table_step, table_top)
    log_delta = math.log(cfg.delta)

    eta = np.full(t.size, -np.inf)
    clock = 0.0
    b = 0
    while True:
        arrivals, u, z = psi1_block(model, cfg, seed, field_index, b, clock, block)
        running = np.maximum(np.maximum.accumulate(u[:, None] + z, axis=0), eta[None, :])
        m = running.min(axis=1)
        gap = m - u
        idx = np.clip(np.floor(gap / table_step).astype(np.int64), 0, table.size - 1)
        log_eps = np.where(gap > 0, -nu * m + table[idx], np.inf)
        hit = np.flatnonzero(log_eps <= log_delta)
        if hit.size:
            k = int(hit[0])
            return MaxStableField(
                t.copy(),
                running[k],
                b * block + k + 1,
                float(math.exp(log_eps[k])),
                {"blocks": b + 1, "floor": float(u[k])},
            )
        eta = running[-1]
        clock = float(arrivals[-1])
        b += 1


def _psi2_field(i, model, cfg, dt, seed, margin, grid_correction):
    f = sample_psi2_eta(model, cfg, dt, seed, i, margin=margin, grid_correction=grid_correction)
    return f.eta, f.n_particles, f.truncation_gap


def _psi1_field(i, model, cfg, seed):
    f = sample_psi1_eta(model, cfg, seed, i)
    return f.eta, f.n_particles, f.truncation_gap


def sample_fields(
    kind: str,
    model: LevyModel,
    cfg: FieldConfig,
    n: int,
    seed: int,
    dt: float = 0.05,
    workers: Optional[int] = None,
    margin: Optional[float] = None,
    grid_correction: bool = True,
    first: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``n`` independent fields (indices ``first .. first+n-1``).

    Returns ``(eta[n, len(t_grid)], n_particles[n], truncation_gap[n])``.
    """
    if kind == "psi2":
        fn = partial(_psi2_field, model=model, cfg=cfg, dt=dt, seed=seed, margin=margin,
                     grid_correction=grid_correction)
    elif kind == "psi1":
        fn = partial(_psi1_field, model=model, cfg=cfg, seed=seed)
    else:
        raise ValueError(f"unknown particle system {kind!r}")
    out = parallel_map(lambda_shift(fn, first), n, workers)
    eta = np.stack([o[0] for o in out])
    return eta, np.array([o[1] for o in out]), np.array([o[2] for o in out])


class lambda_shift:
    """Picklable ``k -> fn(first + k)``."""

    def __init__(self, fn, first: int):
        self.fn, self.first = fn, first

    def __call__(self, k: int):
        return self.fn(self.first + k)
