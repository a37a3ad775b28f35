"""Monte Carlo estimators built on the Z / Y samplers.

``estimate_c0_inverse`` integrates ``exp(nu Y)`` over the line.  The dual
estimator compares, box by box, the law of (T, sup Z, shifted Z) with the
Y-side expression ``C exp(-nu x + (psi(nu) + p - q) t) P(Y in B, -Y(-t) in dx) dt``.

Both estimators work on the dt-lattice: times of the supremum are lattice
points, so the Y side is summed over the lattice points of each box.  The
grid maximum of the Y side is lowered by :func:`~levy_mmm.paths.grid_shift`
(``grid_correction=True``), which removes the leading sqrt(dt) bias of the
discrete maximum.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np

from .fluctuation import ApplicabilityError, c0 as c0_closed, c_killed
from .models import LevyModel, esscher_tilt, psi, psi_prime
from .paths import TwoSidedPath, build_z, default_margin, grid_shift, sample_y, supremum_split
from .rng import compensated_mean_se, parallel_map, stream

H_CONST = "const"
H_SUP = "sup_below"
H_VALUE = "value_below"
PATH_FUNCTIONALS = (H_CONST, H_SUP, H_VALUE)

# the path functionals look at the shifted path on [FUNC_START, FUNC_END]
FUNC_START, FUNC_END, FUNC_LEVEL = 0.5, 1.0, -0.5


@dataclass
class McEstimate:
    mean: float
    std_error: float
    n: int
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values, **diagnostics) -> "McEstimate":
        mean, se = compensated_mean_se(values)
        return cls(mean, se, len(values), diagnostics)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["se"] = out.pop("std_error")
        return out


@dataclass(frozen=True)
class Box:
    """Box test function ``1{t1 <= T <= t2, x1 <= sup Z <= x2}``."""

    t1: float
    t2: float
    x1: float
    x2: float

    def lattice(self, dt: float) -> np.ndarray:
        lo = math.ceil(self.t1 / dt - 1e-9)
        hi = math.floor(self.t2 / dt + 1e-9)
        return np.arange(lo, hi + 1, dtype=np.int64)


def path_functional(tag: str, path: TwoSidedPath) -> float:
    """Bounded functional of a path shifted so its supremum sits at the origin.

    ``sup_below``: the path stays at or below ``FUNC_LEVEL`` on
    ``[FUNC_START, FUNC_END]`` (dead points are ignored);
    ``value_below``: the path is alive at ``FUNC_END`` and at or below the level.
    """
    if tag == H_CONST:
        return 1.0
    dt = path.dt
    if tag == H_SUP:
        ks = np.arange(math.ceil(FUNC_START / dt - 1e-9), math.floor(FUNC_END / dt + 1e-9) + 1)
        vals = path.at_many(ks)
        vals = vals[~np.isnan(vals)]
        return float(vals.size == 0 or vals.max() <= FUNC_LEVEL)
    if tag == H_VALUE:
        v = path.at(int(round(FUNC_END / dt)))
        return float(v is not None and v <= FUNC_LEVEL)
    raise ValueError(f"unknown path functional {tag!r}")


def _c0_inverse_replicate(k, model, nu, dt, window, margin, seed, shift):
    y = sample_y(model, nu, dt, 0.0, 0.0, window, margin, stream(seed, "c0-inverse", k))
    _, v = y.arrays()
    integral = float(np.trapezoid(np.exp(nu * v), dx=dt)) * math.exp(-nu * shift)
    # beyond each end the conditioned path keeps drifting away at its mean speed
    down = abs(psi_prime(model, 0.0))
    up = psi_prime(model, nu)
    tail = math.exp(nu * y.right.values[-1]) / (nu * down) + math.exp(nu * y.left.values[-1]) / (nu * up)
    return integral, tail, v.size * dt


def estimate_c0_inverse(
    model: LevyModel,
    nu: float,
    dt: float,
    window: float = 1.0,
    margin: Optional[float] = None,
    n: int = 20_000,
    seed: int = 0,
    workers: Optional[int] = None,
    grid_correction: bool = True,
) -> McEstimate:
    """Monte Carlo estimate of ``E int exp(nu Y(t)) dt`` (the inverse of C0)."""
    margin = default_margin(nu) if margin is None else margin
    shift = grid_shift(model, dt) if grid_correction else 0.0
    fn = partial(
        _c0_inverse_replicate,
        model=model, nu=nu, dt=dt, window=window, margin=margin, seed=seed, shift=shift,
    )
    out = parallel_map(fn, n, workers)
    values = [o[0] for o in out]
    tails = np.array([o[1] for o in out])
    return McEstimate.from_values(
        values,
        grid_shift=shift,
        tail_estimate_mean=float(tails.mean()),
        tail_estimate_max=float(tails.max()),
        mean_support=float(np.mean([o[2] for o in out])),
        dt=dt,
    )


def _z_replicate(k, model, nu, dt, p, q, horizon, hs, seed):
    z = build_z(model, nu, dt, p, q, horizon, stream(seed, "dual-z", k))
    split = supremum_split(z)
    shifted = split.shifted
    return split.sup_index, split.sup_value, tuple(path_functional(h, shifted) for h in hs)


def _y_replicate(k, model, nu, dt, p, q, window, margin, boxes, hs, seed, shift, exponent):
    y = sample_y(model, nu, dt, p, q, window, margin, stream(seed, "dual-y", k))
    hv = np.array([path_functional(h, y) for h in hs])
    killed = p > 0
    out = np.zeros((len(boxes), len(hs)))
    outside = 0
    for b, box in enumerate(boxes):
        js = box.lattice(dt)
        vals = y.at_many(-js)
        missing = np.isnan(vals)
        if missing.any() and not killed:
            outside += 1
        ok = ~missing
        v = vals[ok]
        t = js[ok] * dt
        inside = (-v >= box.x1) & (-v <= box.x2)
        w = np.exp(nu * (v - shift) + exponent * t) * inside
        out[b] = dt * float(np.sum(w)) * hv
    return out, outside


def dual_estimator_panel(
    model: LevyModel,
    nu: float,
    p: float,
    q: float,
    dt: float,
    boxes: Sequence[Box],
    hs: Sequence[str] = (H_CONST,),
    n: int = 20_000,
    seed: int = 0,
    horizon: Optional[float] = None,
    window: float = 1.0,
    margin: Optional[float] = None,
    constant: Optional[float] = None,
    workers: Optional[int] = None,
    grid_correction: bool = True,
    return_raw: bool = False,
):
    """Both sides of the two-sided identity for every (box, functional) pair.

    Returns ``{(box_index, h): (lhs, rhs)}`` of :class:`McEstimate`.  The
    Z-side and Y-side replicates are shared across the panel.  With
    ``return_raw`` the per-replicate Z-side data (lattice index and value of
    the supremum, functional values) is returned as a second element.
    """
    killed = p > 0 and q > 0
    margin = default_margin(nu) if margin is None else margin
    reach = max([abs(b.t1) for b in boxes] + [abs(b.t2) for b in boxes] + [FUNC_END])
    window = max(window, reach)
    if horizon is None and not killed:
        speed = min(abs(psi_prime(model, 0.0)), abs(psi_prime(esscher_tilt(model, nu), 0.0)))
        horizon = 20.0 / speed + reach
    constant_source = "given"
    if constant is None:
        try:
            constant = c_killed(model, nu, p, q) if killed else c0_closed(model, nu)
            constant_source = "closed_form"
        except ApplicabilityError:
            if killed:
                raise
            inv = estimate_c0_inverse(model, nu, dt, 1.0, margin, n, seed, workers, grid_correction)
            constant = 1.0 / inv.mean
            constant_source = "monte_carlo"
    shift = grid_shift(model, dt) if grid_correction else 0.0
    exponent = psi(model, nu) + p - q

    zfn = partial(_z_replicate, model=model, nu=nu, dt=dt, p=p, q=q, horizon=horizon, hs=tuple(hs), seed=seed)
    zs = parallel_map(zfn, n, workers)
    sup_idx = np.array([z[0] for z in zs])
    sup_val = np.array([z[1] for z in zs])
    zh = np.array([z[2] for z in zs])

    yfn = partial(
        _y_replicate, model=model, nu=nu, dt=dt, p=p, q=q, window=window, margin=margin,
        boxes=tuple(boxes), hs=tuple(hs), seed=seed, shift=shift, exponent=exponent,
    )
    ys = parallel_map(yfn, n, workers)
    yv = np.stack([y[0] for y in ys]) * constant
    outside = int(sum(y[1] for y in ys))

    result = {}
    for b, box in enumerate(boxes):
        js = box.lattice(dt)
        hit = (sup_idx >= js[0]) & (sup_idx <= js[-1]) & (sup_val >= box.x1) & (sup_val <= box.x2) if js.size else np.zeros(n, bool)
        for i, h in enumerate(hs):
            diag = {"box": asdict(box), "h": h, "constant": constant, "constant_source": constant_source}
            lhs = McEstimate.from_values((hit * zh[:, i]).astype(float), **diag)
            rhs = McEstimate.from_values(yv[:, b, i], outside_support=outside, grid_shift=shift, **diag)
            result[(b, h)] = (lhs, rhs)
    if return_raw:
        return result, {"sup_index": sup_idx, "sup_value": sup_val, "h": dict(zip(hs, zh.T))}
    return result


def dual_estimator(
    model: LevyModel,
    nu: float,
    p: float,
    q: float,
    dt: float,
    box: Box,
    h: str = H_CONST,
    n: int = 20_000,
    seed: int = 0,
    **kwargs,
) -> tuple[McEstimate, McEstimate]:
    """Single-box version of :func:`dual_estimator_panel`."""
    return dual_estimator_panel(model, nu, p, q, dt, [box], [h], n, seed, **kwargs)[(0, h)]


def z_score(a: McEstimate, b: McEstimate) -> float:
    se = math.hypot(a.std_error, b.std_error)
    if se == 0:
        return 0.0 if a.mean == b.mean else math.inf
    return (a.mean - b.mean) / se
