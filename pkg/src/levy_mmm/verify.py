"""Named verification suites producing :class:`~levy_mmm.stats.TestReport` lists.

Deterministic suites (``constants``, ``ladder``, ``tilt``) compare closed
forms at ``1e-9``.  The identity suites compare both sides of the
supremum identity on a fixed six-box panel at ``|z| < 3``.  Distributional
suites run KS tests at ``alpha = 0.01`` split evenly over the tests of the
suite (Bonferroni).
"""

from __future__ import annotations

import math
import zlib
from typing import Callable, Optional

import numpy as np

from .config import ExperimentConfig
from .estimators import H_CONST, H_SUP, Box, dual_estimator_panel
from .experiment import field_config, margin_of, resolve_c0, resolve_nu
from .fluctuation import (
    ApplicabilityError,
    SPECTRALLY_NEGATIVE,
    SPECTRALLY_POSITIVE,
    c0,
    c_killed,
    find_nu,
    ladder_exponents,
    phi,
)
from .models import esscher_tilt, psi, psi_prime
from .particles import sample_fields
from .stats import TestReport, exact_report, ks_report, ks_two_sample, ks_vs_gumbel

ALPHA = 0.01
Z_LIMIT = 3.0
EXACT_TOL = 1e-9

BOX_PANEL = (
    Box(0.2, 1.0, 0.1, 1.5),
    Box(-1.0, -0.2, 0.1, 1.5),
    Box(1.0, 3.0, 0.0, 1.0),
    Box(-3.0, -1.0, 0.0, 1.0),
    Box(0.0, 2.0, 1.5, 4.0),
    Box(-2.0, 0.0, 1.5, 4.0),
)
IDENTITY_FUNCTIONALS = (H_CONST, H_SUP)

# fixed evaluation points for the deterministic suites
_RATES = (0.05, 0.3, 1.0, 2.5, 7.0)
_BETAS = (0.0, 0.25, 0.8)


def member_seed(seed: int, suite: str, member: str) -> int:
    """Independent seed for one member test of a suite."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(suite.encode()), zlib.crc32(member.encode())))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _one_sided_method(cfg: ExperimentConfig) -> str:
    if cfg.model.spectrally_negative:
        return SPECTRALLY_NEGATIVE
    if cfg.model.spectrally_positive:
        return SPECTRALLY_POSITIVE
    raise ApplicabilityError("this suite needs a spectrally one-sided model")


def suite_constants(cfg: ExperimentConfig, seed: int, workers) -> list[TestReport]:
    model = cfg.model
    nu = find_nu(model)
    reports = [
        exact_report("psi(nu) = 0", psi(model, nu), 0.0, 1e-12),
        TestReport("nu > 0 and psi'(nu) > 0", nu, nu > 0 and psi_prime(model, nu) > 0),
    ]
    method = _one_sided_method(cfg)
    constant = c0(model, nu, method)
    reports.append(TestReport("c0 > 0", constant, constant > 0, notes=f"c0={constant!r}"))
    if method == SPECTRALLY_NEGATIVE:
        reports.append(exact_report("c0 = nu psi'(nu)", constant, nu * psi_prime(model, nu), EXACT_TOL))
    else:
        reports.append(exact_report("c0 = -nu psi'(0)", constant, -nu * psi_prime(model, 0.0), EXACT_TOL))
    small = 1e-9
    reports.append(exact_report("c_killed -> c0 as p, q -> 0", c_killed(model, nu, small, small, method), constant, 1e-6))
    if model.is_brownian:
        mu, s2 = model.drift, model.sigma2
        reports.append(exact_report("Brownian nu = -2 mu / sigma2", nu, -2 * mu / s2, EXACT_TOL))
        reports.append(exact_report("Brownian c0 = 2 mu^2 / sigma2", constant, 2 * mu * mu / s2, EXACT_TOL))
        reports.append(exact_report("Brownian c0 formulas agree", c0(model, nu, SPECTRALLY_NEGATIVE),
                                    c0(model, nu, SPECTRALLY_POSITIVE), EXACT_TOL))
        p, q = (cfg.p, cfg.q) if cfg.killed else (1.0, 1.0)
        reports.append(exact_report(f"Brownian c_killed formulas agree (p={p}, q={q})",
                                    c_killed(model, nu, p, q, SPECTRALLY_NEGATIVE),
                                    c_killed(model, nu, p, q, SPECTRALLY_POSITIVE), EXACT_TOL))
    return reports


def suite_ladder(cfg: ExperimentConfig, seed: int, workers) -> list[TestReport]:
    model = cfg.model
    method = _one_sided_method(cfg)
    nu = resolve_nu(cfg)
    tilted = esscher_tilt(model, nu)
    psi_nu = psi(model, nu)
    reports = []
    for p in _RATES:
        up, down = ladder_exponents(model, p, 0.0, method)
        reports.append(exact_report(f"kk: k_up({p},0) k_down({p},0) = {p}", up * down, p, EXACT_TOL))
        up_t, down_t = ladder_exponents(tilted, p, 0.0, method)
        reports.append(exact_report(f"kk_nu: tilted product at p={p}", up_t * down_t, p, EXACT_TOL))
    for a in _RATES:
        for b in _BETAS:
            up_t, down_t = ladder_exponents(tilted, a, b, method)
            up, _ = ladder_exponents(model, a + psi_nu, b - nu, method)
            _, down = ladder_exponents(model, a + psi_nu, b + nu, method)
            reports.append(exact_report(f"knu: k_down^nu({a},{b})", down_t, down, EXACT_TOL))
            reports.append(exact_report(f"knu: k_up^nu({a},{b})", up_t, up, EXACT_TOL))
    if method == SPECTRALLY_NEGATIVE and abs(psi_nu) < 1e-9:
        _, down = ladder_exponents(model, 0.0, nu, method)
        reports.append(exact_report("k_down(0, nu) = psi'(nu)", down, psi_prime(model, nu), 1e-6))
    return reports


def suite_tilt(cfg: ExperimentConfig, seed: int, workers) -> list[TestReport]:
    model = cfg.model
    nu = resolve_nu(cfg)
    tilted = esscher_tilt(model, nu)
    psi_nu = psi(model, nu)
    dom = tilted.domain()
    reports = []
    for theta in (-0.7, -0.2, 0.0, 0.3, 0.9):
        if theta in dom:
            reports.append(exact_report(f"psi^nu({theta}) = psi({theta}+nu) - psi(nu)",
                                        psi(tilted, theta), psi(model, theta + nu) - psi_nu, EXACT_TOL))
    reports.append(exact_report("E X^nu(1) = psi'(nu)", psi_prime(tilted, 0.0), psi_prime(model, nu), EXACT_TOL))
    if model.spectrally_negative:
        for q in _RATES:
            reports.append(exact_report(f"Phi^nu({q}) = Phi({q}+psi(nu)) - nu", phi(tilted, q), phi(model, q + psi_nu) - nu, EXACT_TOL))
        for q in _RATES:
            reports.append(exact_report(f"psi(Phi({q})) = {q}", psi(model, phi(model, q)), q, EXACT_TOL))
    return reports


def _identity(cfg: ExperimentConfig, seed: int, workers, killed: bool) -> list[TestReport]:
    nu = resolve_nu(cfg)
    if killed:
        if not cfg.killed:
            raise ApplicabilityError("killed_identity needs positive p and q in [regime]")
        p, q = cfg.p, cfg.q
    else:
        if cfg.killed:
            raise ApplicabilityError("corollary_identity needs p = q = 0")
        p = q = 0.0
    n = cfg.mc.n
    suite = "killed_identity" if killed else "corollary_identity"
    panel, raw = dual_estimator_panel(
        cfg.model, nu, p, q, cfg.numerics.dt, BOX_PANEL, IDENTITY_FUNCTIONALS, n,
        member_seed(seed, suite, "panel"), horizon=cfg.numerics.horizon, window=cfg.numerics.window,
        margin=margin_of(cfg, nu), workers=workers, return_raw=True,
    )
    reports = []
    for (b, h), (lhs, rhs) in panel.items():
        box = BOX_PANEL[b]
        se = math.hypot(lhs.std_error, rhs.std_error)
        z = 0.0 if lhs.mean == rhs.mean else (lhs.mean - rhs.mean) / se if se > 0 else math.inf
        reports.append(TestReport(
            f"{suite} box{b}=[{box.t1},{box.t2}]x[{box.x1},{box.x2}] h={h}",
            lhs.mean - rhs.mean, abs(z) < Z_LIMIT, n, z_score=z,
            notes=f"lhs={lhs.mean:.6g}+-{lhs.std_error:.2g} rhs={rhs.mean:.6g}+-{rhs.std_error:.2g} C={lhs.diagnostics['constant']:.6g}",
        ))
    if not killed:
        reports.extend(_factorization(raw, cfg.numerics.dt))
    return reports


def _factorization(raw: dict, dt: float) -> list[TestReport]:
    """Post-supremum functional independent of (T, sup) on boxes with T > 0.

    Checks ``E[h 1_box] E[1_full] = E[h 1_full] E[1_box]`` where ``full`` is
    the event ``T > 0``; the statistic is a difference of products whose
    standard error follows from the delta method.
    """
    idx, val = raw["sup_index"], raw["sup_value"]
    h = raw["h"][H_SUP]
    full = (idx > 0).astype(float)
    n = idx.size
    reports = []
    for b, box in enumerate(BOX_PANEL):
        if box.t1 <= 0:
            continue
        js = box.lattice(dt)
        ind = ((idx >= js[0]) & (idx <= js[-1]) & (val >= box.x1) & (val <= box.x2)).astype(float)
        a, bb, c, d = (h * ind).mean(), full.mean(), (h * full).mean(), ind.mean()
        # influence function of a*bb - c*d
        infl = bb * (h * ind - a) + a * (full - bb) - d * (h * full - c) - c * (ind - d)
        se = infl.std(ddof=1) / math.sqrt(n)
        stat = a * bb - c * d
        z = 0.0 if stat == 0 else (stat / se if se > 0 else math.inf)
        reports.append(TestReport(
            f"factorization box{b}=[{box.t1},{box.t2}]x[{box.x1},{box.x2}] h={H_SUP}",
            stat, abs(z) < Z_LIMIT, n, z_score=z,
        ))
    return reports


def _fields(kind: str, cfg: ExperimentConfig, seed: int, workers, n: int, first: int = 0):
    nu = resolve_nu(cfg)
    constant, _ = resolve_c0(cfg, nu, seed, workers)
    fcfg = field_config(cfg, nu, constant)
    eta, _, _ = sample_fields(kind, cfg.model, fcfg, n, seed, dt=cfg.numerics.dt, workers=workers,
                              margin=margin_of(cfg, nu), first=first)
    return nu, fcfg, eta


def suite_psi1_psi2(cfg: ExperimentConfig, seed: int, workers) -> list[TestReport]:
    n = cfg.mc.fields
    _, fcfg, eta1 = _fields("psi1", cfg, member_seed(seed, "psi1_psi2", "psi1"), workers, n)
    _, _, eta2 = _fields("psi2", cfg, member_seed(seed, "psi1_psi2", "psi2"), workers, n)
    grid = fcfg.t_grid
    picks = sorted({0, int(np.argmin(np.abs(grid))), grid.size - 1})
    alpha = ALPHA / len(picks)
    reports = []
    for k in picks:
        d, pv = ks_two_sample(eta1[:, k], eta2[:, k])
        reports.append(ks_report(f"psi1 vs psi2 at t={grid[k]:g}", d, pv, n, alpha, f"alpha={alpha:g}"))
    return reports


def suite_stationarity(cfg: ExperimentConfig, seed: int, workers) -> list[TestReport]:
    """Psi1 fields: eta(0) from one batch against eta(t) of an independent batch."""
    n = cfg.mc.fields
    s = member_seed(seed, "stationarity", "psi1")
    nu, fcfg, eta_a = _fields("psi1", cfg, s, workers, n)
    _, _, eta_b = _fields("psi1", cfg, s, workers, n, first=n)
    grid = fcfg.t_grid
    zero = int(np.argmin(np.abs(grid)))
    others = [k for k in range(grid.size) if k != zero]
    if not others:
        raise ApplicabilityError("stationarity needs at least two grid points")
    alpha = ALPHA / len(others)
    reports = []
    for k in others:
        d, pv = ks_two_sample(eta_a[:, zero], eta_b[:, k])
        reports.append(ks_report(f"eta({grid[zero]:g}) vs eta({grid[k]:g})", d, pv, n, alpha, f"alpha={alpha:g}"))
    return reports


def suite_maxstability(cfg: ExperimentConfig, seed: int, workers) -> list[TestReport]:
    """Psi2 fields: Gumbel marginal and max-stability of eta at the grid point nearest 0."""
    n = cfg.mc.fields
    s = member_seed(seed, "maxstability", "psi2")
    nu, fcfg, single = _fields("psi2", cfg, s, workers, n)
    _, _, pairs = _fields("psi2", cfg, s, workers, 2 * n, first=n)
    k = int(np.argmin(np.abs(fcfg.t_grid)))
    alpha = ALPHA / 2
    d, pv = ks_vs_gumbel(single[:, k], nu)
    reports = [ks_report(f"eta({fcfg.t_grid[k]:g}) vs Gumbel(nu={nu:.6g})", d, pv, n, alpha, f"alpha={alpha:g}")]
    maxima = np.maximum(pairs[0::2, k], pairs[1::2, k]) - math.log(2.0) / nu
    d, pv = ks_two_sample(maxima, single[:, k])
    reports.append(ks_report("max of two fields - log(2)/nu vs one field", d, pv, n, alpha, f"alpha={alpha:g}"))
    return reports


SUITES: dict[str, Callable] = {
    "constants": suite_constants,
    "ladder": suite_ladder,
    "tilt": suite_tilt,
    "corollary_identity": lambda c, s, w: _identity(c, s, w, killed=False),
    "killed_identity": lambda c, s, w: _identity(c, s, w, killed=True),
    "psi1_psi2": suite_psi1_psi2,
    "stationarity": suite_stationarity,
    "maxstability": suite_maxstability,
}


def run_suite(name: str, config: ExperimentConfig, seed: Optional[int] = None, workers: Optional[int] = None) -> list[TestReport]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    seed = config.mc.master_seed if seed is None else seed
    workers = config.mc.workers if workers is None else workers
    return SUITES[name](config, seed, workers)
