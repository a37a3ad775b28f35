"""Resolution of derived quantities (nu, C0, field settings) from a config."""

from __future__ import annotations

import sys
from typing import Optional

from .config import ConfigError, ExperimentConfig
from .estimators import estimate_c0_inverse
from .fluctuation import ApplicabilityError, NoRoot, NotDrifting, c0 as c0_closed, find_nu
from .models import psi
from .paths import default_margin
from .particles import FieldConfig, default_pad


def resolve_nu(cfg: ExperimentConfig) -> float:
    """Configured ``nu``, or the positive root of ``psi`` when set to auto."""
    if cfg.nu is not None:
        if cfg.nu not in cfg.model.domain():
            raise ConfigError(f"nu = {cfg.nu} lies outside the finiteness domain of psi")
        if not cfg.killed and abs(psi(cfg.model, cfg.nu)) > 1e-8:
            raise ConfigError("without killing nu must solve psi(nu) = 0 (use nu = auto)")
        return cfg.nu
    try:
        return find_nu(cfg.model)
    except (NotDrifting, NoRoot) as exc:
        raise ConfigError(f"nu = auto: {exc}") from None


def resolve_c0(
    cfg: ExperimentConfig, nu: float, seed: Optional[int] = None, workers: Optional[int] = None
) -> tuple[float, str]:
    """``(C0, source)``; two-sided models fall back to the Monte Carlo estimate."""
    try:
        return c0_closed(cfg.model, nu), "closed_form"
    except ApplicabilityError:
        pass
    seed = cfg.mc.master_seed if seed is None else seed
    est = estimate_c0_inverse(
        cfg.model, nu, cfg.numerics.dt, cfg.numerics.window, margin_of(cfg, nu),
        cfg.mc.n, seed, workers if workers is not None else cfg.mc.workers,
    )
    return 1.0 / est.mean, "monte_carlo"


def margin_of(cfg: ExperimentConfig, nu: float) -> float:
    return cfg.numerics.margin if cfg.numerics.margin is not None else default_margin(nu)


def field_config(cfg: ExperimentConfig, nu: float, c0: float) -> FieldConfig:
    pad = cfg.numerics.pad if cfg.numerics.pad is not None else default_pad(cfg.model, nu)
    return FieldConfig(list(cfg.numerics.t_grid), pad, cfg.numerics.delta, nu, c0)


def note(message: str) -> None:
    print(f"note: {message}", file=sys.stderr)



