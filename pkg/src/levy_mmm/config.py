"""Experiment configuration: a sectioned ``key = value`` file with ``#`` comments.

Example::

    [model]
    drift = -0.5
    sigma2 = 1.0
    jumps.kind = one_sided_exp   # none | gaussian | double_exp | one_sided_exp
    jumps.sign = -1
    jumps.rate = 1.0
    jumps.decay = 2.0

    [regime]
    nu = auto
    p = 0
    q = 0

    [numerics]
    dt = 0.01
    t_grid = -5, 0, 5

    [mc]
    n = 20000
    master_seed = 1

Every key outside ``[model]`` has a default (see ``NUMERICS_DEFAULTS`` and
the dataclasses below); ``auto`` selects a value derived from the model.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .models import DoubleExpJumps, GaussianJumps, LevyModel, OneSidedExpJumps, validate

JUMP_KEYS = {
    "none": (),
    "gaussian": ("rate", "mean", "var"),
    "double_exp": ("rate", "up_prob", "up_decay", "down_decay"),
    "one_sided_exp": ("sign", "rate", "decay"),
}
OUTPUT_FORMATS = ("csv", "json", "png")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass
class Numerics:
    dt: float = 0.01
    horizon: Optional[float] = None  # auto: 20 / |drift speed| + reach
    window: float = 1.0
    margin: Optional[float] = None  # auto: 10 / nu
    pad: Optional[float] = None  # auto: 15 / nu * max(1 / |E X(1)|, 1)
    delta: float = 0.01
    t_grid: tuple = (-5.0, 0.0, 5.0)


@dataclass
class MonteCarlo:
    n: int = 20_000
    fields: int = 5_000
    paths: int = 3
    master_seed: int = 0
    workers: Optional[int] = None  # falls back to LEVY_MMM_WORKERS, then 1


@dataclass
class Output:
    directory: str = "out"
    formats: tuple = ("csv", "json")


@dataclass
class ExperimentConfig:
    model: LevyModel
    nu: Optional[float] = None  # None: solve psi(nu) = 0
    p: float = 0.0
    q: float = 0.0
    numerics: Numerics = field(default_factory=Numerics)
    mc: MonteCarlo = field(default_factory=MonteCarlo)
    output: Output = field(default_factory=Output)

    @property
    def killed(self) -> bool:
        return self.p > 0 and self.q > 0

    def echo(self) -> dict:
        """Plain-data view for manifests."""
        return {
            "model": self.model.describe(),
            "regime": {"nu": "auto" if self.nu is None else self.nu, "p": self.p, "q": self.q},
            "numerics": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.numerics).items()},
            "mc": asdict(self.mc),
            "output": {"directory": self.output.directory, "formats": list(self.output.formats)},
        }


def _number(section, key, default=None, *, auto=False, positive=False, integer=False, unit=False):
    raw = section.get(key) if section is not None else None
    if raw is None or raw.strip() == "":
        if default is ConfigError:
            raise ConfigError(f"missing key {key!r}")
        return default
    raw = raw.strip()
    if auto and raw.lower() == "auto":
        return None
    try:
        value = int(raw) if integer else float(raw)
    except ValueError:
        raise ConfigError(f"{key} = {raw!r} is not {'an integer' if integer else 'a number'}") from None
    if not integer and not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{key} must be positive (got {raw})")
    if unit and not 0 < value < 1:
        raise ConfigError(f"{key} must lie in (0, 1) (got {raw})")
    return value


def _model(section) -> LevyModel:
    if section is None:
        raise ConfigError("missing [model] section")
    drift = _number(section, "drift", ConfigError)
    sigma2 = _number(section, "sigma2", ConfigError)
    kind = section.get("jumps.kind", "none").strip().lower()
    if kind not in JUMP_KEYS:
        raise ConfigError(f"unknown jumps.kind {kind!r}; choose from {', '.join(JUMP_KEYS)}")
    params = {k: _number(section, f"jumps.{k}", ConfigError) for k in JUMP_KEYS[kind]}
    known = {"drift", "sigma2", "jumps.kind"} | {f"jumps.{k}" for k in JUMP_KEYS[kind]}
    extra = sorted(set(section) - known)
    if extra:
        raise ConfigError(f"unexpected [model] key(s) for jumps.kind={kind}: {', '.join(extra)}")
    jumps = None
    if kind == "gaussian":
        jumps = GaussianJumps(**params)
    elif kind == "double_exp":
        jumps = DoubleExpJumps(**params)
    elif kind == "one_sided_exp":
        if params["sign"] not in (1.0, -1.0):
            raise ConfigError("jumps.sign must be +1 or -1")
        params["sign"] = int(params["sign"])
        jumps = OneSidedExpJumps(**params)
    model = LevyModel(drift, sigma2, jumps)
    diag = validate(model)
    if not diag.ok:
        raise ConfigError("invalid model: " + "; ".join(diag.violations))
    return model


def _check_keys(parser: configparser.ConfigParser, name: str, allowed) -> None:
    if parser.has_section(name):
        extra = sorted(set(parser[name]) - set(allowed))
        if extra:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(extra)}")


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {str(exc).splitlines()[0]}") from None
    unknown = sorted(set(parser.sections()) - {"model", "regime", "numerics", "mc", "output"})
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    _check_keys(parser, "regime", ("nu", "p", "q"))
    _check_keys(parser, "numerics", [f for f in Numerics.__dataclass_fields__])
    _check_keys(parser, "mc", [f for f in MonteCarlo.__dataclass_fields__])
    _check_keys(parser, "output", ("directory", "formats"))

    model = _model(parser["model"] if parser.has_section("model") else None)
    get = lambda name: parser[name] if parser.has_section(name) else None

    reg = get("regime")
    nu = _number(reg, "nu", None, auto=True, positive=True)
    p = _number(reg, "p", 0.0)
    q = _number(reg, "q", 0.0)
    if p < 0 or q < 0 or (p > 0) != (q > 0):
        raise ConfigError("killing rates p and q must both be zero or both positive")

    num = get("numerics")
    d = Numerics()
    grid = d.t_grid
    if num is not None and num.get("t_grid"):
        try:
            grid = tuple(float(x) for x in num["t_grid"].split(","))
        except ValueError:
            raise ConfigError(f"t_grid = {num['t_grid']!r} is not a comma-separated list of numbers") from None
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("t_grid must be strictly increasing")
    numerics = Numerics(
        dt=_number(num, "dt", d.dt, positive=True),
        horizon=_number(num, "horizon", None, auto=True, positive=True),
        window=_number(num, "window", d.window, positive=True),
        margin=_number(num, "margin", None, auto=True, positive=True),
        pad=_number(num, "pad", None, auto=True, positive=True),
        delta=_number(num, "delta", d.delta, unit=True),
        t_grid=grid,
    )

    mcs = get("mc")
    m = MonteCarlo()
    workers = _number(mcs, "workers", None, auto=True, positive=True, integer=True)
    mc = MonteCarlo(
        n=_number(mcs, "n", m.n, positive=True, integer=True),
        fields=_number(mcs, "fields", m.fields, positive=True, integer=True),
        paths=_number(mcs, "paths", m.paths, positive=True, integer=True),
        master_seed=_number(mcs, "master_seed", m.master_seed, integer=True),
        workers=workers,
    )
    if mc.master_seed < 0:
        raise ConfigError("master_seed must be non-negative")

    out = get("output")
    o = Output()
    formats = o.formats
    if out is not None and out.get("formats"):
        formats = tuple(f.strip().lower() for f in out["formats"].split(",") if f.strip())
        bad = [f for f in formats if f not in OUTPUT_FORMATS]
        if bad:
            raise ConfigError(f"unknown output format(s): {', '.join(bad)}")
    output = Output(directory=(out.get("directory", o.directory).strip() if out is not None else o.directory),
                    formats=formats)
    return ExperimentConfig(model, nu, p, q, numerics, mc, output)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
