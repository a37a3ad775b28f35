"""Command line front end: ``levy-mmm <command> --config FILE``.

Exit codes: 0 success (all checks pass), 1 a verification check failed,
2 usage, configuration or applicability error, 3 a sampler ran out of horizon.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .estimators import estimate_c0_inverse
from .experiment import field_config, margin_of, note, resolve_c0, resolve_nu
from .fluctuation import ApplicabilityError, NoRoot, NotDrifting, fluctuation_constants, ladder_exponents
from .io import dumps, write_csv, write_field_csv, write_json, write_path_csv
from .models import DomainError, esscher_tilt, psi, psi_prime
from .particles import sample_psi1_eta, sample_psi2_eta
from .paths import HorizonExhausted, build_z, sample_y
from .plotting import PlottingUnavailable
from .rng import parallel_map, stream
from .stats import gumbel_cdf
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_EXHAUSTED = 0, 1, 2, 3
SIMULATE_KINDS = ("z", "y", "eta-psi1", "eta-psi2")


class Run:
    """Resolved command context: config with overrides, seed, workers, output directory."""

    def __init__(self, args: argparse.Namespace):
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg.mc = replace(cfg.mc, master_seed=args.seed)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be at least 1")
            cfg.mc = replace(cfg.mc, workers=args.workers)
        if args.out is not None:
            cfg.output = replace(cfg.output, directory=args.out)
        if getattr(args, "figures", False) and "png" not in cfg.output.formats:
            cfg.output = replace(cfg.output, formats=cfg.output.formats + ("png",))
        self.cfg: ExperimentConfig = cfg
        self.seed = cfg.mc.master_seed
        self.workers = cfg.mc.workers
        self.out = Path(cfg.output.directory)
        self.started = time.perf_counter()
        self.files: list[str] = []

    def wants(self, fmt: str) -> bool:
        return fmt in self.cfg.output.formats

    def target(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return self.out / name

    def manifest(self, command: str, extra: Optional[dict] = None) -> None:
        body = {
            "command": command,
            "version": f"v{__version__}",
            "seed": self.seed,
            "config": self.cfg.echo(),
            "files": sorted(self.files),
        }
        if extra:
            body.update(extra)
        body["wall_time_s"] = round(time.perf_counter() - self.started, 3)
        write_json(self.out / f"manifest_{command.replace(' ', '_')}.json", body)


def cmd_constants(run: Run) -> int:
    cfg = run.cfg
    nu = resolve_nu(cfg)
    consts = fluctuation_constants(cfg.model, nu, cfg.p, cfg.q)
    if consts.c0 is None and consts.method == "monte_carlo":
        note("model has jumps of both signs; no closed-form C0, run `estimate-c0` for a Monte Carlo value")
    sys.stdout.write(dumps(consts.to_dict()))
    return EXIT_OK


def cmd_estimate_c0(run: Run) -> int:
    cfg = run.cfg
    nu = resolve_nu(cfg)
    est = estimate_c0_inverse(cfg.model, nu, cfg.numerics.dt, cfg.numerics.window, margin_of(cfg, nu),
                              cfg.mc.n, run.seed, run.workers)
    closed = fluctuation_constants(cfg.model, nu).c0
    body = {
        "nu": nu,
        "c0_inverse": est.mean,
        "c0_inverse_se": est.std_error,
        "c0_estimate": 1.0 / est.mean,
        "c0_estimate_se": est.std_error / est.mean ** 2,
        "c0_closed_form": closed,
        "n": est.n,
        "diagnostics": est.diagnostics,
    }
    if run.wants("json"):
        write_json(run.target("estimate_c0.json"), body)
        run.manifest("estimate-c0")
    sys.stdout.write(dumps(body))
    return EXIT_OK


def _z_path(k, model, nu, dt, p, q, horizon, seed):
    return build_z(model, nu, dt, p, q, horizon, stream(seed, "simulate-z", k))


def _y_path(k, model, nu, dt, p, q, window, margin, horizon, seed):
    return sample_y(model, nu, dt, p, q, window, margin, stream(seed, "simulate-y", k), horizon)


def _field(k, kind, model, fcfg, dt, margin, seed):
    if kind == "eta-psi2":
        return sample_psi2_eta(model, fcfg, dt, seed, k, margin=margin)
    return sample_psi1_eta(model, fcfg, seed, k)


def cmd_simulate(run: Run, kind: str) -> int:
    cfg, num = run.cfg, run.cfg.numerics
    nu = resolve_nu(cfg)
    n = cfg.mc.paths
    if kind in ("z", "y"):
        if kind == "z":
            horizon = num.horizon
            if horizon is None and not cfg.killed:
                speed = min(abs(psi_prime(cfg.model, 0.0)), abs(psi_prime(esscher_tilt(cfg.model, nu), 0.0)))
                horizon = 20.0 / speed + num.window
            fn = partial(_z_path, model=cfg.model, nu=nu, dt=num.dt, p=cfg.p, q=cfg.q, horizon=horizon, seed=run.seed)
        else:
            fn = partial(_y_path, model=cfg.model, nu=nu, dt=num.dt, p=cfg.p, q=cfg.q, window=num.window,
                         margin=margin_of(cfg, nu), horizon=num.horizon, seed=run.seed)
        paths = parallel_map(fn, n, run.workers)
        if run.wants("csv"):
            for k, p in enumerate(paths):
                write_path_csv(run.target(f"{kind}_{k}.csv"), p)
        if run.wants("png"):
            from .plotting import plot_paths

            plot_paths(run.target(f"{kind}.png"), paths, f"{kind.upper()} sample paths", kind.upper())
    else:
        constant, source = resolve_c0(cfg, nu, run.seed, run.workers)
        fcfg = field_config(cfg, nu, constant)
        fn = partial(_field, kind=kind, model=cfg.model, fcfg=fcfg, dt=num.dt, margin=margin_of(cfg, nu), seed=run.seed)
        fields = parallel_map(fn, n, run.workers)
        stem = kind.replace("-", "_")
        if run.wants("csv"):
            for k, f in enumerate(fields):
                write_field_csv(run.target(f"{stem}_{k}.csv"), f.t_grid, f.eta)
        diagnostics = [
            {"n_particles": f.n_particles, "truncation_gap": f.truncation_gap, "pad": fcfg.pad, "delta": fcfg.delta}
            for f in fields
        ]
        if run.wants("json"):
            write_json(run.target(f"{stem}_diagnostics.json"),
                       {"c0": constant, "c0_source": source, "nu": nu, "fields": diagnostics})
        if run.wants("png"):
            from .plotting import plot_fields

            plot_fields(run.target(f"{stem}.png"), fcfg.t_grid, [f.eta for f in fields], f"max-stable field ({kind})")
    run.manifest(f"simulate {kind}", {"n": n, "nu": nu})
    return EXIT_OK


def cmd_verify(run: Run, suite: str) -> int:
    reports = run_suite(suite, run.cfg, run.seed, run.workers)
    body = [r.to_dict() for r in reports]
    if run.wants("json"):
        write_json(run.target(f"verify_{suite}.json"), body)
        run.manifest(f"verify {suite}")
    sys.stdout.write(dumps(body))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_export(run: Run) -> int:
    """Plot-ready tables: psi and its tilt, ladder exponents, Gumbel marginal."""
    cfg = run.cfg
    model = cfg.model
    nu = resolve_nu(cfg)
    tilted = esscher_tilt(model, nu)
    dom = model.domain()
    lo = max(dom.lower, -3.0 * nu - 1.0)
    hi = min(dom.upper, 3.0 * nu + 1.0)
    thetas = np.linspace(lo, hi, 203)[1:-1]
    rows = [(th, psi(model, th), psi(tilted, th - nu) if (th - nu) in tilted.domain() else math.nan) for th in thetas]
    write_csv(run.target("psi.csv"), ("theta", "psi", "psi_tilted_shifted"), rows)
    if model.spectrally_negative or model.spectrally_positive:
        alphas = np.linspace(0.0, 5.0, 51)
        write_csv(run.target("ladder.csv"), ("alpha", "k_up", "k_down"),
                  [(a, *ladder_exponents(model, a, 0.0)) for a in alphas])
    xs = np.linspace(-4.0 / nu, 8.0 / nu, 241)
    write_csv(run.target("gumbel.csv"), ("x", "cdf"), zip(xs, gumbel_cdf(xs, nu)))
    write_json(run.target("constants.json"), fluctuation_constants(model, nu, cfg.p, cfg.q).to_dict())
    if run.wants("png"):
        from .plotting import plot_curve

        plot_curve(run.target("psi.png"), thetas, {"psi": [r[1] for r in rows]}, "Laplace exponent", "theta")
    run.manifest("export", {"nu": nu})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config file")
    common.add_argument("--seed", type=int, help="override mc.master_seed")
    common.add_argument("--out", help="override output.directory")
    common.add_argument("--workers", type=int, help="worker processes (default: mc.workers, then $LEVY_MMM_WORKERS, then 1)")
    common.add_argument("--figures", action="store_true", help="also write PNG figures (needs matplotlib)")

    parser = argparse.ArgumentParser(prog="levy-mmm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="fluctuation constants as JSON")
    sub.add_parser("estimate-c0", parents=[common], help="Monte Carlo estimate of 1/C0")
    sim = sub.add_parser("simulate", parents=[common], help="write sample paths or fields")
    sim.add_argument("kind", choices=SIMULATE_KINDS)
    ver = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ver.add_argument("suite", choices=sorted(SUITES))
    sub.add_parser("export", parents=[common], help="plot-ready tables")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        run = Run(args)
        if args.command == "constants":
            return cmd_constants(run)
        if args.command == "estimate-c0":
            return cmd_estimate_c0(run)
        if args.command == "simulate":
            return cmd_simulate(run, args.kind)
        if args.command == "verify":
            return cmd_verify(run, args.suite)
        return cmd_export(run)
    except HorizonExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (ConfigError, ApplicabilityError, DomainError, NotDrifting, NoRoot, ValueError) as exc:
        print(f"error: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}", file=sys.stderr)
        return EXIT_CONFIG
    except PlottingUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
