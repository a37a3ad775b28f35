"""Acceptance criteria 1-9.  Each test prints one ``CRITERION k: PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py -v`` (about five minutes on
one core) or ``python tests/test_acceptance.py``.  The seed below was fixed
before any of these tests were run.
"""

from __future__ import annotations

import io
import json
import sys
import time
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from levy_mmm import LevyModel, OneSidedExpJumps, c0, find_nu
from levy_mmm.cli import main
from levy_mmm.config import parse_config
from levy_mmm.estimators import estimate_c0_inverse
from levy_mmm.verify import run_suite

SEED = 1729
BM_TEXT = "[model]\ndrift = -0.5\nsigma2 = 1.0\n"
FIELD_NUMERICS = "[numerics]\ndt = 0.05\nt_grid = -5, 0, 5\n[mc]\nfields = 5000\n"


_capture = {}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _capture["capsys"] = capsys
    yield
    _capture.clear()


def announce(k: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    capsys = _capture.get("capsys")
    if capsys is None:
        print(line)
        return
    with capsys.disabled():
        print("\n" + line, flush=True)


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def summarize(reports) -> str:
    worst = []
    for r in reports:
        if r.z_score is not None:
            worst.append(f"|z|={abs(r.z_score):.2f}")
        elif r.p_value is not None:
            worst.append(f"p={r.p_value:.3g}")
    failed = [r.name for r in reports if not r.passed]
    return f"{len(reports) - len(failed)}/{len(reports)} pass" + (f"; failed: {failed}" if failed else "") + (
        f"; {', '.join(worst)}" if worst else ""
    )


def test_criterion_1_brownian_constants(tmp_path):
    cfg = tmp_path / "bm.ini"
    cfg.write_text(BM_TEXT)
    t0 = time.perf_counter()
    code, out, _ = run_cli(["constants", "--config", str(cfg)])
    elapsed = time.perf_counter() - t0
    body = json.loads(out)
    ok = code == 0 and abs(body["nu"] - 1.0) <= 1e-12 and abs(body["c0"] - 0.5) <= 1e-12 and elapsed < 1.0
    announce(1, ok, f"nu={body['nu']!r} c0={body['c0']!r} in {elapsed:.3f}s")
    assert ok


@pytest.mark.parametrize(
    "label,model",
    [("BM(-1/2,1)", LevyModel(-0.5, 1.0)), ("BM+exp(-) jumps", LevyModel(-0.25, 1.0, OneSidedExpJumps(-1, 1.0, 2.0)))],
)
def test_criterion_2_c0_monte_carlo(label, model):
    nu = find_nu(model)
    constant = c0(model, nu)
    t0 = time.perf_counter()
    est = estimate_c0_inverse(model, nu, dt=0.01, n=20_000, seed=SEED)
    elapsed = time.perf_counter() - t0
    product = est.mean * constant
    rel_se = est.std_error / est.mean
    ok = abs(product - 1) < 3 * rel_se and abs(product - 1) < 0.05 and elapsed < 300
    announce(2, ok, f"{label}: E int e^(nu Y) * C0 = {product:.4f} (rel SE {rel_se:.4f}) in {elapsed:.1f}s")
    assert ok


def _identity_criterion(k, suite, text):
    cfg = parse_config(text)
    t0 = time.perf_counter()
    reports = run_suite(suite, cfg, SEED)
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reports) and elapsed < 600
    announce(k, ok, f"{suite}: {summarize(reports)} in {elapsed:.0f}s")
    return ok


def test_criterion_3_corollary_identity():
    assert _identity_criterion(3, "corollary_identity", BM_TEXT + "[numerics]\ndt = 0.01\n[mc]\nn = 20000\n")


def test_criterion_4_killed_identity():
    text = BM_TEXT + "[regime]\nnu = 1\np = 1\nq = 1\n[numerics]\ndt = 0.01\n[mc]\nn = 20000\n"
    assert parse_config(text).killed
    assert _identity_criterion(4, "killed_identity", text)


def test_criterion_5_psi1_equals_psi2():
    cfg = parse_config(BM_TEXT + FIELD_NUMERICS)
    t0 = time.perf_counter()
    reports = run_suite("psi1_psi2", cfg, SEED)
    elapsed = time.perf_counter() - t0
    ok = len(reports) == 3 and all(r.passed for r in reports) and elapsed < 1800
    announce(5, ok, f"two-sample KS at t=-5,0,5 (alpha 0.01/3): {summarize(reports)} in {elapsed:.0f}s")
    assert ok


@pytest.fixture(scope="module")
def maxstability_reports():
    return run_suite("maxstability", parse_config(BM_TEXT + FIELD_NUMERICS), SEED)


def test_criterion_6_gumbel_marginal(maxstability_reports):
    gumbel = maxstability_reports[0]
    ok = gumbel.p_value > 0.01 and gumbel.n == 5000
    announce(6, ok, f"{gumbel.name}: KS D={gumbel.statistic:.4f} p={gumbel.p_value:.3g}")
    assert ok


def test_criterion_7_stationarity_and_max_stability(maxstability_reports):
    cfg = parse_config(BM_TEXT + FIELD_NUMERICS)
    station = run_suite("stationarity", cfg, SEED)
    eta5 = [r for r in station if r.name == "eta(0) vs eta(5)"]
    maxstab = maxstability_reports[1]
    ok = len(eta5) == 1 and eta5[0].p_value > 0.01 and maxstab.p_value > 0.01
    announce(7, ok, f"eta(0) vs eta(5) p={eta5[0].p_value:.3g}; max-stability p={maxstab.p_value:.3g} "
                    f"(all stationarity pairs: {summarize(station)})")
    assert ok


def test_criterion_8_deterministic_identities():
    cfg = parse_config(BM_TEXT)
    t0 = time.perf_counter()
    reports = [r for s in ("constants", "ladder", "tilt") for r in run_suite(s, cfg, SEED)]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reports) and elapsed < 1.0
    announce(8, ok, f"{sum(r.passed for r in reports)}/{len(reports)} identities at 1e-9 in {elapsed:.3f}s")
    assert ok


def _snapshot(directory: Path) -> dict:
    files = {}
    for p in sorted(directory.iterdir()):
        if p.name.startswith("manifest_"):
            body = json.loads(p.read_text())
            # run-specific by design: timing and the --workers/--out overrides
            body.pop("wall_time_s")
            body["config"]["mc"].pop("workers")
            body["config"]["output"].pop("directory")
            files[p.name] = json.dumps(body, sort_keys=True).encode()
        else:
            files[p.name] = p.read_bytes()
    return files


def test_criterion_9_determinism(tmp_path):
    cfg = tmp_path / "det.ini"
    cfg.write_text(BM_TEXT + "[numerics]\ndt = 0.05\n[mc]\nn = 600\npaths = 300\nfields = 300\nmaster_seed = 3\n"
                   "[output]\nformats = csv, json\n")
    commands = [["simulate", "z"], ["simulate", "y"], ["simulate", "eta-psi1"], ["simulate", "eta-psi2"],
                ["estimate-c0"], ["verify", "corollary_identity"], ["export"]]
    snapshots = {}
    for run, workers in (("w1a", 1), ("w1b", 1), ("w4", 4)):
        out = tmp_path / run
        stdout = []
        for cmd in commands:
            code, text, _ = run_cli(cmd + ["--config", str(cfg), "--out", str(out), "--workers", str(workers)])
            assert code in (0, 1), (cmd, code)
            stdout.append(text)
        snapshots[run] = (_snapshot(out), stdout)
    same = snapshots["w1a"] == snapshots["w1b"] == snapshots["w4"]
    n_files = len(snapshots["w1a"][0])
    announce(9, same, f"{len(commands)} commands, {n_files} files + stdout identical for workers 1, 1, 4 "
                      "(manifest timing and run-location fields excluded)")
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
