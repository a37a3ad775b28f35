import csv
import json
import subprocess
import sys

import pytest

from levy_mmm.cli import main

BM = "[model]\ndrift = -0.5\nsigma2 = 1\n"
SMALL = "[numerics]\ndt = 0.05\n[mc]\nn = 300\npaths = 3\nfields = 40\nmaster_seed = 5\n"


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text + f"[output]\ndirectory = {tmp_path / 'out'}\n")
    return str(p)


def test_constants_brownian(tmp_path, capsys):
    assert main(["constants", "--config", write(tmp_path, BM)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["nu"] == 1.0 and out["c0"] == 0.5 and out["method"] == "brownian"
    assert not (tmp_path / "out").exists()


def test_constants_spectrally_positive(tmp_path, capsys):
    text = "[model]\ndrift=-1\nsigma2=0.5\njumps.kind=one_sided_exp\njumps.sign=1\njumps.rate=0.5\njumps.decay=3\n"
    assert main(["constants", "--config", write(tmp_path, text)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == "spectrally_positive"
    assert out["c0"] == pytest.approx(-out["nu"] * out["mean"])


def test_constants_two_sided_note(tmp_path, capsys):
    text = "[model]\ndrift=-0.3\nsigma2=0.8\njumps.kind=double_exp\njumps.rate=0.7\njumps.up_prob=0.4\njumps.up_decay=4\njumps.down_decay=3\n"
    assert main(["constants", "--config", write(tmp_path, text)]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["c0"] is None
    assert "estimate-c0" in captured.err


@pytest.mark.parametrize("text", ["[model]\ndrift = x\nsigma2 = 1\n", "[model]\ndrift = 0.5\nsigma2 = 1\n", "garbage"])
def test_bad_config_exit_2(tmp_path, capsys, text):
    p = tmp_path / "bad.ini"
    p.write_text(text)
    assert main(["constants", "--config", str(p)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_usage_error_exit_2(capsys):
    assert main(["simulate", "w", "--config", "x"]) == 2


def test_simulate_y(tmp_path):
    assert main(["simulate", "y", "--config", write(tmp_path, BM + SMALL)]) == 0
    out = tmp_path / "out"
    for k in range(3):
        with open(out / f"y_{k}.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        origin = [r for r in rows if float(r["t"]) == 0.0]
        assert len(origin) == 1 and float(origin[0]["value"]) == 0.0
        assert max(float(r["value"]) for r in rows) == 0.0
    manifest = json.loads((out / "manifest_simulate_y.json").read_text())
    assert manifest["seed"] == 5 and "wall_time_s" in manifest and manifest["version"].startswith("v")


def test_simulate_fields_and_diagnostics(tmp_path):
    cfg = write(tmp_path, BM + SMALL)
    assert main(["simulate", "eta-psi2", "--config", cfg]) == 0
    diag = json.loads((tmp_path / "out" / "eta_psi2_diagnostics.json").read_text())
    assert all(f["n_particles"] >= 1 for f in diag["fields"])
    assert set(diag["fields"][0]) == {"n_particles", "truncation_gap", "pad", "delta"}
    assert (tmp_path / "out" / "eta_psi2_0.csv").read_bytes().startswith(b"t,eta\r\n")
    assert main(["simulate", "eta-psi1", "--config", cfg]) == 0
    diag = json.loads((tmp_path / "out" / "eta_psi1_diagnostics.json").read_text())
    assert all(0 < f["truncation_gap"] <= f["delta"] for f in diag["fields"])


def test_repeat_is_byte_identical(tmp_path):
    cfg = write(tmp_path, BM + SMALL)
    blobs = []
    for run in ("a", "b"):
        assert main(["simulate", "z", "--config", cfg, "--out", str(tmp_path / run)]) == 0
        blobs.append({p.name: p.read_bytes() for p in (tmp_path / run).glob("z_*.csv")})
    assert blobs[0] == blobs[1] and len(blobs[0]) == 3


def test_verify_ladder_exit_0(tmp_path, capsys):
    assert main(["verify", "ladder", "--config", write(tmp_path, BM)]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert reports and all(r["pass"] for r in reports)


def test_verify_failure_exit_1(tmp_path, monkeypatch, capsys):
    import levy_mmm.cli as cli
    from levy_mmm.stats import TestReport

    monkeypatch.setattr(cli, "run_suite", lambda *a: [TestReport("x", 1.0, False)])
    assert main(["verify", "ladder", "--config", write(tmp_path, BM)]) == 1


def test_verify_two_sided_ladder_exit_2(tmp_path, capsys):
    text = "[model]\ndrift=-0.4\nsigma2=0.6\njumps.kind=gaussian\njumps.rate=0.5\njumps.mean=-0.2\njumps.var=0.09\n"
    assert main(["verify", "ladder", "--config", write(tmp_path, text)]) == 2


def test_exhaustion_exit_3(tmp_path, capsys):
    text = BM + "[numerics]\nhorizon = 0.02\nmargin = 20\n[mc]\npaths = 1\n"
    assert main(["simulate", "y", "--config", write(tmp_path, text)]) == 3


def test_export_and_figures(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = write(tmp_path, BM + SMALL)
    assert main(["export", "--config", cfg, "--figures"]) == 0
    out = tmp_path / "out"
    for name in ("psi.csv", "ladder.csv", "gumbel.csv", "constants.json", "psi.png"):
        assert (out / name).exists()
    assert main(["simulate", "z", "--config", cfg, "--figures"]) == 0
    assert (out / "z.png").stat().st_size > 1000


def test_estimate_c0(tmp_path, capsys):
    assert main(["estimate-c0", "--config", write(tmp_path, BM + SMALL)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["c0_closed_form"] == 0.5 and body["n"] == 300
    assert abs(body["c0_inverse"] - 2.0) < 5 * body["c0_inverse_se"]


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "levy_mmm", "constants", "--config", write(tmp_path, BM)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["c0"] == 0.5
