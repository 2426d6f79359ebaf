import csv
import io
import json
import math
import shutil
import subprocess
import sys

import pytest

from hyperconv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_theta_value_and_bound(capsys):
    code, out, _ = run(capsys, "eval", "--family", "theta", "--n", "3", "--alpha", "1.5", "--w-norm", "1")
    assert code == 0
    assert "value" in out and "bound" in out


def test_eval_theta_json(capsys):
    code, out, _ = run(capsys, "eval", "--family", "theta", "--n", "3", "--alpha", "1.5", "--w-norm", "1",
                       "--format", "json")
    rec = json.loads(out)
    assert code == 0
    assert math.isfinite(rec["value"]) and math.isfinite(rec["bound"])
    assert rec["value"] <= rec["bound"] and rec["bound_holds"]
    assert rec["form"]["family"] == "ThetaAlpha"


def test_eval_lambda2_on_sphere(capsys):
    code, out, _ = run(capsys, "eval", "--family", "lambda-n", "--n", "2", "--w-norm", "1")
    assert code == 0
    assert "diverges (PositiveInfinity)" in out


def test_eval_lambda2_json_inf(capsys):
    code, out, _ = run(capsys, "eval", "--family", "lambda-n", "--n", "2", "--w-norm", "1", "--format", "json")
    assert code == 0 and json.loads(out)["value"] == "inf"


def test_eval_csv(capsys):
    code, out, _ = run(capsys, "eval", "--family", "delta-n", "--n", "3", "--w-norm", "0.5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and "value" in rows[0]


def test_eval_no_closed_form(capsys):
    code, out, _ = run(capsys, "eval", "--family", "delta-n", "--n", "4", "--w-norm", "0.5")
    assert code == 0 and "no closed form" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("eval", "--family", "nope", "--n", "2", "--w-norm", "1"),
        ("eval", "--family", "theta", "--n", "3", "--alpha", "1.5"),
        ("eval", "--family", "theta", "--n", "3", "--alpha", "1.5", "--w", "1,0"),
        ("eval", "--family", "theta", "--n", "3", "--alpha", "x", "--w-norm", "1"),
        ("eval", "--family", "kernel-h", "--n", "2", "--alpha", "0.75", "--w", "1,0"),
        ("oracle", "--family", "delta-n", "--n", "2", "--w-norm", "1", "--budget", "0"),
        ("oracle", "--family", "delta-n", "--n", "2", "--w-norm", "1", "--workers", "0"),
        ("sweep", "--family", "kernel-h", "--n", "2", "--alpha", "0.75", "--w", "1,0", "--v", "0,1"),
        ("verify", "--n", "7"),
        ("acceptance", "--only", "13"),
        ("frobnicate",),
        (),
    ],
)
def test_bad_arguments_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_oracle_json_and_seed_determinism(capsys):
    argv = ("oracle", "--family", "delta-n", "--n", "2", "--w-norm", "0.5", "--budget", "20000", "--seed", "9",
            "--workers", "2", "--format", "json")
    code, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert code == 0 and a == b
    rec = json.loads(a)
    assert rec["seed"] == 9 and rec["n_samples"] == 20000 and rec["stderr"] > 0


def test_oracle_text(capsys):
    code, out, _ = run(capsys, "oracle", "--family", "theta", "--n", "3", "--alpha", "1.5", "--w-norm", "2",
                       "--budget", "10000", "--proposal", "radial")
    assert code == 0 and "+-" in out


def test_seed_from_environment(capsys, monkeypatch):
    argv = ("oracle", "--family", "delta-n", "--n", "3", "--w-norm", "1", "--budget", "5000", "--format", "json")
    monkeypatch.setenv("HYPERCONV_SEED", "123")
    _, a, _ = run(capsys, *argv)
    assert json.loads(a)["seed"] == 123
    _, b, _ = run(capsys, *argv, "--seed", "123")
    assert a == b
    monkeypatch.setenv("HYPERCONV_SEED", "abc")
    code, _, err = run(capsys, *argv)
    assert code == 2 and "HYPERCONV_SEED" in err


def test_sweep_writes_report(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--family", "delta-n", "--n", "2", "--preset", "quick", "--budget", "5000",
                       "--out", str(tmp_path), "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert rec["passed"]
    for name in ("sweep.csv", "sweep.json", "manifest.json"):
        assert (tmp_path / name).exists()


def test_sweep_failure_exit_1(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--family", "lambda-n", "--n", "2", "--preset", "quick", "--budget", "5000",
                       "--out", str(tmp_path))
    assert code == 1
    assert "SupFinite: FAIL" in out


def test_sweep_csv_to_stdout(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--family", "delta-n", "--n", "3", "--preset", "invariance", "--budget",
                       "5000", "--out", str(tmp_path), "--format", "csv")
    assert out == (tmp_path / "sweep.csv").read_text()


@pytest.mark.parametrize("fmt", ["text", "json", "csv"])
def test_verify_n3(capsys, fmt):
    code, out, _ = run(capsys, "verify", "--n", "3", "--preset", "quick", "--budget", "20000", "--format", fmt)
    assert code == 0
    if fmt == "json":
        assert json.loads(out)["passed"]
    elif fmt == "text":
        assert "[pass]" in out and "FAIL" not in out


def test_acceptance_subset(capsys):
    code, out, _ = run(capsys, "acceptance", "--only", "1,6")
    assert code == 0
    assert "2/2 criteria passed" in out


def test_acceptance_json(capsys):
    code, out, _ = run(capsys, "acceptance", "--only", "1", "--format", "json")
    (rec,) = json.loads(out)
    assert code == 0 and rec["number"] == 1 and rec["passed"]


@pytest.mark.skipif(shutil.which("hyperconv") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["hyperconv", "eval", "--family", "lambda-n", "--n", "2", "--w-norm", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "diverges" in proc.stdout
    proc = subprocess.run(["hyperconv", "eval", "--family", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "hyperconv.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "hyperconv" in proc.stdout
