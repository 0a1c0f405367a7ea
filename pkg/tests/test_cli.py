"""Command-line interface: exit codes, output, artifact wiring."""

import json
import shutil
import subprocess

import pytest

from qkaczmarz.cli import main
from qkaczmarz.experiments import ExperimentSpec, spec_to_json
from qkaczmarz.solvers import read_trace_csv


def test_threshold_pinned_values(capsys):
    assert main(["threshold", "--beta", "0.05", "--T", "20000"]) == 0
    out = capsys.readouterr().out
    assert "guarantee needs subsample size >= 159" in out
    assert "failure regime applies up to size <= 1" in out
    assert "6.250e-04" in out
    assert "gap" in out


def test_threshold_requires_beta_and_T(capsys):
    assert main(["threshold", "--T", "100"]) == 1
    assert main(["threshold", "--beta", "0.1"]) == 1
    assert "error" in capsys.readouterr().err


def test_threshold_rejects_bad_domain(capsys):
    # T=1 has log T = 0; the guarantee threshold needs T > 1.
    assert main(["threshold", "--beta", "0.1", "--T", "1"]) == 1
    assert "qkaczmarz:" in capsys.readouterr().err


def test_unknown_and_missing_subcommand(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1


def test_solve_writes_trace(tmp_path, capsys):
    trace_path = tmp_path / "t.csv"
    code = main([
        "solve", "--m", "120", "--n", "5", "--beta", "0.05",
        "--D", "4", "--T", "60", "--seed", "3", "--trace", str(trace_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "final error:" in out
    assert "jump events:" in out
    records = read_trace_csv(trace_path)
    assert len(records) == 60


def test_solve_full_sample(capsys):
    code = main([
        "solve", "--m", "100", "--n", "4", "--beta", "0.02",
        "--D", "full", "--T", "40",
    ])
    assert code == 0
    assert "D=full" in capsys.readouterr().out


def test_solve_invalid_parameters(capsys):
    assert main(["solve", "--m", "100", "--n", "4", "--beta", "1.5",
                 "--T", "10"]) == 1
    assert "qkaczmarz:" in capsys.readouterr().err


def test_solve_unwritable_trace_is_io_error(tmp_path, capsys):
    missing = tmp_path / "no" / "such" / "dir" / "t.csv"
    code = main([
        "solve", "--m", "100", "--n", "4", "--T", "10",
        "--trace", str(missing),
    ])
    assert code == 3
    assert "i/o error" in capsys.readouterr().err


def test_experiment_from_spec_file(tmp_path, capsys):
    spec = ExperimentSpec(
        name="clidemo", m=100, n=4, q=0.5, beta_grid=(0.05,), D_grid=(3,),
        T=10, trials=1, sampling_modes=("with_replacement",), base_seed=1,
    )
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(spec_to_json(spec))
    code = main([
        "experiment", "--spec", str(spec_path), "--output", str(tmp_path / "out"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "artifacts under" in out
    root = tmp_path / "out" / "clidemo"
    for name in ("curves.csv", "curves.svg", "curves_time.svg", "manifest.json"):
        assert (root / name).is_file()


def test_experiment_rejects_bad_inputs(tmp_path, capsys):
    assert main(["experiment", "--preset", "fig99"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["experiment", "--spec", str(bad)]) == 1
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"name": "x"}))
    assert main(["experiment", "--spec", str(good)]) == 1
    # --preset and --spec are mutually exclusive.
    assert main(["experiment", "--preset", "small-fig1",
                 "--spec", str(good)]) == 1


def test_lower_bound_demo_output(capsys):
    code = main([
        "lower-bound", "--m", "100", "--n", "10", "--beta", "0.1",
        "--D", "1", "--T", "50", "--magnitude", "100", "--trials", "2",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "failure floor (squared error)" in out
    assert "trial 0:" in out and "trial 1:" in out


def test_verify_subcommand(tmp_path, capsys):
    code = main(["verify", "--output", str(tmp_path / "v"), "--seed", "0"])
    out = capsys.readouterr().out
    assert code == 0
    assert "chernoff_dominance" in out
    assert "FAIL" not in out
    assert (tmp_path / "v" / "verification.csv").is_file()


def test_console_script_installed():
    exe = shutil.which("qkaczmarz")
    assert exe is not None, "console script should be installed with the package"
    proc = subprocess.run(
        [exe, "threshold", "--beta", "0.01", "--T", "20000"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert "guarantee needs subsample size >= 104" in proc.stdout
