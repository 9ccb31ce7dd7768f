import subprocess
import sys

import numpy as np
import pytest

from stochnls import slope_fit
from stochnls.cli import main
from stochnls.csvio import read_convergence_csv


def read_manifest(path):
    entries = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition(": ")
        entries[key] = value
    return entries


def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(
        ["simulate", "--out", str(out), "--set", "epsilon=0.1", "--set", "n_steps=16"]
    )
    assert rc == 0
    for name in ("trajectory_0.csv", "final_state_0.csv", "manifest.txt", "config.ini"):
        assert (out / name).exists()
    header = (out / "trajectory_0.csv").read_text().splitlines()[0]
    assert header == "n,t,charge,energy,charge_resid,energy_resid"
    manifest = read_manifest(out / "manifest.txt")
    assert manifest["command"] == "simulate"
    assert len(manifest["config_sha256"]) == 64
    assert "simulated 16 steps" in capsys.readouterr().out


def test_quiet_suppresses_progress(tmp_path, capsys):
    rc = main(["simulate", "--out", str(tmp_path / "q"), "--set", "n_steps=4", "--quiet"])
    assert rc == 0
    assert capsys.readouterr().out == ""


def test_bad_value_exits_2(tmp_path, capsys):
    rc = main(["simulate", "--out", str(tmp_path / "x"), "--set", "sigma=2.5"])
    assert rc == 2
    assert "sigma must lie in (0,2)" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path, capsys):
    rc = main(["simulate", "--out", str(tmp_path / "x"), "--set", "n_sells=9"])
    assert rc == 2
    assert "unknown key" in capsys.readouterr().err


def test_failed_run_exits_1(tmp_path, capsys):
    rc = main(
        [
            "simulate",
            "--out",
            str(tmp_path / "x"),
            "--set",
            "tau=0.5",
            "--set",
            "n_steps=2",
            "--set",
            "fp_max_iter=1",
            "--set",
            "fp_tol=1e-15",
        ]
    )
    assert rc == 1
    assert "run failed" in capsys.readouterr().err


def test_ensemble_outputs(tmp_path):
    out = tmp_path / "ens"
    rc = main(
        [
            "ensemble",
            "--out",
            str(out),
            "--trajectories",
            "3",
            "--seed",
            "99",
            "--set",
            "epsilon=0.2",
            "--set",
            "n_steps=8",
            "--quiet",
        ]
    )
    assert rc == 0
    assert (out / "ensemble_stats.csv").exists()
    assert all((out / f"trajectory_{i}.csv").exists() for i in range(3))
    manifest = read_manifest(out / "manifest.txt")
    assert manifest["master_seed"] == "99"
    assert len(manifest["trajectory_seeds"].split(", ")) == 3


def test_converge_manifest_slope_matches_csv(tmp_path, capsys):
    out = tmp_path / "conv"
    rc = main(
        [
            "converge",
            "--out",
            str(out),
            "--set",
            "epsilon=0",
            "--set",
            "n_cells=16",
            "--set",
            "n_steps=16",  # T = n_steps * tau from the base config
            "--set",
            "tau_exponents=-4, -5, -6",
            "--set",
            "tau_ref_exponent=-9",
        ]
    )
    assert rc == 0
    table = read_convergence_csv(out / "convergence.csv")
    slope, _ = slope_fit(table["log2_tau"], table["log2_err"])
    recorded = float(read_manifest(out / "manifest.txt")["fitted_slope"])
    assert recorded == pytest.approx(slope, abs=1e-12)
    assert "fitted slope" in capsys.readouterr().out


def test_invariants_pass_on_default_problem(tmp_path, capsys):
    rc = main(
        [
            "invariants",
            "--out",
            str(tmp_path / "inv"),
            "--set",
            "epsilon=0.4",
            "--set",
            "n_steps=12",
            "--set",
            "n_modes=8",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    assert out.count("[PASS]") >= 7


def test_noise_check_pass(tmp_path, capsys):
    rc = main(
        [
            "noise-check",
            "--out",
            str(tmp_path / "nc"),
            "--set",
            "epsilon=1.0",
            "--set",
            "n_modes=8",
            "--samples",
            "4000",
        ]
    )
    assert rc == 0
    assert "[PASS]" in capsys.readouterr().out


def test_noise_check_epsilon_zero_is_trivial(tmp_path, capsys):
    rc = main(["noise-check", "--out", str(tmp_path / "nc0"), "--samples", "10"])
    assert rc == 0
    assert "noise disabled" in capsys.readouterr().out


def test_reruns_are_byte_identical(tmp_path):
    argv = ["simulate", "--set", "epsilon=0.3", "--set", "n_steps=8", "--quiet"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    for name in ("trajectory_0.csv", "final_state_0.csv", "config.ini"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "stochnls.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "stochnls" in proc.stdout
