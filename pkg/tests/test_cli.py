"""Command-line behavior: formats, determinism, exit codes, golden data."""

import csv
import io
import json
import math
import pathlib
import subprocess

import pytest

from catrep.cli import DEFAULT_CONFIG, load_config, main
from catrep.usd import linear_optics_closed_form

DATA_DIR = pathlib.Path(__file__).parent / "data"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_keyrate_repeaterless_row(capsys):
    code, out, _ = run_cli(
        capsys, "keyrate", "--alpha", "2", "--m", "1", "--l0", "1000"
    )
    assert code == 0
    (row,) = read_rows(out)
    assert float(row["f_tot"]) == float(row["f0"])
    assert row["beats_plob"] == "false"


def test_keyrate_requires_single_values(capsys):
    code, _, err = run_cli(capsys, "keyrate", "--alpha", "2")
    assert code == 1
    assert "exactly one value" in err


def test_sweep_golden_snapshot(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run_cli(capsys, "sweep", "--out", str(out))
    assert code == 0
    assert out.read_bytes() == (DATA_DIR / "sweep_golden.csv").read_bytes()


def test_golden_columns_in_range():
    with open(DATA_DIR / "sweep_golden.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows
    for row in rows:
        for col in ("f0", "p0", "f_tot", "p_tot"):
            assert 0.0 <= float(row[col]) <= 1.0
        for col in ("rate_per_second", "rate_per_use", "plob"):
            assert float(row[col]) >= 0.0
        assert row["beats_plob"] in ("true", "false")


def test_sweep_deterministic_and_sidecar(tmp_path, capsys):
    args = ("sweep", "--m", "1", "--alpha", "1,2", "--l0", "100,1000")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(capsys, *args, "--out", str(a))[0] == 0
    assert run_cli(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert set(meta) == {"generated_at", "argv", "version"}
    # No timestamp leaks into the data file.
    assert meta["generated_at"] not in a.read_text()


def test_sweep_threads_keep_order(tmp_path, capsys):
    args = ("sweep", "--m", "1,2", "--alpha", "2,1", "--l0", "1000,100")
    one, four = tmp_path / "one.csv", tmp_path / "four.csv"
    assert run_cli(capsys, *args, "--threads", "1", "--out", str(one))[0] == 0
    assert run_cli(capsys, *args, "--threads", "4", "--out", str(four))[0] == 0
    assert one.read_bytes() == four.read_bytes()
    rows = read_rows(one.read_text())
    keys = [
        (int(r["m"]), float(r["alpha"]), float(r["l0"])) for r in rows
    ]
    assert keys == sorted(keys)


def test_sweep_rejects_nondividing_l0(capsys):
    code, _, err = run_cli(capsys, "sweep", "--m", "1", "--alpha", "1", "--l0", "3")
    assert code == 1
    assert "3" in err and "1000" in err


def test_sweep_empty_grid(capsys):
    code, _, err = run_cli(capsys, "sweep", "--alpha", "", "--m", "1")
    assert code == 1
    assert "empty grid" in err


def test_jsonl_format(capsys):
    code, out, _ = run_cli(
        capsys,
        "sweep", "--m", "1", "--alpha", "1", "--l0", "1000",
        "--format", "jsonl",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1
    row = json.loads(lines[0])
    assert row["m"] == 1 and row["alpha"] == 1.0
    assert isinstance(row["beats_plob"], bool)


def test_validate_small_grid(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("validate:\n  m: [1]\n  alpha: [1.0]\n  eta: [0.9]\n")
    code, out, _ = run_cli(capsys, "validate", "--config", str(cfg))
    assert code == 0
    rows = read_rows(out)
    assert sorted(r["check"] for r in rows) == [
        "bell_order", "f0", "loss_weights", "syndrome",
    ]
    assert all(r["status"] == "pass" for r in rows)
    code, out, err = run_cli(
        capsys, "validate", "--config", str(cfg), "--tol", "f0=1e-30"
    )
    assert code == 2
    assert "f0" in err


def test_validate_empty_grid(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("validate:\n  m: []\n  alpha: [1.0]\n  eta: [0.9]\n")
    code, _, err = run_cli(capsys, "validate", "--config", str(cfg))
    assert code == 1
    assert "empty validation grid" in err


def test_validate_unknown_check(capsys):
    code, _, err = run_cli(capsys, "validate", "--tol", "nosuch=1")
    assert code == 1
    assert "nosuch" in err


def test_cavity_resonance(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "cavity:\n  delta_min: -1.0\n  delta_max: 1.0\n  points: 21\n"
    )
    code, out, _ = run_cli(capsys, "cavity", "--config", str(cfg))
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 21
    center = [r for r in rows if float(r["delta"]) == 0.0]
    assert len(center) == 1
    assert float(center[0]["phase_ideal"]) == pytest.approx(math.pi)
    assert all(float(r["modulus_full"]) <= 1 + 1e-12 for r in rows)


def test_usd_subcommand(capsys):
    code, out, _ = run_cli(capsys, "usd", "--alpha", "0.5,1.0")
    assert code == 0
    rows = read_rows(out)
    assert [float(r["alpha"]) for r in rows] == [0.5, 1.0]
    for row in rows:
        assert float(row["p_linear_optics"]) == pytest.approx(
            linear_optics_closed_form(float(row["alpha"])), abs=1e-9
        )
        assert float(row["p_optimal"]) >= float(row["p_linear_optics"])


def test_config_overlay_and_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("chain:\n  l_tot: 500.0\n  l0: [500.0]\n")
    merged = load_config(str(cfg))
    assert merged["chain"]["l_tot"] == 500.0
    assert merged["code"]["m"] == DEFAULT_CONFIG["code"]["m"]
    code, out, _ = run_cli(
        capsys, "sweep", "--config", str(cfg), "--m", "1", "--alpha", "2"
    )
    assert code == 0
    assert len(read_rows(out)) == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("chian:\n  l_tot: 500.0\n")
    code, _, err = run_cli(capsys, "sweep", "--config", str(bad))
    assert code == 1
    assert "chian" in err


def test_usage_errors_exit_one(capsys):
    assert run_cli(capsys, "frobnicate")[0] == 1
    assert run_cli(capsys, "sweep", "--no-such-flag")[0] == 1


def test_console_script_help():
    proc = subprocess.run(
        ["catrep", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "sweep" in proc.stdout and "validate" in proc.stdout
