"""Tests for the coplab command line."""

import csv
import json
import logging
import math
from pathlib import Path

import pytest

from coplab.__main__ import EXIT_ERROR, EXIT_OK, build_parser, configure_logging, main


def test_parser_knows_every_subcommand():
    """Test that each documented subcommand parses."""
    parser = build_parser()
    for argv in (
        ["bounds", "--alpha", "0.5"],
        ["quasiexpl", "--threshold", "closed_form"],
        ["free-energy", "--n", "8"],
        ["certify-loc"],
        ["certify-deloc", "--knob", "0.9"],
        ["scan", "--lambda-grid", "0.5,1.0", "--seed", "1"],
        ["renewal-check"],
        ["experiment", "ldp", "--seed", "1"],
        ["experiment", "heavy-head", "--seed", "1"],
    ):
        assert parser.parse_args(argv).handler is not None


def test_bounds_slope_report(capsys):
    """Test the single-alpha bounds report on stdout."""
    assert main(["bounds", "--alpha", "2.0"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["slope_lower"] == pytest.approx(1.0 / math.sqrt(3.0))


def test_bounds_grid_to_csv(tmp_path: Path):
    """Test bound curves over a lambda grid written as CSV."""
    out = tmp_path / "bounds.csv"
    argv = ["bounds", "--lambda-grid", "0.5,1.0", "--n-max", "64", "--format", "csv"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    with out.open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 2
    assert float(rows[1]["h_upper"]) == pytest.approx(1.0)


def test_quasiexpl_value_to_json(tmp_path: Path):
    """Test a single A(alpha, kappa) evaluation."""
    out = tmp_path / "a.json"
    assert main(["quasiexpl", "--alpha", "0.5", "--kappa", "0.3", "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["kappa"] == 0.3
    assert data["A"] >= data["closed_form_lower"] - 1e-6


def test_library_errors_exit_with_code_two():
    """Test that domain errors are reported, not raised."""
    assert main(["quasiexpl", "--alpha", "1.5", "--kappa", "0.3"]) == EXIT_ERROR


def test_scan_requires_seed():
    """Test the usage error for a scan without --seed."""
    with pytest.raises(SystemExit) as excinfo:
        main(["scan", "--lambda-grid", "0.5"])
    assert excinfo.value.code == 2


def test_certify_deloc_requires_parameters():
    """Test the usage error when neither (gamma, k) nor a recipe knob is given."""
    with pytest.raises(SystemExit) as excinfo:
        main(["certify-deloc", "--law", "zipf", "--alpha", "2", "--n-max", "256"])
    assert excinfo.value.code == 2


def test_free_energy_to_json(tmp_path: Path):
    """Test a small free-energy estimate written to a file."""
    out = tmp_path / "f.json"
    argv = [
        "free-energy",
        "--law", "zipf",
        "--alpha", "2",
        "--n-max", "256",
        "--lambda", "1",
        "--h", "0.5",
        "--n", "16",
        "--samples", "20",
        "--seed", "1",
        "--out", str(out),
    ]  # fmt: skip
    assert main(argv) == EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["n"] == 16
    assert data["constrained"] is True
    assert data["n_samples"] == 20
    assert data["lower"] <= data["mean"] <= data["upper"]


def test_renewal_check(capsys):
    """Test the renewal report for the simple random walk."""
    argv = [
        "renewal-check",
        "--n-max", "1024",
        "--n", "100",
        "--samples", "20",
        "--seed", "0",
        "--q", "1,2",
    ]  # fmt: skip
    assert main(argv) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    expected = math.exp(math.lgamma(201) - 2.0 * math.lgamma(101) - 100 * math.log(4.0))
    assert data["u_n"] == pytest.approx(expected, rel=1e-9)
    assert data["mean_return_time_times_u_n"] is None
    assert [entry["q"] for entry in data["laplace"]] == [1.0, 2.0]


def test_heavy_head_requires_alpha():
    """Test the usage error for a heavy-head run without --alpha."""
    with pytest.raises(SystemExit) as excinfo:
        main(["experiment", "heavy-head", "--seed", "1"])
    assert excinfo.value.code == 2


def test_settings_file_is_read(tmp_path: Path):
    """Test that --config values reach the estimators."""
    config = tmp_path / "lab.conf"
    config.write_text("n_samples=12\nn_max=128\n", encoding="utf-8")
    out = tmp_path / "f.json"
    argv = ["free-energy", "--config", str(config), "--n", "8", "--seed", "2", "--out", str(out)]
    assert main(argv) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["n_samples"] == 12


def test_unwritable_log_file_falls_back_to_console(tmp_path: Path, capsys):
    """Test the console warning when the log file cannot be opened."""
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    configure_logging(log_file=str(blocker / "coplab.log"))

    assert len(logging.getLogger("coplab").handlers) == 1
    assert "Cannot open log file" in capsys.readouterr().err
