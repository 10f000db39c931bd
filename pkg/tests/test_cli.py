"""
Exercise the fpda command line through FPDA.cli.main, which returns the exit code
"""

import logging

import numpy as np
import pytest
import yaml

from FPDA import cli
from FPDA.oracle import ToleranceSpec


@pytest.fixture(autouse=True)
def detach_handlers():
    yield
    logger = logging.getLogger("FPDA")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.setLevel(logging.NOTSET)


def run_machine(capsys, *argv):
    code = cli.main(["--format", "machine", *argv])
    return code, yaml.safe_load(capsys.readouterr().out)


def test_modes(capsys):
    assert cli.main(["modes"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "FIR  10000" in out
    assert "DWT  00001" in out


def test_modes_machine(capsys):
    code, doc = run_machine(capsys, "modes")
    assert code == 0
    assert {"mode": "FFT", "control": "00010"} in doc["modes"]


def test_version(capsys):
    assert cli.main(["--version"]) == cli.EXIT_OK
    assert "FPDA" in capsys.readouterr().out


def test_fir_descriptor_run(capsys, test_files):
    code, doc = run_machine(capsys, "run", "--config", str(test_files / "fir_average.yaml"), "--no-timestamps")
    assert code == cli.EXIT_OK
    assert doc["mode"] == "FIR"
    assert (doc["samples_in"], doc["samples_out"]) == (32, 32)
    assert doc["verified"] is True
    assert doc["max_error_lsb"] == 0
    assert "elapsed_s" not in doc
    assert doc["resources"]["rows"]["lut"]["used"] == 32


def test_iir_run_writes_output(capsys, test_files, tmp_path):
    out = tmp_path / "y.txt"
    argv = [
        "run",
        "--mode",
        "IIR",
        "--in",
        str(test_files / "impulse.txt"),
        "--coeffs",
        str(test_files / "average16.txt"),
        "--feedback",
        str(test_files / "feedback_pole.txt"),
        "--out",
        str(out),
        "--verify",
    ]
    code, doc = run_machine(capsys, *argv)
    assert code == cli.EXIT_OK
    assert doc["verified"] is True
    lines = out.read_text().splitlines()
    assert len(lines) == 32
    assert float(lines[0]) == -0.0625


def test_flags_override_descriptor(capsys, test_files, tmp_path):
    code, doc = run_machine(
        capsys, "run", "--config", str(test_files / "fir_average.yaml"), "--in", str(test_files / "average16.txt")
    )
    assert code == cli.EXIT_OK
    assert doc["samples_in"] == 16


@pytest.mark.parametrize(
    "extra",
    [
        ["--mode", "FFT"],
        ["--mode", "FFT", "--scale-stages"],
        ["--mode", "DCT"],
        ["--mode", "DCT", "--sample-format", "block"],
        ["--mode", "DWT", "--branch", "highpass"],
        ["--mode", "IIR", "--seed", "7"],
    ],
)
def test_generated_streams_verify(capsys, extra):
    code, doc = run_machine(capsys, "run", "--verify", *extra)
    assert code == cli.EXIT_OK
    assert doc["verified"] is True
    assert doc["saturations"] == 0


def test_dwt_from_coefficient_files(capsys, test_files):
    argv = [
        "run",
        "--mode",
        "DWT",
        "--coeffs",
        str(test_files / "daubechies8_lowpass.txt"),
        "--highpass",
        str(test_files / "daubechies8_highpass.txt"),
        "--verify",
    ]
    code, doc = run_machine(capsys, *argv)
    assert code == cli.EXIT_OK
    assert doc["samples_out"] == doc["samples_in"] // 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--mode", "FIR", "--in", "does/not/exist.txt"],
        ["run", "--mode", "XYZ"],
        ["run"],
        ["run", "--config", "does/not/exist.yaml"],
        ["run", "--mode", "FIR", "--sample-format", "block"],
        ["run", "--mode", "DWT", "--coeffs", "lowpass.txt"],
        ["run", "--mode", "FIR", "--limit", "lut"],
        ["frobnicate"],
    ],
)
def test_bad_input_exit_code(argv, capsys):
    assert cli.main(argv) == cli.EXIT_BAD_INPUT


def test_missing_descriptor_field(test_files):
    assert cli.main(["run", "--config", str(test_files / "missing_input.yaml")]) == cli.EXIT_BAD_INPUT


def test_pool_exhausted_exit_code(capsys):
    assert cli.main(["run", "--mode", "FFT", "--limit", "multiplier=10"]) == cli.EXIT_POOL
    assert cli.main(["resources", "--mode", "IIR", "--limit", "adder=60"]) == cli.EXIT_POOL


def test_verification_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "reference_errors", lambda *args, **kwargs: (np.array([99]), ToleranceSpec(1), 0.0))
    code, doc = run_machine(capsys, "run", "--mode", "FIR", "--verify")
    assert code == cli.EXIT_VERIFY
    assert doc["verified"] is False
    assert doc["max_error_lsb"] == 99


def test_resources(capsys):
    assert cli.main(["resources", "--mode", "FFT"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "FFT: used / pool / expected" in out
    assert "multiplier" in out
    assert cli.main(["resources"]) == cli.EXIT_OK
    assert "max_mode" in capsys.readouterr().out


def test_resources_machine(capsys):
    code, doc = run_machine(capsys, "resources")
    assert code == cli.EXIT_OK
    assert [r["mode"] for r in doc["resources"]] == ["FIR", "IIR", "DCT", "FFT", "DWT"]


def test_verify_all(capsys):
    assert cli.main(["verify-all", "--trials", "1", "--seed", "5"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "FAIL" not in out


def test_report_and_log_file(tmp_path, capsys):
    report, log = tmp_path / "report.yaml", tmp_path / "run.log"
    argv = ["-v", "--log-file", str(log), "--format", "machine", "--report", str(report), "modes"]
    assert cli.main(argv) == cli.EXIT_OK
    assert capsys.readouterr().out == ""
    assert yaml.safe_load(report.read_text())["modes"][0] == {"mode": "FIR", "control": "10000"}
    assert cli.main(["-v", "--log-file", str(log), "run", "--mode", "FIR"]) == cli.EXIT_OK
    assert "cmd_run: FIR done" in log.read_text()
