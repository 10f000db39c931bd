"""
RunDescriptor yaml files
"""

import warnings

import pytest

from FPDA.descriptor import RunDescriptor
from FPDA.fabric import ConfigMode


def write(tmp_path, body: str):
    path = tmp_path / "run.yaml"
    path.write_text("RunDescriptor:\n" + body)
    return path


def test_fir_descriptor(test_files):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rd = RunDescriptor(test_files / "fir_average.yaml")
    assert rd.mode is ConfigMode.FIR
    assert rd.input == test_files / "impulse.txt"
    assert rd.coeffs == test_files / "average16.txt"
    assert rd.verify is True
    assert rd.sample_format == "real"
    assert rd.branch == "lowpass"
    assert rd.output is None


def test_iir_descriptor(test_files):
    rd = RunDescriptor(test_files / "iir_pole.yaml")
    assert rd.mode is ConfigMode.IIR
    assert rd.feedback == test_files / "feedback_pole.txt"
    assert rd.output == test_files / "iir_out.txt"
    assert rd.as_dict()["mode"] == "IIR"
    assert rd.as_dict()["feedback"] == str(test_files / "feedback_pole.txt")


def test_missing_required(test_files):
    with pytest.raises(KeyError, match="input"):
        RunDescriptor(test_files / "missing_input.yaml")


def test_wrong_section(test_files):
    with pytest.raises(KeyError, match="RunDescriptor"):
        RunDescriptor(test_files / "wrong_section.yaml")


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        RunDescriptor(tmp_path / "nope.yaml")


def test_default_taps_warn(tmp_path):
    with pytest.warns(UserWarning, match="coeffs"):
        RunDescriptor(write(tmp_path, "  mode: FIR\n  input: x.txt\n"))
    with pytest.warns(UserWarning, match="feedback"):
        RunDescriptor(write(tmp_path, "  mode: IIR\n  input: x.txt\n  coeffs: c.txt\n"))


def test_fft_defaults_to_complex(tmp_path):
    rd = RunDescriptor(write(tmp_path, "  mode: FFT\n  input: x.txt\n  scale_stages: true\n"))
    assert rd.sample_format == "complex"
    assert rd.scale_stages is True


def test_absolute_paths_kept(tmp_path):
    target = tmp_path / "elsewhere" / "x.txt"
    rd = RunDescriptor(write(tmp_path, f"  mode: DCT\n  input: {target}\n"))
    assert rd.input == target


@pytest.mark.parametrize(
    "extra, message",
    [("  branch: bandpass\n", "branch"), ("  sample_format: octal\n", "sample_format"), ("", "unknown mode")],
)
def test_bad_values(tmp_path, extra, message):
    mode = "DWT" if extra else "XYZ"
    with pytest.raises(ValueError, match=message):
        RunDescriptor(write(tmp_path, f"  mode: {mode}\n  input: x.txt\n" + extra))
