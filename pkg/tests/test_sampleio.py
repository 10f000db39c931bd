"""
Sample file reading and writing
"""

import logging

import pytest

from FPDA.errors import SampleFileError
from FPDA.fourier import FFT_INPUT, FFT_OUTPUT
from FPDA.numerics import Q1_7, Q1_15, ComplexFixed, FixedPoint
from FPDA.sampleio import format_real, read_block, read_complex, read_real, write_samples


def test_read_real(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("# header\n0.5\n\n-0.25 # note\n-1.0\n")
    assert [s.raw for s in read_real(path, Q1_7)] == [64, -32, -128]


def test_read_impulse(test_files):
    x = read_real(test_files / "impulse.txt", Q1_7)
    assert len(x) == 32
    assert x[0].raw == -128
    assert all(s.raw == 0 for s in x[1:])


def test_out_of_range_values_are_clipped(tmp_path, caplog):
    path = tmp_path / "loud.txt"
    path.write_text("1.0\n-3\n0.1\n")
    with caplog.at_level(logging.WARNING, logger="FPDA.sampleio"):
        x = read_real(path, Q1_7)
    assert [s.raw for s in x] == [127, -128, 13]
    assert "clipped 2 values" in caplog.text


@pytest.mark.parametrize("text", ["0.5\nhello\n", "nan\n", "", "# only a comment\n"])
def test_read_real_errors(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(SampleFileError):
        read_real(path, Q1_7)


def test_error_carries_the_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0.5\n0.25\nxyz\n")
    with pytest.raises(SampleFileError) as info:
        read_real(path, Q1_7)
    assert info.value.line == 3
    assert str(info.value).startswith(f"{path}:3")


def test_missing_file(tmp_path):
    with pytest.raises(SampleFileError, match="cannot read"):
        read_real(tmp_path / "nothing.txt", Q1_7)


def test_read_complex(tmp_path):
    path = tmp_path / "z.txt"
    path.write_text("0.5,-0.25\n0, 1\n")
    z = read_complex(path, FFT_INPUT)
    assert z[0].value == complex(0.5, -0.25)
    assert z[1].value == complex(0, 1)
    path.write_text("0.5\n")
    with pytest.raises(SampleFileError, match="re,im"):
        read_complex(path, FFT_INPUT)


def test_read_block(tmp_path):
    path = tmp_path / "block.txt"
    row = ",".join(["0.125"] * 16)
    path.write_text("\n".join([row] * 16) + "\n")
    block = read_block(path, Q1_15)
    assert len(block) == 16 and all(len(r) == 16 for r in block)
    path.write_text("\n".join([row] * 15) + "\n")
    with pytest.raises(SampleFileError, match="rows"):
        read_block(path, Q1_15)
    path.write_text("0.1,0.2\n")
    with pytest.raises(SampleFileError, match="16 values"):
        read_block(path, Q1_15)


def test_format_is_exact():
    assert format_real(FixedPoint(-1, Q1_15)) == "-0.000030517578125"
    assert format_real(FixedPoint(64, Q1_7)) == "0.5000000"


def test_write_and_read_back(tmp_path):
    path = tmp_path / "y.txt"
    samples = [FixedPoint(r, Q1_15) for r in (-32768, -1, 0, 12345, 32767)]
    write_samples(path, samples)
    assert read_real(path, Q1_15) == samples
    assert not list(tmp_path.glob(".y.txt.*"))


def test_write_complex_and_blocks(tmp_path):
    path = tmp_path / "z.txt"
    z = ComplexFixed(FixedPoint(8192, FFT_OUTPUT), FixedPoint(-4096, FFT_OUTPUT))
    write_samples(path, [z])
    assert path.read_text() == "1.0000000000000,-0.5000000000000\n"
    write_samples(path, [[FixedPoint(64, Q1_7), FixedPoint(-64, Q1_7)]])
    assert path.read_text() == "0.5000000,-0.5000000\n"
