"""
Streaming FIR/IIR against direct convolution and recursion
"""

from fractions import Fraction

import numpy as np
import pytest

from FPDA.errors import HorizonTooSmall, SampleFileError
from FPDA.filter_bank import (
    FEEDBACK_FORMAT,
    FirSpec,
    FirState,
    IirSpec,
    expand_feedback,
    feedback_expansion,
    fir_filter,
    iir_filter,
    read_coefficients,
)
from FPDA.numerics import Q1_7, Q1_15, FixedPoint, Tally, from_raws
from FPDA.oracle import conv_direct, iir_direct, lsb_errors


def impulse(length: int):
    """-1.0 followed by zeros; +1.0 is not representable in Q1.7"""
    return from_raws([-128] + [0] * (length - 1), Q1_7)


def test_impulse_response_is_the_taps(rng):
    spec = FirSpec(from_raws(rng.integers(-32768, 32768, 16), Q1_15))
    y = fir_filter(spec, impulse(24))
    assert [s.raw for s in y[:16]] == [-t.raw if t.raw != -32768 else 32767 for t in spec.taps]
    assert all(s.raw == 0 for s in y[16:])
    assert all(s.format == Q1_15 for s in y)


def test_fir_matches_convolution(rng):
    spec = FirSpec.from_floats(rng.uniform(-0.06, 0.06, 16))
    x = from_raws(rng.integers(-128, 128, 200), Q1_7)
    y = fir_filter(spec, x)
    ref = conv_direct([t.value for t in spec.taps], [s.value for s in x])[: len(x)]
    assert lsb_errors(y, ref).max() <= 1


def test_fir_saturation_is_counted():
    spec = FirSpec.from_floats([0.9] * 4)
    tally = Tally()
    y = fir_filter(spec, from_raws([-128] * 8, Q1_7), tally)
    assert y[-1].raw == Q1_15.min_raw
    assert tally.saturations == 7


@pytest.mark.parametrize("length", [0, 17])
def test_fir_tap_count(length):
    with pytest.raises(ValueError):
        FirSpec.from_floats([0.1] * length)


def test_short_filter():
    spec = FirSpec.from_floats([0.5])
    y = fir_filter(spec, from_raws([64, -64, 0], Q1_7))
    assert [s.value for s in y] == [0.25, -0.25, 0.0]


def test_delay_line_order():
    state = FirState.zeros(3).push(FixedPoint(1, Q1_7)).push(FixedPoint(2, Q1_7))
    assert [s.raw for s in state.delay_line] == [2, 1, 0]


def test_iir_without_feedback_is_fir(rng):
    a = rng.uniform(-0.06, 0.06, 16)
    x = from_raws(rng.integers(-128, 128, 64), Q1_7)
    fir = fir_filter(FirSpec.from_floats(a), x)
    iir = iir_filter(IirSpec.from_floats(a, [0.0] * 15), x)
    assert fir == iir


def test_iir_matches_recursion(rng):
    a = rng.uniform(-0.03, 0.03, 16)
    b = rng.uniform(-1, 1, 15)
    b *= 0.5 / np.abs(b).sum()
    spec = IirSpec.from_floats(a, b)
    x = from_raws(rng.integers(-128, 128, 128), Q1_7)
    y = iir_filter(spec, x)
    a_q = [t.value for t in spec.forward.taps]
    b_q = [t.value for t in spec.feedback]
    ref = iir_direct(a_q, b_q, [s.value for s in x], FEEDBACK_FORMAT)
    assert lsb_errors(y, ref).max() <= 4


def test_iir_decays():
    """one pole at 0.5, driven by an impulse"""
    spec = IirSpec.from_floats([0.5, 0.0], [0.5])
    y = iir_filter(spec, impulse(12))
    assert y[0].value == -0.5
    assert y[1].value == -0.25
    assert abs(y[-1].value) < 0.01


def test_iir_shape_and_stability():
    with pytest.raises(ValueError):
        IirSpec.from_floats([0.1] * 4, [0.1] * 2)
    with pytest.warns(UserWarning):
        IirSpec.from_floats([0.1, 0.1, 0.1], [0.6, 0.5])


def test_feedback_expansion_exact():
    h = feedback_expansion([Fraction(1, 2), Fraction(0)], [Fraction(1, 2)], 4)
    assert h == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)]


def test_expand_feedback():
    spec = IirSpec.from_floats([0.5, 0.0], [0.5])
    fir = expand_feedback(spec, 6)
    assert [t.value for t in fir.taps] == [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]
    with pytest.raises(HorizonTooSmall):
        expand_feedback(spec, 1)
    with pytest.raises(ValueError):
        expand_feedback(spec, 17)


def test_read_coefficients(tmp_path):
    path = tmp_path / "taps.txt"
    path.write_text("# two taps\n0.5\n\n-0.25  # second\n")
    assert [t.raw for t in read_coefficients(path)] == [16384, -8192]


@pytest.mark.parametrize("text", ["0.5\nabc\n", "1.5\n", "# nothing\n"])
def test_read_coefficients_errors(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(SampleFileError):
        read_coefficients(path)


def test_read_missing_file(tmp_path):
    with pytest.raises(SampleFileError):
        read_coefficients(tmp_path / "nope.txt")
