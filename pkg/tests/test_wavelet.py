"""
Decimating filter bank and multi-level pyramid
"""

import pytest

from FPDA.errors import BadLength, OddLength, TooShort
from FPDA.filter_bank import fir_filter
from FPDA.numerics import Q1_7, Q1_15, from_raws, quantize
from FPDA.oracle import dwt_direct, lsb_errors
from FPDA.wavelet import DWT_OUTPUT, DilationPair, decimate, dwt_level, dwt_pyramid


def floats(taps):
    return [t.value for t in taps]


def test_daubechies_sums(daubechies):
    assert abs(sum(floats(daubechies.l0)) - 2**0.5) < 1e-3
    assert abs(sum(floats(daubechies.h0))) < 1e-3
    assert daubechies.lowpass.output_format == DWT_OUTPUT


def test_pair_checks():
    with pytest.raises(ValueError, match="taps"):
        DilationPair(tuple([quantize(0.1, Q1_15)] * 4), DilationPair.daubechies8().l0)
    with pytest.raises(ValueError, match="sqrt"):
        DilationPair(DilationPair.daubechies8().h0, tuple([quantize(0.1, Q1_15)] * 8))


def test_from_files(test_files, daubechies):
    pair = DilationPair.from_files(test_files / "daubechies8_highpass.txt", test_files / "daubechies8_lowpass.txt")
    assert pair == daubechies


def test_keeps_every_second_output(daubechies, rng):
    """the counter releases the filter output on the second input of each pair"""
    x = from_raws(rng.integers(-128, 128, 32), Q1_7)
    full = fir_filter(daubechies.lowpass, x)
    assert decimate(daubechies.lowpass, x) == full[1::2]


def test_impulse_releases_odd_taps(daubechies):
    """a full-scale impulse comes out as the taps at positions 1, 3, 5 and 7"""
    x = from_raws([-128] + [0] * 15, Q1_7)
    y = decimate(daubechies.lowpass, x)
    expected = [quantize(-daubechies.l0[k].exact(), DWT_OUTPUT) for k in (1, 3, 5, 7)]
    assert y[:4] == expected
    assert all(v.raw == 0 for v in y[4:])


def test_level_against_direct(daubechies, rng):
    x = from_raws(rng.integers(-128, 128, 64), Q1_7)
    low, high = dwt_level(daubechies, x)
    assert len(low) == len(high) == 32
    ref_low, ref_high = dwt_direct(floats(daubechies.h0), floats(daubechies.l0), floats(x), 1, DWT_OUTPUT)[0]
    assert lsb_errors(low, ref_low).max() <= 1
    assert lsb_errors(high, ref_high).max() <= 1


def test_level_keeps_energy(daubechies, rng):
    x = from_raws(rng.integers(-128, 128, 1024), Q1_7)
    low, high = dwt_level(daubechies, x)
    energy_in = sum(s.value**2 for s in x)
    energy_out = sum(s.value**2 for s in low) + sum(s.value**2 for s in high)
    assert abs(energy_out - energy_in) <= 0.02 * energy_in


def test_highpass_rejects_dc(daubechies):
    x = from_raws([64] * 32, Q1_7)
    _, high = dwt_level(daubechies, x)
    assert all(abs(y.raw) <= 4 for y in high[4:])


def test_level_input_checks(daubechies):
    with pytest.raises(OddLength):
        dwt_level(daubechies, from_raws([0] * 9, Q1_7))
    with pytest.raises(TooShort):
        dwt_level(daubechies, from_raws([0] * 6, Q1_7))


def test_pyramid(daubechies, rng):
    x = from_raws(rng.integers(-128, 128, 64), Q1_7)
    pyramid = dwt_pyramid(daubechies, x, 3)
    assert pyramid.depth == 3
    assert [len(pyramid.approximation(j)) for j in (1, 2, 3)] == [32, 16, 8]
    assert len(pyramid.detail(3)) == 8
    ref = dwt_direct(floats(daubechies.h0), floats(daubechies.l0), floats(x), 3, DWT_OUTPUT, Q1_7)
    for j, (low, high) in enumerate(ref, start=1):
        assert lsb_errors(pyramid.approximation(j), low).max() <= 8
        assert lsb_errors(pyramid.detail(j), high).max() <= 8


@pytest.mark.parametrize("length, levels", [(20, 2), (64, 0), (48, 5)])
def test_pyramid_lengths(daubechies, length, levels):
    with pytest.raises(BadLength):
        dwt_pyramid(daubechies, from_raws([0] * length, Q1_7), levels)
