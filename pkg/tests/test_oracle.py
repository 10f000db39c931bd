"""
Reference implementations and the error measures
"""

import math

import numpy as np
import pytest

from FPDA.numerics import Q1_7, Q1_15, QFormat, from_raws
from FPDA.oracle import (
    ToleranceSpec,
    check,
    conv_direct,
    dct2d_direct,
    dct_direct,
    dft_direct,
    dwt_direct,
    iir_direct,
    lsb_errors,
    quantize_saturating,
    relative_energy_error,
)


def test_convolution():
    np.testing.assert_allclose(conv_direct([1, 2], [1, 0, -1]), [1, 2, -1, -2])
    assert len(conv_direct([], [1, 2])) == 0
    np.testing.assert_allclose(conv_direct([0.5, 0.25], [1, 2, 3]), np.convolve([0.5, 0.25], [1, 2, 3]))


def test_iir_recursion():
    y = iir_direct([1.0], [], [1, 2, 3])
    np.testing.assert_allclose(y, [1, 2, 3])
    y = iir_direct([1.0, 0.0], [0.5], [1, 0, 0, 0])
    np.testing.assert_allclose(y, [1, 0.5, 0.25, 0.125])


def test_iir_feedback_quantization():
    """past outputs are rounded to Q1.7 before they re-enter"""
    y = iir_direct([0.5, 0.0], [0.5], [0.01, 0, 0], Q1_7)
    # 0.005 rounds to 1/128 in the feedback path
    assert y[1] == pytest.approx(0.5 / 128)


def test_dft():
    np.testing.assert_allclose(dft_direct([1, 0, 0, 0]), [1, 1, 1, 1], atol=1e-12)
    x = np.random.default_rng(1).normal(size=16) + 0j
    np.testing.assert_allclose(dft_direct(x), np.fft.fft(x), atol=1e-9)


def test_dct():
    y = dct_direct([1.0] * 16)
    assert y[0] == pytest.approx(2 / 16 * 16 / math.sqrt(2))
    np.testing.assert_allclose(y[1:], 0, atol=1e-12)


def test_dct2d_is_separable():
    block = np.random.default_rng(2).uniform(-1, 1, (16, 16))
    rows = np.array([dct_direct(r) for r in block])
    both = np.array([dct_direct(c) for c in rows.T]).T
    np.testing.assert_allclose(dct2d_direct(block), both, atol=1e-10)


def test_dwt_levels():
    h0, l0 = [0.5, -0.5], [0.5, 0.5]
    x = [1, 1, 2, 2, 3, 3, 4, 4]
    (low1, high1), (low2, high2) = dwt_direct(h0, l0, x, 2)
    np.testing.assert_allclose(low1, [1, 2, 3, 4])
    np.testing.assert_allclose(high1, [0, 0, 0, 0])
    np.testing.assert_allclose(low2, [1.5, 3.5])
    np.testing.assert_allclose(high2, [0.5, 0.5])


def test_quantize_saturating():
    raw = quantize_saturating([0.5, 3 / 256, -3 / 256, 2.0, -2.0], Q1_7)
    assert raw.tolist() == [64, 2, -2, 127, -128]


def test_lsb_errors():
    kernel = from_raws([10, -5, 0], Q1_15)
    reference = np.array([10, -7, 1]) / 32768
    assert lsb_errors(kernel, reference).tolist() == [0, 2, 1]
    with pytest.raises(ValueError):
        lsb_errors(kernel, reference[:2])
    assert len(lsb_errors([], [])) == 0


def test_lsb_errors_in_another_format():
    kernel = from_raws([3], QFormat(3, 13))
    assert lsb_errors(kernel, [3 / 8192], QFormat(3, 13)).tolist() == [0]


def test_energy():
    assert relative_energy_error([1, 1], [1, 1]) == 0
    assert relative_energy_error([2], [1]) == 3
    assert relative_energy_error([0], [0]) == 0
    assert math.isinf(relative_energy_error([1], [0]))


def test_check():
    ok, message = check(np.array([0, 3, 1]), ToleranceSpec(4), "FFT")
    assert ok and "3 LSB" in message
    ok, _ = check(np.array([5]), ToleranceSpec(4))
    assert not ok
    with pytest.raises(ValueError):
        ToleranceSpec(-1)


def test_dft_parseval():
    rng = np.random.default_rng(3)
    for x in rng.normal(size=(20, 16)) + 1j * rng.normal(size=(20, 16)):
        energy_in = np.sum(np.abs(x) ** 2)
        energy_out = np.sum(np.abs(dft_direct(x)) ** 2)
        assert abs(energy_out - 16 * energy_in) <= 1e-12 * 16 * energy_in
