"""
Fixed-point formats, rounding and saturation
"""

from fractions import Fraction

import pytest

from FPDA.numerics import (
    Q1_7,
    Q1_15,
    ComplexFixed,
    FixedPoint,
    QFormat,
    Tally,
    WideAccumulator,
    fx_add,
    fx_mul,
    fx_sub,
    quantize,
    renormalize,
    requantize,
    round_half_away,
    round_shift,
    saturate,
)


def test_format_ranges():
    assert (Q1_7.min_raw, Q1_7.max_raw) == (-128, 127)
    assert (Q1_15.min_raw, Q1_15.max_raw) == (-32768, 32767)
    assert str(QFormat(7, 13)) == "Q7.13"
    assert QFormat(2, 14).lsb == 2**-14


@pytest.mark.parametrize("fields", [(0, 7), (1, -1), (1, 32)])
def test_bad_format(fields):
    with pytest.raises(ValueError):
        QFormat(*fields)


def test_fixed_point_range_checked():
    with pytest.raises(OverflowError):
        FixedPoint(128, Q1_7)
    assert FixedPoint(-128, Q1_7).value == -1.0
    assert FixedPoint(1, Q1_15).exact() == Fraction(1, 32768)


def test_quantize():
    assert quantize(0.5, Q1_7).raw == 64
    assert quantize(-1.0, Q1_7).raw == -128
    assert quantize(3 / 256, Q1_7).raw == 2  # 1.5 LSB rounds away from zero
    assert quantize(-3 / 256, Q1_7).raw == -2


def test_quantize_clamps_the_last_step():
    """just below +1.0 rounds to 128, which is clamped to 127"""
    assert quantize(0.999, Q1_7).raw == 127


def test_quantize_out_of_range():
    with pytest.raises(OverflowError):
        quantize(1.0, Q1_7)
    with pytest.raises(OverflowError):
        quantize(-2.5, QFormat(2, 13))


def test_rounding_half_away():
    assert round_half_away(2.5) == 3
    assert round_half_away(-2.5) == -3
    assert round_half_away(Fraction(-7, 3)) == -2
    assert round_shift(3, 1) == 2
    assert round_shift(-3, 1) == -2
    assert round_shift(-5, 2) == -1
    assert round_shift(5, -2) == 20


def test_saturate_counts():
    tally = Tally()
    assert saturate(200, Q1_7, tally) == 127
    assert saturate(-200, Q1_7, tally) == -128
    assert saturate(5, Q1_7, tally) == 5
    assert tally.saturations == 2


def test_renormalize():
    acc = WideAccumulator(3 << 20, 22)  # 0.75
    assert renormalize(acc, Q1_15).raw == 24576
    assert renormalize(acc, Q1_7).raw == 96


def test_renormalize_saturates():
    tally = Tally()
    y = renormalize(WideAccumulator(1 << 22, 22), Q1_15, tally)
    assert y.raw == Q1_15.max_raw
    assert tally["saturation"] == 1


def test_requantize_to_narrower_format():
    x = FixedPoint(24577, Q1_15)
    assert requantize(x, Q1_7).raw == 96


def test_accumulator_alignment():
    total = WideAccumulator(1, 1) + WideAccumulator(1, 2)
    assert total == WideAccumulator(3, 2)
    assert (WideAccumulator(1, 1) - WideAccumulator(1, 2)).value == 0.25
    with pytest.raises(ValueError):
        WideAccumulator(1, 4).align(2)


def test_accumulator_is_64_bit():
    with pytest.raises(OverflowError):
        WideAccumulator(1 << 63, 0)


def test_fx_arithmetic():
    a = FixedPoint(100, Q1_7)
    b = FixedPoint(20, Q1_7)
    assert fx_add(a, b).raw == 120
    assert fx_sub(b, a).raw == -80
    with pytest.raises(OverflowError):
        fx_add(a, a)
    with pytest.raises(ValueError):
        fx_add(a, FixedPoint(20, Q1_15))


def test_fx_mul_keeps_all_bits():
    tally = Tally()
    p = fx_mul(FixedPoint(64, Q1_7), FixedPoint(16384, Q1_15), tally)
    assert p.fraction_bits == 22
    assert p.value == 0.25
    assert tally["multiplier"] == 1


def test_complex_formats_must_agree():
    with pytest.raises(ValueError):
        ComplexFixed(FixedPoint(0, Q1_7), FixedPoint(0, Q1_15))
    z = ComplexFixed(FixedPoint(64, Q1_7), FixedPoint(-32, Q1_7))
    assert z.value == complex(0.5, -0.25)


def test_fx_mul_exact_over_every_q1_7_pair():
    samples = [FixedPoint(r, Q1_7) for r in range(Q1_7.min_raw, Q1_7.max_raw + 1)]
    for a in samples:
        for b in samples:
            p = fx_mul(a, b)
            assert p.fraction_bits == 14
            assert p.exact() == a.exact() * b.exact()


@pytest.mark.parametrize("format", [Q1_7, Q1_15])
def test_quantize_error_within_half_lsb(format, rng):
    top = format.max_raw / (1 << format.fraction_bits)
    half_lsb = Fraction(1, 1 << (format.fraction_bits + 1))
    for v in rng.uniform(-1.0, top, 10_000):
        assert abs(quantize(float(v), format).exact() - Fraction(float(v))) <= half_lsb


def test_renormalize_is_monotone(rng):
    wide = sorted(int(r) for r in rng.integers(-(1 << 24), 1 << 24, 5_000))
    out = [renormalize(WideAccumulator(r, 22), Q1_15).raw for r in wide]
    assert out == sorted(out)
    assert out[0] == Q1_15.min_raw and out[-1] == Q1_15.max_raw
    contiguous = [renormalize(WideAccumulator(r, 22), Q1_7).raw for r in range(-70_000, 70_001, 7)]
    assert contiguous == sorted(contiguous)
    assert len(set(contiguous)) > 2
