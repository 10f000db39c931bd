"""
Nibble-table distributed arithmetic against plain multiply-accumulate
"""

import itertools

import pytest

from FPDA.da_engine import (
    DaCensus,
    DaLut,
    LutRole,
    adder_tree,
    build_unit,
    build_units,
    da_dot,
    eval_unit,
    eval_word,
    signed4,
    tree_depth,
)
from FPDA.errors import LengthMismatch
from FPDA.numerics import Q1_7, Q1_15, FixedPoint, Tally, WideAccumulator, from_raws
from FPDA.oracle import full_lut_dot, mac_direct


def test_signed4():
    assert [signed4(a) for a in (0, 7, 8, 15)] == [0, 7, -8, -1]


def test_table_contents():
    c = FixedPoint(-1234, Q1_15)
    low = DaLut.build(c, LutRole.LOW_NIBBLE)
    high = DaLut.build(c, LutRole.HIGH_NIBBLE)
    assert low[15] == -1234 * 15
    assert high[8] == -1234 * -8
    assert high[15] == 1234
    assert low[0] == high[0] == 0


def test_table_needs_sixteen_entries():
    with pytest.raises(ValueError):
        DaLut((0,) * 8, LutRole.LOW_NIBBLE, FixedPoint(1, Q1_15))


@pytest.mark.parametrize("coefficient", [-32768, -12345, -1, 0, 1, 9999, 32767])
def test_every_sample_is_exact(coefficient):
    """all 256 Q1.7 samples against the integer product"""
    unit = build_unit(FixedPoint(coefficient, Q1_15))
    for x in range(-128, 128):
        acc = eval_unit(unit, FixedPoint(x, Q1_7))
        assert acc.raw == coefficient * x
        assert acc.fraction_bits == 22


def test_eval_unit_wants_q1_7():
    unit = build_unit(FixedPoint(100, Q1_15))
    with pytest.raises(ValueError):
        eval_unit(unit, FixedPoint(100, Q1_15))
    with pytest.raises(ValueError):
        build_unit(FixedPoint(100, Q1_7))


@pytest.mark.parametrize("raw", [-(1 << 17), -77777, -1, 0, 5, 123456, (1 << 17) - 1])
def test_eval_word_wide(raw):
    unit = build_unit(FixedPoint(-20000, Q1_15))
    assert eval_word(unit, raw, 18) == -20000 * raw


def test_eval_word_range():
    unit = build_unit(FixedPoint(1, Q1_15))
    with pytest.raises(OverflowError):
        eval_word(unit, 1 << 19, 18)


def test_four_taps_exhaustive():
    """every 4-bit sample combination through nibble tables, the full 16-entry table and a MAC"""
    coefficients = [23170, -32768, 32767, -4096]
    units = build_units(from_raws(coefficients, Q1_15))
    for samples in itertools.product(range(-8, 8), repeat=4):
        expected = mac_direct(coefficients, samples)
        assert full_lut_dot(coefficients, samples, 4) == expected
        assert da_dot(units, from_raws(samples, Q1_7)).raw == expected


def test_full_lut_dot_limits():
    with pytest.raises(ValueError):
        full_lut_dot([1] * 5, [1] * 5, 4)


def test_sixteen_taps(rng):
    coefficients = rng.integers(-32768, 32768, 16)
    samples = rng.integers(-128, 128, 16)
    tally = Tally()
    acc = da_dot(build_units(from_raws(coefficients, Q1_15)), from_raws(samples, Q1_7), tally)
    assert acc.raw == mac_direct(coefficients, samples)
    # 16 combine adders and 15 tree adders
    assert tally["adder"] == 31


def test_length_mismatch():
    units = build_units(from_raws([1, 2], Q1_15))
    with pytest.raises(LengthMismatch):
        da_dot(units, from_raws([1], Q1_7))
    with pytest.raises(LengthMismatch):
        da_dot([], [])


def test_adder_tree():
    leaves = [WideAccumulator(i, 0) for i in range(1, 6)]
    tally = Tally()
    assert adder_tree(leaves, tally).raw == 15
    assert tally["adder"] == 4
    assert [tree_depth(n) for n in (1, 2, 5, 8, 16)] == [0, 1, 3, 3, 4]
    with pytest.raises(ValueError):
        adder_tree([])


def test_census():
    census = DaCensus(16)
    assert (census.luts, census.adders) == (32, 31)
    assert DaCensus(15).luts == 30


def test_random_sixteen_tap_sweep(rng):
    """100 000 random dot products, a fresh coefficient set every 1000"""
    for _ in range(100):
        coefficients = [int(c) for c in rng.integers(-32768, 32768, 16)]
        units = build_units(from_raws(coefficients, Q1_15))
        for samples in rng.integers(-128, 128, (1000, 16)):
            raws = [int(x) for x in samples]
            assert da_dot(units, from_raws(raws, Q1_7)).raw == mac_direct(coefficients, raws)
