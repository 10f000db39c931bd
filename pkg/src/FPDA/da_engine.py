"""
Distributed Arithmetic: multiplier-free coefficient x sample products.

Each coefficient owns two 16-entry tables. The low-nibble table holds ``c * a`` for the unsigned
nibble ``a``; the high-nibble table holds ``c * signed4(a)``. An 8-bit sample ``x`` is then
``low[x & 0xF] + 16 * high[(x >> 4) & 0xF]``, one shift (free wiring) and one adder.
Coefficient units are summed by a balanced binary adder tree.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .errors import LengthMismatch
from .numerics import Q1_7, Q1_15, FixedPoint, Tally, WideAccumulator, _count

_logger = logging.getLogger(__name__)

NIBBLE = 4
TABLE_SIZE = 1 << NIBBLE


class LutRole(Enum):
    LOW_NIBBLE = "low_nibble"
    HIGH_NIBBLE = "high_nibble"


def signed4(a: int) -> int:
    a &= 0xF
    return a - 16 if a & 0x8 else a


def _weight(role: LutRole, address: int) -> int:
    return address if role is LutRole.LOW_NIBBLE else signed4(address)


@dataclass(frozen=True)
class DaLut:
    """16 exact products ``coefficient.raw * weight(address)``"""

    entries: Tuple[int, ...]
    role: LutRole
    coefficient: FixedPoint

    def __post_init__(self):
        if len(self.entries) != TABLE_SIZE:
            raise ValueError(f"DaLut: expected {TABLE_SIZE} entries, got {len(self.entries)}")
        if self.entries[0] != 0:
            raise ValueError("DaLut: entry 0 must be 0")

    @classmethod
    def build(cls, coefficient: FixedPoint, role: LutRole) -> "DaLut":
        entries = tuple(coefficient.raw * _weight(role, a) for a in range(TABLE_SIZE))
        return cls(entries, role, coefficient)

    def __getitem__(self, address: int) -> int:
        return self.entries[address]


@dataclass(frozen=True)
class CoefficientUnit:
    low: DaLut
    high: DaLut

    def __post_init__(self):
        if self.low.coefficient != self.high.coefficient:
            raise ValueError("CoefficientUnit: tables were built for different coefficients")

    @property
    def coefficient(self) -> FixedPoint:
        return self.low.coefficient


@dataclass(frozen=True)
class DaCensus:
    """CM usage of a DA dot product of ``length`` coefficient units"""

    length: int
    luts: int = field(init=False)
    combine_adders: int = field(init=False)
    tree_adders: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "luts", 2 * self.length)
        object.__setattr__(self, "combine_adders", self.length)
        object.__setattr__(self, "tree_adders", max(self.length - 1, 0))

    @property
    def adders(self) -> int:
        return self.combine_adders + self.tree_adders


def build_unit(coefficient: FixedPoint) -> CoefficientUnit:
    """Populate the low- and high-nibble tables for one Q1.15 coefficient"""
    if coefficient.format != Q1_15:
        raise ValueError(f"build_unit: coefficient must be {Q1_15}, got {coefficient.format}")
    return CoefficientUnit(DaLut.build(coefficient, LutRole.LOW_NIBBLE), DaLut.build(coefficient, LutRole.HIGH_NIBBLE))


def eval_unit(unit: CoefficientUnit, sample: FixedPoint, tally: Optional[Tally] = None) -> WideAccumulator:
    """Exact ``coefficient * sample`` from two lookups, a 4-bit shift and one add"""
    if sample.format != Q1_7:
        raise ValueError(f"eval_unit: sample must be {Q1_7}, got {sample.format}")
    word = sample.raw & 0xFF
    _count(tally, "adder")
    raw = unit.low[word & 0xF] + (unit.high[word >> NIBBLE] << NIBBLE)
    return WideAccumulator(raw, Q1_15.fraction_bits + Q1_7.fraction_bits)


def nibble_count(word_bits: int) -> int:
    return max(1, -(-word_bits // NIBBLE))


def eval_word(unit: CoefficientUnit, raw: int, word_bits: int) -> int:
    """Exact ``coefficient.raw * raw`` for a two's-complement word of ``word_bits`` bits.

    The low table serves every nibble below the top one; the signed high table serves the top
    nibble. For ``word_bits == 8`` this is :func:`eval_unit`.
    """
    count = nibble_count(word_bits)
    width = count * NIBBLE
    if not -(1 << (width - 1)) <= raw < (1 << (width - 1)):
        raise OverflowError(f"eval_word: {raw} does not fit {width} bits")
    word = raw & ((1 << width) - 1)
    total = 0
    for i in range(count - 1):
        total += unit.low[(word >> (NIBBLE * i)) & 0xF] << (NIBBLE * i)
    top = NIBBLE * (count - 1)
    return total + (unit.high[(word >> top) & 0xF] << top)


def adder_tree(leaves: Sequence[WideAccumulator], tally: Optional[Tally] = None) -> WideAccumulator:
    """Balanced binary sum; odd splits put the extra leaf on the left"""
    if len(leaves) == 0:
        raise ValueError("adder_tree: no leaves")
    if len(leaves) == 1:
        return leaves[0]
    mid = (len(leaves) + 1) // 2
    _count(tally, "adder")
    return adder_tree(leaves[:mid], tally) + adder_tree(leaves[mid:], tally)


def tree_depth(length: int) -> int:
    depth = 0
    while length > 1:
        length = (length + 1) // 2
        depth += 1
    return depth


def da_dot(
    units: Sequence[CoefficientUnit], samples: Sequence[FixedPoint], tally: Optional[Tally] = None
) -> WideAccumulator:
    """Exact sum of ``coefficient_k * sample_k`` through coefficient units and an adder tree

    Args:
        units (list of CoefficientUnit): one per tap
        samples (list of FixedPoint): Q1.7 samples, same length as ``units``
        tally (Tally, optional): records one adder per unit combine and per tree node

    Returns:
        WideAccumulator: with 22 fraction bits

    Raises:
        LengthMismatch: if the lengths differ or are zero
    """
    if len(units) != len(samples) or len(units) == 0:
        raise LengthMismatch(f"da_dot: {len(units)} units for {len(samples)} samples")
    products = [eval_unit(u, x, tally) for u, x in zip(units, samples)]
    return adder_tree(products, tally)


def dot_census(length: int) -> DaCensus:
    return DaCensus(length)


def build_units(coefficients: Sequence[FixedPoint]) -> List[CoefficientUnit]:
    return [build_unit(c) for c in coefficients]
