"""
16-point DCT by even/odd decomposition with DA row evaluation, and the 2-D DCT by rows then columns.

``Y[k] = (2/N) C_k sum_n y(n) cos((2n + 1) k pi / 2N)`` with ``C_0 = 1/sqrt(2)``. The input is folded
by a butterfly network::

    s_i  = x_i + x_{15-i}      d_i  = x_i - x_{15-i}        i = 0..7
    ss_i = s_i + s_{7-i}       sd_i = s_i - s_{7-i}         i = 0..3

then ``Y[0,4,8,12] = EE ss``, ``Y[2,6,10,14] = EO sd`` and the odd rows are
``OL d[0:4] + OR d[4:8]``. The matrices are derived here from the cosine sum, with ``C_0`` folded into
row 0 (so that row reads ``A A A A``). The ``2/N`` factor is a 3-bit shift applied when rounding.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .da_engine import CoefficientUnit, build_unit, eval_word
from .errors import LengthMismatch, ShapeMismatch, UnsupportedSize
from .numerics import Q1_15, Q2_13, FixedPoint, QFormat, Tally, WideAccumulator, _count, quantize, renormalize

_logger = logging.getLogger(__name__)

DCT_SIZE = 16
DCT_INPUT = Q2_13
DCT_OUTPUT = QFormat(3, 13)
DCT2D_OUTPUT = QFormat(4, 13)
#: 2/N for N = 16
NORM_SHIFT = 3

#: symbol -> angle numerator over 32, i.e. symbol = cos(m pi / 32)
CONSTANT_ANGLES: Dict[str, int] = {
    "A": 8,
    "B": 4,
    "C": 12,
    "D": 2,
    "E": 6,
    "F": 10,
    "G": 14,
    "H": 1,
    "I": 3,
    "J": 5,
    "K": 7,
    "L": 9,
    "M": 11,
    "N": 13,
    "O": 15,
}
_SYMBOL_OF_ANGLE = {m: s for s, m in CONSTANT_ANGLES.items()}

EVEN_EVEN_ROWS = (0, 4, 8, 12)
EVEN_ODD_ROWS = (2, 6, 10, 14)
ODD_ROWS = (1, 3, 5, 7, 9, 11, 13, 15)

# Published block matrices, kept for comparison with the derived ones
PRINTED_BLOCKS: Dict[str, Tuple[Tuple[str, ...], ...]] = {
    "even_even": (
        ("A", "A", "A", "A"),
        ("B", "C", "-C", "-B"),
        ("A", "-A", "-A", "A"),
        ("C", "-B", "B", "-C"),
    ),
    "even_odd": (
        ("D", "E", "F", "G"),
        ("E", "-G", "-D", "-F"),
        ("F", "-G", "D", "E"),
        ("G", "-F", "D", "-E"),
    ),
    "odd_left": (
        ("H", "I", "J", "K"),
        ("I", "L", "O", "-M"),
        ("J", "O", "-K", "-I"),
        ("K", "-M", "-I", "O"),
        ("L", "-J", "-N", "H"),
        ("M", "-H", "L", "N"),
        ("N", "-K", "H", "-J"),
        ("O", "-N", "M", "-L"),
    ),
    "odd_right": (
        ("L", "M", "N", "O"),
        ("-J", "-H", "-K", "-N"),
        ("-N", "L", "H", "M"),
        ("H", "N", "-J", "-L"),
        ("-O", "-I", "M", "K"),
        ("-I", "K", "O", "-J"),
        ("M", "O", "-L", "I"),
        ("K", "-J", "I", "-H"),
    ),
}


@dataclass(frozen=True)
class DctConstants:
    """A..O quantized to Q1.15"""

    values: Dict[str, FixedPoint] = field(default_factory=dict)

    @classmethod
    def build(cls) -> "DctConstants":
        return cls({s: quantize(math.cos(m * math.pi / 32), Q1_15) for s, m in CONSTANT_ANGLES.items()})

    def __getattr__(self, name: str) -> FixedPoint:
        values = self.__dict__.get("values", {})
        if name.upper() in values and len(name) == 1:
            return values[name.upper()]
        raise AttributeError(name)

    def signed(self, symbol: str) -> FixedPoint:
        """``"-C"`` -> the negated quantized C"""
        if symbol.startswith("-"):
            return FixedPoint(-self.values[symbol[1:]].raw, Q1_15)
        return self.values[symbol]


def cos_symbol(numerator: int) -> str:
    """Express ``cos(numerator * pi / 32)`` as a signed constant symbol"""
    a = numerator % 64
    if a > 32:
        a = 64 - a
    sign = ""
    if a > 16:
        sign = "-"
        a = 32 - a
    if a == 0:
        raise ValueError(f"cos_symbol: cos({numerator} pi/32) is +-1, not a DCT constant")
    return sign + _SYMBOL_OF_ANGLE[a]


def _symbol_value(symbol: str) -> float:
    sign = -1.0 if symbol.startswith("-") else 1.0
    return sign * math.cos(CONSTANT_ANGLES[symbol.lstrip("-")] * math.pi / 32)


@dataclass(frozen=True)
class DctDecomposition:
    """Derived symbolic blocks, their double-precision values, and the printed-block comparison"""

    even_even: Tuple[Tuple[str, ...], ...]
    even_odd: Tuple[Tuple[str, ...], ...]
    odd_left: Tuple[Tuple[str, ...], ...]
    odd_right: Tuple[Tuple[str, ...], ...]

    def block(self, name: str) -> Tuple[Tuple[str, ...], ...]:
        return getattr(self, name)

    def numeric(self, name: str) -> np.ndarray:
        return np.array([[_symbol_value(s) for s in row] for row in self.block(name)])

    def apply(self, x: Sequence[float]) -> np.ndarray:
        """Double-precision transform through the butterflies and blocks (normalization included)"""
        x = np.asarray(x, dtype=float)
        s, d = prestage(x)
        ss, sd = second_stage(s)
        y = np.zeros(DCT_SIZE)
        y[list(EVEN_EVEN_ROWS)] = self.numeric("even_even") @ ss
        y[list(EVEN_ODD_ROWS)] = self.numeric("even_odd") @ sd
        y[list(ODD_ROWS)] = self.numeric("odd_left") @ d[:4] + self.numeric("odd_right") @ d[4:]
        return y * (2.0 / DCT_SIZE)


@dataclass(frozen=True)
class BlockMismatch:
    block: str
    row: int
    column: int
    printed: str
    derived: str


def prestage(x):
    """First-level butterflies: sums and differences of mirrored samples"""
    n = len(x)
    s = [x[i] + x[n - 1 - i] for i in range(n // 2)]
    d = [x[i] - x[n - 1 - i] for i in range(n // 2)]
    if isinstance(x, np.ndarray):
        return np.array(s), np.array(d)
    return s, d


def second_stage(s):
    """Second-level butterflies on the even half"""
    n = len(s)
    ss = [s[i] + s[n - 1 - i] for i in range(n // 2)]
    sd = [s[i] - s[n - 1 - i] for i in range(n // 2)]
    if isinstance(s, np.ndarray):
        return np.array(ss), np.array(sd)
    return ss, sd


def derive_decomposition(n: int = DCT_SIZE) -> DctDecomposition:
    """Derive the four blocks from the cosine sum by even/odd index splitting

    Raises:
        UnsupportedSize: unless ``n == 16``
    """
    if n != DCT_SIZE:
        raise UnsupportedSize(f"derive_decomposition: only N = {DCT_SIZE} is supported, got {n}")

    def row(k: int, columns: int) -> Tuple[str, ...]:
        # input index n contributes cos((2n + 1) k pi / 32); columns are the folded inputs
        if k == 0:
            return tuple("A" for _ in range(columns))
        return tuple(cos_symbol((2 * col + 1) * k) for col in range(columns))

    even_even = tuple(row(k, 4) for k in EVEN_EVEN_ROWS)
    even_odd = tuple(row(k, 4) for k in EVEN_ODD_ROWS)
    odd = [row(k, 8) for k in ODD_ROWS]
    odd_left = tuple(r[:4] for r in odd)
    odd_right = tuple(r[4:] for r in odd)
    return DctDecomposition(even_even, even_odd, odd_left, odd_right)


def printed_block_diff(decomposition: Optional[DctDecomposition] = None) -> List[BlockMismatch]:
    """Every entry where a printed block disagrees with the derivation"""
    decomposition = decomposition or derive_decomposition()
    out = []
    for name, printed in PRINTED_BLOCKS.items():
        derived = decomposition.block(name)
        for r, (p_row, d_row) in enumerate(zip(printed, derived)):
            for c, (p, d) in enumerate(zip(p_row, d_row)):
                if p != d:
                    out.append(BlockMismatch(name, r, c, p, d))
    if out:
        _logger.info(f"printed_block_diff: {len(out)} printed entries disagree with the derivation")
    return out


@dataclass(frozen=True)
class RowUnits:
    """Coefficient units, one per matrix entry, grouped by output row"""

    even_even: Tuple[Tuple[CoefficientUnit, ...], ...]
    even_odd: Tuple[Tuple[CoefficientUnit, ...], ...]
    odd_left: Tuple[Tuple[CoefficientUnit, ...], ...]
    odd_right: Tuple[Tuple[CoefficientUnit, ...], ...]

    @classmethod
    def build(cls, decomposition: Optional[DctDecomposition] = None, constants: Optional[DctConstants] = None):
        decomposition = decomposition or derive_decomposition()
        constants = constants or DctConstants.build()

        def units(name):
            return tuple(tuple(build_unit(constants.signed(s)) for s in r) for r in decomposition.block(name))

        return cls(units("even_even"), units("even_odd"), units("odd_left"), units("odd_right"))


_ROW_UNITS: Optional[RowUnits] = None


def row_units() -> RowUnits:
    global _ROW_UNITS
    if _ROW_UNITS is None:
        _ROW_UNITS = RowUnits.build()
    return _ROW_UNITS


def word_bits(raws: Sequence[int]) -> int:
    """Two's-complement width that holds every value in ``raws``"""
    top = max((abs(r) for r in raws), default=0)
    return max(top.bit_length() + 1, 2)


def da_row(units: Sequence[CoefficientUnit], words: Sequence[int], tally: Optional[Tally] = None) -> int:
    """Exact row dot product: one coefficient unit per entry, adder tree over the entries"""
    width = word_bits(words)
    products = [eval_word(u, w, width) for u, w in zip(units, words)]
    _count(tally, "adder", len(products) - 1)
    return sum(products)


def dct16_raw(raws: Sequence[int], tally: Optional[Tally] = None, units: Optional[RowUnits] = None) -> List[int]:
    """Exact integer rows ``sum M[k][j] * word_j`` (before the 2/N shift and rounding)"""
    units = units or row_units()
    s, d = prestage(list(raws))
    ss, sd = second_stage(s)
    _count(tally, "adder", 12)
    _count(tally, "subtractor", 12)
    out = [0] * DCT_SIZE
    for k, u in zip(EVEN_EVEN_ROWS, units.even_even):
        out[k] = da_row(u, ss, tally)
    for k, u in zip(EVEN_ODD_ROWS, units.even_odd):
        out[k] = da_row(u, sd, tally)
    for k, left, right in zip(ODD_ROWS, units.odd_left, units.odd_right):
        out[k] = da_row(left, d[:4], tally) + da_row(right, d[4:], tally)
        _count(tally, "adder")
    return out


def dct16(samples: Sequence[FixedPoint], tally: Optional[Tally] = None) -> List[FixedPoint]:
    """16-point DCT of Q2.13 samples

    Returns:
        list of FixedPoint: Y[0..15] in Q3.13

    Raises:
        LengthMismatch: unless exactly 16 samples
    """
    if len(samples) != DCT_SIZE:
        raise LengthMismatch(f"dct16: expected {DCT_SIZE} samples, got {len(samples)}")
    frac = samples[0].format.fraction_bits
    if any(s.format.fraction_bits != frac for s in samples):
        raise ValueError("dct16: samples carry mixed formats")
    rows = dct16_raw([s.raw for s in samples], tally)
    frac += Q1_15.fraction_bits + NORM_SHIFT
    return [renormalize(WideAccumulator(r, frac), DCT_OUTPUT, tally) for r in rows]


def dct2d(block: Sequence[Sequence[FixedPoint]], tally: Optional[Tally] = None) -> List[List[FixedPoint]]:
    """Row-column 2-D DCT; the row results stay at full accumulator width until the column pass

    Returns:
        list of list of FixedPoint: 16 x 16 in Q4.13

    Raises:
        ShapeMismatch: unless ``block`` is 16 x 16
    """
    if len(block) != DCT_SIZE or any(len(r) != DCT_SIZE for r in block):
        raise ShapeMismatch(f"dct2d: expected a {DCT_SIZE}x{DCT_SIZE} block")
    frac = block[0][0].format.fraction_bits
    rows = [dct16_raw([s.raw for s in r], tally) for r in block]
    columns = [dct16_raw([rows[i][j] for i in range(DCT_SIZE)], tally) for j in range(DCT_SIZE)]
    frac += 2 * (Q1_15.fraction_bits + NORM_SHIFT)
    return [
        [renormalize(WideAccumulator(columns[j][i], frac), DCT2D_OUTPUT, tally) for j in range(DCT_SIZE)]
        for i in range(DCT_SIZE)
    ]
