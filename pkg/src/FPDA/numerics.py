"""
Fixed-point value types shared by every kernel.

Samples are raw two's-complement integers tagged with a :class:`QFormat`. Products go into a
:class:`WideAccumulator` with the fraction bits of both operands summed, so nothing is lost until
:func:`renormalize` rounds (half away from zero) and saturates at a module output.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

_logger = logging.getLogger(__name__)

#: accumulator bound, a signed 64-bit register
ACC_BITS = 64


@dataclass(frozen=True)
class QFormat:
    """Fixed-point format Qm.n: ``integer_bits`` (sign included) and ``fraction_bits``"""

    integer_bits: int
    fraction_bits: int

    def __post_init__(self):
        if self.integer_bits < 1 or self.fraction_bits < 0:
            raise ValueError(f"QFormat: bad field widths Q{self.integer_bits}.{self.fraction_bits}")
        if self.word_bits > 32:
            raise ValueError(f"QFormat: Q{self.integer_bits}.{self.fraction_bits} is wider than 32 bits")

    @property
    def word_bits(self) -> int:
        return self.integer_bits + self.fraction_bits

    @property
    def scale(self) -> int:
        return 1 << self.fraction_bits

    @property
    def min_raw(self) -> int:
        return -(1 << (self.word_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.word_bits - 1)) - 1

    @property
    def lsb(self) -> float:
        return 1.0 / self.scale

    def fits(self, raw: int) -> bool:
        return self.min_raw <= raw <= self.max_raw

    def __str__(self) -> str:
        return f"Q{self.integer_bits}.{self.fraction_bits}"


Q1_7 = QFormat(1, 7)
Q1_15 = QFormat(1, 15)
Q2_13 = QFormat(2, 13)
Q2_14 = QFormat(2, 14)


@dataclass(frozen=True)
class FixedPoint:
    """A raw integer with its format, representing exactly ``raw / 2**fraction_bits``"""

    raw: int
    format: QFormat

    def __post_init__(self):
        if not self.format.fits(self.raw):
            raise OverflowError(f"FixedPoint: raw {self.raw} does not fit {self.format}")

    @property
    def value(self) -> float:
        return self.raw / self.format.scale

    def exact(self) -> Fraction:
        return Fraction(self.raw, self.format.scale)

    @classmethod
    def zero(cls, format: QFormat) -> "FixedPoint":
        return cls(0, format)


@dataclass(frozen=True)
class ComplexFixed:
    re: FixedPoint
    im: FixedPoint

    def __post_init__(self):
        if self.re.format != self.im.format:
            raise ValueError(f"ComplexFixed: re is {self.re.format} but im is {self.im.format}")

    @property
    def format(self) -> QFormat:
        return self.re.format

    @property
    def value(self) -> complex:
        return complex(self.re.value, self.im.value)

    @classmethod
    def zero(cls, format: QFormat) -> "ComplexFixed":
        return cls(FixedPoint(0, format), FixedPoint(0, format))


@dataclass(frozen=True)
class WideAccumulator:
    """Exact wide-integer sum with an implied number of fraction bits"""

    raw: int
    fraction_bits: int

    def __post_init__(self):
        if self.fraction_bits < 0:
            raise ValueError(f"WideAccumulator: negative fraction_bits {self.fraction_bits}")
        if not -(1 << (ACC_BITS - 1)) <= self.raw < (1 << (ACC_BITS - 1)):
            raise OverflowError(f"WideAccumulator: {self.raw} exceeds {ACC_BITS} bits")

    @property
    def value(self) -> float:
        return self.raw / (1 << self.fraction_bits)

    def exact(self) -> Fraction:
        return Fraction(self.raw, 1 << self.fraction_bits)

    def align(self, fraction_bits: int) -> "WideAccumulator":
        """Re-express with more fraction bits (a left shift, always exact)"""
        if fraction_bits < self.fraction_bits:
            raise ValueError(f"WideAccumulator.align: cannot drop to {fraction_bits} fraction bits exactly")
        return WideAccumulator(self.raw << (fraction_bits - self.fraction_bits), fraction_bits)

    def __add__(self, other: "WideAccumulator") -> "WideAccumulator":
        f = max(self.fraction_bits, other.fraction_bits)
        return WideAccumulator(self.align(f).raw + other.align(f).raw, f)

    def __sub__(self, other: "WideAccumulator") -> "WideAccumulator":
        f = max(self.fraction_bits, other.fraction_bits)
        return WideAccumulator(self.align(f).raw - other.align(f).raw, f)

    def __neg__(self) -> "WideAccumulator":
        return WideAccumulator(-self.raw, self.fraction_bits)

    @classmethod
    def of(cls, sample: FixedPoint) -> "WideAccumulator":
        return cls(sample.raw, sample.format.fraction_bits)


class Tally:
    """Event counter threaded through the kernels.

    Keys used in this package: ``saturation`` (renormalize clipped a value), ``multiplier``,
    ``adder``, ``subtractor`` (CM invocations).
    """

    def __init__(self) -> None:
        self.counts: Counter = Counter()

    def count(self, kind: str, n: int = 1) -> None:
        self.counts[kind] += n

    def __getitem__(self, kind: str) -> int:
        return self.counts[kind]

    @property
    def saturations(self) -> int:
        return self.counts["saturation"]

    def as_dict(self) -> dict:
        return {k: self.counts[k] for k in sorted(self.counts)}


def _count(tally: Optional[Tally], kind: str, n: int = 1) -> None:
    if tally is not None:
        tally.count(kind, n)


def round_shift(raw: int, shift: int) -> int:
    """Divide by ``2**shift`` rounding half away from zero; negative ``shift`` multiplies"""
    if shift <= 0:
        return raw << -shift
    half = 1 << (shift - 1)
    if raw >= 0:
        return (raw + half) >> shift
    return -((-raw + half) >> shift)


def round_half_away(value: Union[float, Fraction, int]) -> int:
    q = Fraction(value)
    magnitude = abs(q) + Fraction(1, 2)
    n = magnitude.numerator // magnitude.denominator
    return n if q >= 0 else -n


def saturate(raw: int, format: QFormat, tally: Optional[Tally] = None) -> int:
    if raw > format.max_raw:
        _count(tally, "saturation")
        return format.max_raw
    if raw < format.min_raw:
        _count(tally, "saturation")
        return format.min_raw
    return raw


def quantize(value: Union[float, Fraction, int], format: QFormat) -> FixedPoint:
    """Encode a real number, rounding half away from zero

    Args:
        value (float): with ``|value| < 2**(integer_bits - 1)``
        format (QFormat): target format

    Returns:
        FixedPoint: raw = round(value * 2**fraction_bits); a value that rounds one step past the
            positive maximum is clamped to it

    Raises:
        OverflowError: if ``value`` is outside the representable magnitude
    """
    bound = 1 << (format.integer_bits - 1)
    if not abs(Fraction(value)) < bound:
        raise OverflowError(f"quantize: |{value}| >= {bound} is outside {format}")
    raw = round_half_away(Fraction(value) * format.scale)
    if raw == format.max_raw + 1:
        raw = format.max_raw
    return FixedPoint(raw, format)


def cquantize(value: complex, format: QFormat) -> ComplexFixed:
    return ComplexFixed(quantize(value.real, format), quantize(value.imag, format))


def quantize_array(values: Iterable[float], format: QFormat) -> List[FixedPoint]:
    return [quantize(float(v), format) for v in np.asarray(values, dtype=float).ravel()]


def from_raws(raws: Iterable[int], format: QFormat) -> List[FixedPoint]:
    return [FixedPoint(int(r), format) for r in raws]


def raws(samples: Sequence[FixedPoint]) -> np.ndarray:
    return np.array([s.raw for s in samples], dtype=np.int64)


def values(samples: Sequence[FixedPoint]) -> np.ndarray:
    return np.array([s.value for s in samples], dtype=float)


def _same_format(a: FixedPoint, b: FixedPoint, name: str) -> None:
    if a.format != b.format:
        raise ValueError(f"{name}: operand formats differ ({a.format} vs {b.format})")


def fx_add(a: FixedPoint, b: FixedPoint) -> FixedPoint:
    _same_format(a, b, "fx_add")
    raw = a.raw + b.raw
    if not a.format.fits(raw):
        raise OverflowError(f"fx_add: {a.raw} + {b.raw} wraps in {a.format}")
    return FixedPoint(raw, a.format)


def fx_sub(a: FixedPoint, b: FixedPoint) -> FixedPoint:
    _same_format(a, b, "fx_sub")
    raw = a.raw - b.raw
    if not a.format.fits(raw):
        raise OverflowError(f"fx_sub: {a.raw} - {b.raw} wraps in {a.format}")
    return FixedPoint(raw, a.format)


def fx_mul(a: FixedPoint, b: FixedPoint, tally: Optional[Tally] = None) -> WideAccumulator:
    """Full-width product; fraction bits of the operands are summed"""
    _count(tally, "multiplier")
    return WideAccumulator(a.raw * b.raw, a.format.fraction_bits + b.format.fraction_bits)


def renormalize(acc: WideAccumulator, target: QFormat, tally: Optional[Tally] = None) -> FixedPoint:
    """Round an accumulator to ``target`` (half away from zero) and saturate

    Saturation is not an error: each clipped value is recorded in ``tally`` under ``saturation``.
    """
    raw = round_shift(acc.raw, acc.fraction_bits - target.fraction_bits)
    clipped = saturate(raw, target, tally)
    if clipped != raw:
        _logger.debug(f"renormalize: saturated {acc.value:.6f} to {target}")
    return FixedPoint(clipped, target)


def requantize(sample: FixedPoint, target: QFormat, tally: Optional[Tally] = None) -> FixedPoint:
    return renormalize(WideAccumulator.of(sample), target, tally)
