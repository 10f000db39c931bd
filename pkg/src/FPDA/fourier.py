"""
16-point radix-2 decimation-in-time FFT built from 8 butterfly units.

Each butterfly multiplies by its twiddle with three real multipliers::

    R = (c - s) b + c (a - b)
    I = (c + s) a - c (a - b)

for ``(a + ib)(c + is)``, using a twiddle table that stores ``(c - s, c + s, c)``. Stage outputs are
fed back to the same 8 butterflies, so 4 passes finish a transform.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import LengthMismatch
from .numerics import (
    Q2_13,
    ComplexFixed,
    FixedPoint,
    QFormat,
    Tally,
    WideAccumulator,
    _count,
    cquantize,
    fx_mul,
    quantize,
    renormalize,
)

_logger = logging.getLogger(__name__)

FFT_SIZE = 16
FFT_INPUT = Q2_13
TWIDDLE_FORMAT = QFormat(2, 14)
# 4 guard bits for stage growth, 3 guard fraction bits against per-stage rounding
FFT_WORK = QFormat(7, 16)
FFT_OUTPUT = QFormat(7, 13)


@dataclass(frozen=True)
class TwiddleEntry:
    """``cos(theta) - sin(theta)``, ``cos(theta) + sin(theta)`` and ``cos(theta)``

    The sums are formed from the quantized cosine and sine, so the three-multiplier product equals
    the four-multiplier product exactly.
    """

    c_minus_s: FixedPoint
    c_plus_s: FixedPoint
    c: FixedPoint

    @classmethod
    def from_angle(cls, theta: float, format: QFormat = TWIDDLE_FORMAT) -> "TwiddleEntry":
        c = quantize(math.cos(theta), format)
        s = quantize(math.sin(theta), format)
        return cls(FixedPoint(c.raw - s.raw, format), FixedPoint(c.raw + s.raw, format), c)

    @property
    def s_raw(self) -> int:
        return self.c_plus_s.raw - self.c.raw

    @property
    def format(self) -> QFormat:
        return self.c.format


def twiddle(k: int, n: int, format: QFormat = TWIDDLE_FORMAT) -> TwiddleEntry:
    """W_n^k at theta = -2 pi k / n"""
    return TwiddleEntry.from_angle(-2.0 * math.pi * k / n, format)


@dataclass(frozen=True)
class ButterflyUnit:
    """CM census of one butterfly: the complex multiplier plus the output add/subtract"""

    adders: int = 2
    subtractors: int = 3
    multipliers: int = 3


@dataclass(frozen=True)
class FftPlan:
    """Fixed 16-point plan

    Args:
        scale_stages (bool): halve every stage output (s2 off); default False keeps the plain DFT
        scalable (bool): the s2 select, allows :func:`fft32` to chain two passes
        work_format (QFormat): register format between stages
        output_format (QFormat): format of the returned bins
    """

    scale_stages: bool = False
    scalable: bool = False
    work_format: QFormat = FFT_WORK
    output_format: QFormat = FFT_OUTPUT
    n: int = field(default=FFT_SIZE, init=False)
    stages: int = field(default=4, init=False)
    butterflies_per_stage: int = field(default=FFT_SIZE // 2, init=False)
    twiddles: Tuple[TwiddleEntry, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "twiddles", tuple(twiddle(k, self.n) for k in range(self.n // 2)))

    def stage_select(self, stage: int) -> Tuple[int, int]:
        """(s0, s1) for stage 0..3"""
        return stage & 1, (stage >> 1) & 1

    @property
    def scale_select(self) -> int:
        return int(self.scalable)


def bit_reverse(index: int, bits: int) -> int:
    out = 0
    for _ in range(bits):
        out = (out << 1) | (index & 1)
        index >>= 1
    return out


def stage_pairs(stage: int, n: int = FFT_SIZE) -> List[Tuple[int, int, int]]:
    """(top, bottom, twiddle index) of every butterfly in one in-place DIT stage"""
    half = 1 << stage
    step = n // (2 * half)
    pairs = []
    for start in range(0, n, 2 * half):
        for pos in range(half):
            pairs.append((start + pos, start + pos + half, pos * step))
    return pairs


def complex_mul3_wide(
    z: ComplexFixed, w: TwiddleEntry, tally: Optional[Tally] = None
) -> Tuple[WideAccumulator, WideAccumulator]:
    """Exact (R, I) of ``z * w``: one shared subtract, three multiplies, one add, one subtract.

    ``a - b`` is carried one integer bit wider than ``z``, as the subtractor output would be.
    """
    a, b = z.re, z.im
    _count(tally, "subtractor")
    diff = FixedPoint(a.raw - b.raw, QFormat(a.format.integer_bits + 1, a.format.fraction_bits))
    m1 = fx_mul(w.c_minus_s, b, tally)
    m2 = fx_mul(w.c, diff, tally)
    m3 = fx_mul(w.c_plus_s, a, tally)
    _count(tally, "adder")
    _count(tally, "subtractor")
    return m1 + m2, m3 - m2


def complex_mul3(z: ComplexFixed, w: TwiddleEntry, tally: Optional[Tally] = None) -> ComplexFixed:
    """Rotate ``z`` by the twiddle ``w``; the result is rounded back to the format of ``z``"""
    real, imag = complex_mul3_wide(z, w, tally)
    return ComplexFixed(renormalize(real, z.format, tally), renormalize(imag, z.format, tally))


def butterfly(
    top: ComplexFixed, bottom: ComplexFixed, w: TwiddleEntry, tally: Optional[Tally] = None, scale: bool = False
) -> Tuple[ComplexFixed, ComplexFixed]:
    """DIT butterfly ``(top + w*bottom, top - w*bottom)``

    The product stays wide until the add and subtract; each output component is rounded once to
    the input format, halved first when ``scale`` is set.
    """
    if top.format != bottom.format:
        raise ValueError(f"butterfly: top is {top.format} but bottom is {bottom.format}")
    fmt = top.format
    real, imag = complex_mul3_wide(bottom, w, tally)
    tr, ti = WideAccumulator.of(top.re), WideAccumulator.of(top.im)
    _count(tally, "adder")
    _count(tally, "subtractor")
    halve = 1 if scale else 0

    def out(acc: WideAccumulator) -> FixedPoint:
        return renormalize(WideAccumulator(acc.raw, acc.fraction_bits + halve), fmt, tally)

    upper = ComplexFixed(out(tr + real), out(ti + imag))
    lower = ComplexFixed(out(tr - real), out(ti - imag))
    return upper, lower


def dft_naive(x: Sequence[ComplexFixed], n: int, output_format: QFormat = FFT_OUTPUT) -> List[ComplexFixed]:
    """Direct O(n^2) DFT in double precision, quantized once at the end (saturating)

    Raises:
        LengthMismatch: if ``len(x) != n``
    """
    if len(x) != n:
        raise LengthMismatch(f"dft_naive: expected {n} samples, got {len(x)}")
    values = [z.value for z in x]
    out = []
    for k in range(n):
        acc = 0j
        for i, v in enumerate(values):
            acc += v * cmath.exp(-2j * math.pi * k * i / n)
        out.append(cquantize_saturating(acc, output_format))
    return out


def cquantize_saturating(value: complex, format: QFormat) -> ComplexFixed:
    bound = (1 << (format.integer_bits - 1)) - format.lsb
    re = min(max(value.real, -bound), bound)
    im = min(max(value.imag, -bound), bound)
    return cquantize(complex(re, im), format)


def reformat(z: ComplexFixed, format: QFormat, tally: Optional[Tally] = None) -> ComplexFixed:
    return ComplexFixed(
        renormalize(WideAccumulator.of(z.re), format, tally),
        renormalize(WideAccumulator.of(z.im), format, tally),
    )


def load(plan: FftPlan, x: Sequence[ComplexFixed]) -> List[ComplexFixed]:
    """Bit-reversed copy of ``x`` in the working format"""
    return [reformat(x[bit_reverse(i, plan.stages)], plan.work_format) for i in range(plan.n)]


def run_stage(
    plan: FftPlan, regs: Sequence[ComplexFixed], stage: int, tally: Optional[Tally] = None
) -> List[ComplexFixed]:
    """One pass of the 8 butterflies over the 16 working registers (in place)"""
    out = list(regs)
    for top, bottom, k in stage_pairs(stage, plan.n):
        out[top], out[bottom] = butterfly(regs[top], regs[bottom], plan.twiddles[k], tally, plan.scale_stages)
    return out


def fft16(plan: FftPlan, x: Sequence[ComplexFixed], tally: Optional[Tally] = None) -> List[ComplexFixed]:
    """Bit-reversed load, 4 stages on the same 8 butterflies, natural-order output

    Args:
        plan (FftPlan): the fabric plan
        x (list of ComplexFixed): 16 samples, normally Q2.13
        tally (Tally, optional): collects multiplier invocations and saturations

    Returns:
        list of ComplexFixed: 16 bins in ``plan.output_format``

    Raises:
        LengthMismatch: unless exactly 16 samples
    """
    if len(x) != plan.n:
        raise LengthMismatch(f"fft16: expected {plan.n} samples, got {len(x)}")
    regs = load(plan, x)
    for stage in range(plan.stages):
        regs = run_stage(plan, regs, stage, tally)
    return [reformat(r, plan.output_format, tally) for r in regs]


def fft32(plan: FftPlan, x: Sequence[ComplexFixed], tally: Optional[Tally] = None) -> List[ComplexFixed]:
    """32-point transform from two 16-point passes (even and odd samples) and one combine stage.

    Only available when the plan's scalability select (s2) is set.
    """
    if not plan.scalable:
        raise ValueError("fft32: plan was built without the scalability select")
    if len(x) != 2 * plan.n:
        raise LengthMismatch(f"fft32: expected {2 * plan.n} samples, got {len(x)}")
    inner = FftPlan(plan.scale_stages, False, plan.work_format, plan.work_format)
    evens = fft16(inner, x[0::2], tally)
    odds = fft16(inner, x[1::2], tally)
    upper, lower = [], []
    for k in range(plan.n):
        u, v = butterfly(evens[k], odds[k], twiddle(k, 2 * plan.n), tally, plan.scale_stages)
        upper.append(reformat(u, plan.output_format, tally))
        lower.append(reformat(v, plan.output_format, tally))
    return upper + lower


def to_complex(values: Sequence[complex], format: QFormat = FFT_INPUT) -> List[ComplexFixed]:
    return [cquantize(complex(v), format) for v in values]
