"""
Streaming FIR and IIR filters on the DA engine.

The IIR is built the way the fabric builds it: a forward FIR on x, a feedback FIR on past outputs
re-quantized to the 8-bit sample format, and an adder joining the two.
"""

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .da_engine import CoefficientUnit, build_units, da_dot
from .errors import HorizonTooSmall, SampleFileError
from .numerics import Q1_7, Q1_15, FixedPoint, QFormat, Tally, quantize, renormalize

_logger = logging.getLogger(__name__)

MAX_TAPS = 16
FIR_OUTPUT = Q1_15
IIR_OUTPUT = Q1_15
FEEDBACK_FORMAT = Q1_7


@dataclass(frozen=True)
class FirSpec:
    """Coefficients c[0..L-1] in Q1.15, 1 <= L <= 16. Zero taps are allowed."""

    taps: Tuple[FixedPoint, ...]
    output_format: QFormat = FIR_OUTPUT
    units: Tuple[CoefficientUnit, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(self.taps))
        if not 1 <= len(self.taps) <= MAX_TAPS:
            raise ValueError(f"FirSpec: {len(self.taps)} taps, expected 1..{MAX_TAPS}")
        object.__setattr__(self, "units", tuple(build_units(self.taps)))

    @property
    def length(self) -> int:
        return len(self.taps)

    @classmethod
    def from_floats(cls, values: Sequence[float], output_format: QFormat = FIR_OUTPUT) -> "FirSpec":
        return cls(tuple(quantize(v, Q1_15) for v in values), output_format)

    @classmethod
    def from_file(cls, path: Union[str, Path], output_format: QFormat = FIR_OUTPUT) -> "FirSpec":
        return cls(tuple(read_coefficients(path)), output_format)


@dataclass(frozen=True)
class FirState:
    """The most recent samples, newest first, zero before the stream starts"""

    delay_line: Tuple[FixedPoint, ...]

    @classmethod
    def zeros(cls, length: int) -> "FirState":
        return cls(tuple(FixedPoint(0, Q1_7) for _ in range(length)))

    def push(self, x: FixedPoint) -> "FirState":
        if not self.delay_line:
            return self
        return FirState((x,) + self.delay_line[:-1])


@dataclass(frozen=True)
class IirSpec:
    """Forward taps a[0..L-1] and feedback taps b[1..L-1]"""

    forward: FirSpec
    feedback: Tuple[FixedPoint, ...]
    output_format: QFormat = IIR_OUTPUT
    feedback_units: Tuple[CoefficientUnit, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "feedback", tuple(self.feedback))
        if len(self.feedback) != self.forward.length - 1:
            raise ValueError(
                f"IirSpec: feedback has {len(self.feedback)} taps, expected {self.forward.length - 1}"
            )
        object.__setattr__(self, "feedback_units", tuple(build_units(self.feedback)))
        gain = sum(abs(b.value) for b in self.feedback)
        if gain >= 1:
            warnings.warn(f"IirSpec: feedback gain sum|b| = {gain:.4f} >= 1, the filter may be unstable")

    @property
    def length(self) -> int:
        return self.forward.length

    @classmethod
    def from_floats(cls, forward: Sequence[float], feedback: Sequence[float]) -> "IirSpec":
        return cls(FirSpec.from_floats(forward), tuple(quantize(v, Q1_15) for v in feedback))


@dataclass(frozen=True)
class IirState:
    forward: FirState
    feedback: FirState

    @classmethod
    def zeros(cls, spec: IirSpec) -> "IirState":
        return cls(FirState.zeros(spec.length), FirState.zeros(spec.length - 1))


def fir_step(
    spec: FirSpec, state: FirState, x: FixedPoint, tally: Optional[Tally] = None
) -> Tuple[FixedPoint, FirState]:
    """Advance the filter by one Q1.7 sample

    Returns:
        (FixedPoint, FirState): the output in ``spec.output_format`` and the new state
    """
    state = state.push(x)
    acc = da_dot(spec.units, state.delay_line, tally)
    return renormalize(acc, spec.output_format, tally), state


def fir_filter(spec: FirSpec, samples: Sequence[FixedPoint], tally: Optional[Tally] = None) -> List[FixedPoint]:
    state = FirState.zeros(spec.length)
    out = []
    for x in samples:
        y, state = fir_step(spec, state, x, tally)
        out.append(y)
    return out


def iir_step(
    spec: IirSpec, state: IirState, x: FixedPoint, tally: Optional[Tally] = None
) -> Tuple[FixedPoint, IirState]:
    """One step of y[n] = sum a[l] x[n-l] + sum b[m] y[n-m]

    The forward and feedback sums are separate DA dot products joined by one adder. The joined
    value is rounded to the output format, and separately to Q1.7 for the feedback delay line.
    """
    forward_state = state.forward.push(x)
    acc = da_dot(spec.forward.units, forward_state.delay_line, tally)
    if spec.feedback_units:
        acc = acc + da_dot(spec.feedback_units, state.feedback.delay_line, tally)
        if tally is not None:
            tally.count("adder")
    y = renormalize(acc, spec.output_format, tally)
    fed_back = renormalize(acc, FEEDBACK_FORMAT, tally)
    return y, IirState(forward_state, state.feedback.push(fed_back))


def iir_filter(spec: IirSpec, samples: Sequence[FixedPoint], tally: Optional[Tally] = None) -> List[FixedPoint]:
    state = IirState.zeros(spec)
    out = []
    for x in samples:
        y, state = iir_step(spec, state, x, tally)
        out.append(y)
    return out


def feedback_expansion(
    forward: Sequence[Union[Fraction, float]], feedback: Sequence[Union[Fraction, float]], horizon: int
) -> list:
    """Back-substitute the y terms of the recursion into a feed-forward sequence.

    ``h[n] = a[n] + sum_{m=1}^{min(n, L-1)} b[m] h[n-m]``; h[n] is the weight of x[k-n] in y[k]
    once every y is replaced by its own expansion. Fractions in give exact rationals out.
    """
    h: list = []
    for n in range(horizon):
        term = forward[n] if n < len(forward) else 0 * forward[0]
        for m in range(1, min(n, len(feedback)) + 1):
            term = term + feedback[m - 1] * h[n - m]
        h.append(term)
    return h


def expand_feedback(spec: IirSpec, horizon: int) -> FirSpec:
    """Truncated feed-forward equivalent of an IIR spec

    Args:
        spec (IirSpec): the recursive filter
        horizon (int): number of taps to keep, ``spec.length <= horizon <= 16``

    Returns:
        FirSpec: taps quantized from the exact rational expansion

    Raises:
        HorizonTooSmall: if ``horizon < spec.length``
        ValueError: if ``horizon`` exceeds the 16-tap FIR
        OverflowError: if an expanded tap leaves the Q1.15 range
    """
    if horizon < spec.length:
        raise HorizonTooSmall(f"expand_feedback: horizon {horizon} < filter length {spec.length}")
    a = [t.exact() for t in spec.forward.taps]
    b = [t.exact() for t in spec.feedback]
    h = feedback_expansion(a, b, horizon)
    _logger.debug(f"expand_feedback: {spec.length}-tap IIR to {horizon} taps")
    return FirSpec(tuple(quantize(v, Q1_15) for v in h))


def read_coefficients(path: Union[str, Path]) -> List[FixedPoint]:
    """Parse a coefficient file: one decimal per line, blank lines and ``#`` comments ignored"""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise SampleFileError(str(path), 0, f"cannot read: {e}") from e
    taps = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            taps.append(quantize(float(text), Q1_15))
        except ValueError as e:
            raise SampleFileError(str(path), lineno, f"not a decimal: {text!r}") from e
        except OverflowError as e:
            raise SampleFileError(str(path), lineno, f"coefficient {text} outside Q1.15") from e
    if not taps:
        raise SampleFileError(str(path), 0, "no coefficients")
    return taps
