"""
Forward DWT by Mallat's pyramid with a decimator block per branch.

A decimator is an 8-tap DA FIR followed by a 1-bit counter: the counter starts at 0, toggles on
every input and an output is released when it wraps from 1 back to 0, i.e. on the 2nd, 4th, ...
sample. Boundaries are zero-padded (the delay line starts cleared and the stream is not extended).
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .errors import BadLength, OddLength, TooShort
from .filter_bank import FirSpec, FirState, fir_step, read_coefficients
from .numerics import Q1_7, Q1_15, Q2_14, FixedPoint, Tally, quantize, requantize

_logger = logging.getLogger(__name__)

DWT_TAPS = 8
DWT_OUTPUT = Q2_14

# Daubechies 8-tap pair, wavelet (highpass) and scaling (lowpass) columns
DAUBECHIES8_H0 = (-0.0106, -0.0329, 0.0308, 0.1870, -0.0280, -0.6309, 0.7148, -0.2304)
DAUBECHIES8_L0 = (0.2304, 0.7148, 0.6309, -0.0280, -0.1870, 0.0308, 0.0329, -0.0106)

#: allowed distance of the column sums from sqrt(2) and 0, in Q1.15 LSBs
SUM_TOLERANCE_LSB = 8


@dataclass(frozen=True)
class DilationPair:
    """Highpass ``h0`` and lowpass ``l0`` taps of one wavelet family, 8 taps each in Q1.15"""

    h0: Tuple[FixedPoint, ...]
    l0: Tuple[FixedPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "h0", tuple(self.h0))
        object.__setattr__(self, "l0", tuple(self.l0))
        for name, taps in (("h0", self.h0), ("l0", self.l0)):
            if len(taps) != DWT_TAPS:
                raise ValueError(f"DilationPair: {name} has {len(taps)} taps, expected {DWT_TAPS}")
        tolerance = SUM_TOLERANCE_LSB * Q1_15.lsb
        low_sum = sum(t.value for t in self.l0)
        high_sum = sum(t.value for t in self.h0)
        if abs(low_sum - math.sqrt(2)) > tolerance:
            raise ValueError(f"DilationPair: sum(l0) = {low_sum:.5f} is not sqrt(2)")
        if abs(high_sum) > tolerance:
            raise ValueError(f"DilationPair: sum(h0) = {high_sum:.5f} is not 0")

    @classmethod
    def daubechies8(cls) -> "DilationPair":
        return cls(
            tuple(quantize(v, Q1_15) for v in DAUBECHIES8_H0),
            tuple(quantize(v, Q1_15) for v in DAUBECHIES8_L0),
        )

    @classmethod
    def from_files(cls, highpass: Union[str, Path], lowpass: Union[str, Path]) -> "DilationPair":
        return cls(tuple(read_coefficients(highpass)), tuple(read_coefficients(lowpass)))

    @property
    def lowpass(self) -> FirSpec:
        return FirSpec(self.l0, DWT_OUTPUT)

    @property
    def highpass(self) -> FirSpec:
        return FirSpec(self.h0, DWT_OUTPUT)


@dataclass(frozen=True)
class DecimatorState:
    fir_state: FirState
    phase: int = 0
    held_output: Optional[FixedPoint] = None

    @classmethod
    def start(cls, taps: FirSpec) -> "DecimatorState":
        return cls(FirState.zeros(taps.length))


@dataclass(frozen=True)
class PyramidOutput:
    """``levels[j]`` is the (approximation, detail) pair of stage j + 1"""

    levels: Tuple[Tuple[Tuple[FixedPoint, ...], Tuple[FixedPoint, ...]], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def approximation(self, level: int) -> Tuple[FixedPoint, ...]:
        return self.levels[level - 1][0]

    def detail(self, level: int) -> Tuple[FixedPoint, ...]:
        return self.levels[level - 1][1]


def decimate_step(
    taps: FirSpec, state: DecimatorState, x: FixedPoint, tally: Optional[Tally] = None
) -> Tuple[Optional[FixedPoint], DecimatorState]:
    """Run the FIR on every sample; release its output only when the counter wraps 1 -> 0"""
    y, fir_state = fir_step(taps, state.fir_state, x, tally)
    phase = state.phase ^ 1
    if phase == 0:
        return y, DecimatorState(fir_state, phase, y)
    return None, DecimatorState(fir_state, phase, state.held_output)


def decimate(taps: FirSpec, samples: Sequence[FixedPoint], tally: Optional[Tally] = None) -> List[FixedPoint]:
    # the counter releases FIR outputs 1, 3, 5, ..., the even positions counted from output 1
    state = DecimatorState.start(taps)
    out = []
    for x in samples:
        y, state = decimate_step(taps, state, x, tally)
        if y is not None:
            out.append(y)
    return out


def dwt_level(
    pair: DilationPair, samples: Sequence[FixedPoint], tally: Optional[Tally] = None
) -> Tuple[List[FixedPoint], List[FixedPoint]]:
    """One analysis stage

    Args:
        pair (DilationPair): filter taps
        samples (list of FixedPoint): Q1.7 input, even length >= 8

    Returns:
        (list, list): approximation (lowpass branch) and detail (highpass branch), Q2.14

    Raises:
        OddLength: if the input length is odd
        TooShort: if fewer than 8 samples
    """
    if len(samples) < DWT_TAPS:
        raise TooShort(f"dwt_level: {len(samples)} samples, need at least {DWT_TAPS}")
    if len(samples) % 2:
        raise OddLength(f"dwt_level: input length {len(samples)} is odd")
    return decimate(pair.lowpass, samples, tally), decimate(pair.highpass, samples, tally)


def dwt_pyramid(
    pair: DilationPair, samples: Sequence[FixedPoint], levels: int, tally: Optional[Tally] = None
) -> PyramidOutput:
    """Multi-level decomposition; each stage consumes the previous approximation

    The approximation handed to the next stage is re-quantized to the Q1.7 DA sample format
    (rounded, saturation counted). Details and approximations are retained as Q2.14.

    Raises:
        BadLength: unless ``len(samples)`` is divisible by ``2**levels`` with at least 8 samples
            left at the last stage
    """
    n = len(samples)
    if levels < 1 or n % (1 << levels) or n // (1 << levels) < DWT_TAPS:
        raise BadLength(f"dwt_pyramid: {n} samples cannot be decomposed into {levels} levels")
    out = []
    current = list(samples)
    for j in range(levels):
        approx, detail = dwt_level(pair, current, tally)
        out.append((tuple(approx), tuple(detail)))
        current = [requantize(a, Q1_7, tally) for a in approx]
        _logger.debug(f"dwt_pyramid: level {j + 1} produced {len(approx)} samples per branch")
    return PyramidOutput(tuple(out))
