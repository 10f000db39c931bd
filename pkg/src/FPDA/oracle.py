"""
Reference implementations in double precision and exact integers.

Nothing here reuses the fast paths: the sums are written out literally from their definitions.
Kernel outputs are compared after one final quantization of the reference to the kernel's output
format, in output LSBs.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .numerics import FixedPoint, QFormat

_logger = logging.getLogger(__name__)

FULL_LUT_MAX_TAPS = 4


@dataclass(frozen=True)
class ToleranceSpec:
    """Acceptance bounds for one kernel

    Args:
        max_abs_lsb (int): per-sample bound in output LSBs
        relative_energy (float): bound on ``|E_kernel - E_ref| / E_ref``
    """

    max_abs_lsb: int = 1
    relative_energy: float = 0.0

    def __post_init__(self):
        if self.max_abs_lsb < 0 or self.relative_energy < 0:
            raise ValueError("ToleranceSpec: bounds must be nonnegative")


TOLERANCES: Dict[str, ToleranceSpec] = {
    "FIR": ToleranceSpec(1),
    "IIR": ToleranceSpec(4),
    "DWT": ToleranceSpec(8),
    "FFT": ToleranceSpec(4, 0.005),
    "DCT": ToleranceSpec(4),
    "DCT2D": ToleranceSpec(8),
}


def conv_direct(taps: Sequence[float], x: Sequence[float]) -> np.ndarray:
    """Full linear convolution ``y[n] = sum_k x[k] c[n - k]``, length ``len(x) + len(taps) - 1``"""
    taps = [float(t) for t in taps]
    x = [float(v) for v in x]
    if not taps or not x:
        return np.zeros(0)
    y = np.zeros(len(x) + len(taps) - 1)
    for n in range(len(y)):
        acc = 0.0
        for k in range(len(x)):
            if 0 <= n - k < len(taps):
                acc += x[k] * taps[n - k]
        y[n] = acc
    return y


def iir_direct(
    a: Sequence[float],
    b: Sequence[float],
    x: Sequence[float],
    feedback_format: Optional[QFormat] = None,
) -> np.ndarray:
    """``y[n] = sum_l a[l] x[n - l] + sum_m b[m] y[n - m]`` with ``b`` holding b[1], b[2], ...

    Args:
        feedback_format (QFormat, optional): when given, the past outputs entering the recursion
            are first rounded and saturated to this format
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    x = [float(v) for v in x]
    y = np.zeros(len(x))
    fed = np.zeros(len(x))
    for n in range(len(x)):
        acc = 0.0
        for l, coef in enumerate(a):
            if n - l >= 0:
                acc += coef * x[n - l]
        for m, coef in enumerate(b, start=1):
            if n - m >= 0:
                acc += coef * fed[n - m]
        y[n] = acc
        if feedback_format is None:
            fed[n] = acc
        else:
            fed[n] = quantize_saturating([acc], feedback_format)[0] * feedback_format.lsb
    return y


def dft_direct(x: Sequence[complex]) -> np.ndarray:
    """``X[k] = sum_n x[n] exp(-j 2 pi k n / N)``"""
    x = [complex(v) for v in x]
    n_points = len(x)
    out = np.zeros(n_points, dtype=complex)
    for k in range(n_points):
        acc = 0j
        for n, v in enumerate(x):
            acc += v * cmath.exp(-2j * math.pi * k * n / n_points)
        out[k] = acc
    return out


def dct_direct(x: Sequence[float]) -> np.ndarray:
    """``Y[k] = (2/N) C_k sum_n x[n] cos((2n + 1) k pi / 2N)``, ``C_0 = 1/sqrt(2)``, else 1"""
    x = [float(v) for v in x]
    n_points = len(x)
    out = np.zeros(n_points)
    for k in range(n_points):
        ck = 1.0 / math.sqrt(2.0) if k == 0 else 1.0
        acc = 0.0
        for n, v in enumerate(x):
            acc += v * math.cos((2 * n + 1) * k * math.pi / (2 * n_points))
        out[k] = 2.0 / n_points * ck * acc
    return out


def dct2d_direct(block: Sequence[Sequence[float]]) -> np.ndarray:
    """Separable 2-D definition as a quadruple loop"""
    block = np.asarray(block, dtype=float)
    rows, cols = block.shape
    out = np.zeros((rows, cols))
    for u in range(rows):
        cu = 1.0 / math.sqrt(2.0) if u == 0 else 1.0
        for v in range(cols):
            cv = 1.0 / math.sqrt(2.0) if v == 0 else 1.0
            acc = 0.0
            for i in range(rows):
                for j in range(cols):
                    acc += (
                        block[i, j]
                        * math.cos((2 * i + 1) * u * math.pi / (2 * rows))
                        * math.cos((2 * j + 1) * v * math.pi / (2 * cols))
                    )
            out[u, v] = (2.0 / rows) * (2.0 / cols) * cu * cv * acc
    return out


def dwt_direct(
    h0: Sequence[float],
    l0: Sequence[float],
    x: Sequence[float],
    levels: int = 1,
    output_format: Optional[QFormat] = None,
    carry_format: Optional[QFormat] = None,
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Filter-and-downsample cascade

    Each branch is the causal, zero-padded convolution truncated to the input length, keeping
    samples 1, 3, 5, ... Level j + 1 filters the approximation of level j.

    Args:
        output_format (QFormat, optional): quantize every branch output to this format
        carry_format (QFormat, optional): re-quantize the approximation to this format before it
            feeds the next level

    Returns:
        list of (approximation, detail) per level, as float arrays
    """
    out = []
    current = np.asarray(x, dtype=float)
    for _ in range(levels):
        low = conv_direct(l0, current)[: len(current)][1::2]
        high = conv_direct(h0, current)[: len(current)][1::2]
        if output_format is not None:
            low = quantize_saturating(low, output_format) * output_format.lsb
            high = quantize_saturating(high, output_format) * output_format.lsb
        out.append((low, high))
        current = low
        if carry_format is not None:
            current = quantize_saturating(current, carry_format) * carry_format.lsb
    return out


def mac_direct(coefficient_raws: Sequence[int], sample_raws: Sequence[int]) -> int:
    """Integer multiply-accumulate"""
    total = 0
    for c, x in zip(coefficient_raws, sample_raws):
        total += int(c) * int(x)
    return total


def full_lut_dot(coefficient_raws: Sequence[int], sample_raws: Sequence[int], sample_bits: int) -> int:
    """Classic bit-serial DA: one ``2**L`` table over bit planes, sign plane subtracted

    Raises:
        ValueError: if more than 4 taps are given or the lengths differ
    """
    taps = len(coefficient_raws)
    if taps > FULL_LUT_MAX_TAPS or taps != len(sample_raws):
        raise ValueError(f"full_lut_dot: supports up to {FULL_LUT_MAX_TAPS} taps with matching samples")
    table = [sum(c for j, c in enumerate(coefficient_raws) if addr >> j & 1) for addr in range(1 << taps)]
    total = 0
    for plane in range(sample_bits):
        addr = 0
        for j, x in enumerate(sample_raws):
            addr |= ((int(x) >> plane) & 1) << j
        term = table[addr] << plane
        total = total - term if plane == sample_bits - 1 else total + term
    return total


def quantize_saturating(values, format: QFormat) -> np.ndarray:
    """Round half away from zero to raw integers of ``format``, clipped to its range"""
    v = np.asarray(values, dtype=float) * format.scale
    raw = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(raw, format.min_raw, format.max_raw).astype(np.int64)


def lsb_errors(kernel: Sequence[FixedPoint], reference, format: Optional[QFormat] = None) -> np.ndarray:
    """Absolute raw difference between kernel samples and the quantized reference"""
    if len(kernel) == 0:
        return np.zeros(0, dtype=np.int64)
    format = format or kernel[0].format
    got = np.array([s.raw for s in kernel], dtype=np.int64)
    want = quantize_saturating(np.asarray(reference, dtype=float).ravel(), format)
    if got.shape != want.shape:
        raise ValueError(f"lsb_errors: {got.shape[0]} kernel samples against {want.shape[0]} reference values")
    return np.abs(got - want)


def complex_lsb_errors(kernel, reference, format: Optional[QFormat] = None) -> np.ndarray:
    """Per-component raw difference for complex samples"""
    if len(kernel) == 0:
        return np.zeros(0, dtype=np.int64)
    reference = np.asarray(reference, dtype=complex).ravel()
    re = lsb_errors([z.re for z in kernel], reference.real, format)
    im = lsb_errors([z.im for z in kernel], reference.imag, format)
    return np.maximum(re, im)


def relative_energy_error(kernel_values, reference_values) -> float:
    e_kernel = float(np.sum(np.abs(np.asarray(kernel_values)) ** 2))
    e_ref = float(np.sum(np.abs(np.asarray(reference_values)) ** 2))
    if e_ref == 0:
        return 0.0 if e_kernel == 0 else math.inf
    return abs(e_kernel - e_ref) / e_ref


def check(errors: np.ndarray, tolerance: ToleranceSpec, name: str = "") -> Tuple[bool, str]:
    """Compare a vector of LSB errors against the per-sample bound"""
    worst = int(np.max(errors)) if len(errors) else 0
    ok = worst <= tolerance.max_abs_lsb
    message = f"{name}: max error {worst} LSB (limit {tolerance.max_abs_lsb})"
    if not ok:
        _logger.warning(message)
    return ok, message
