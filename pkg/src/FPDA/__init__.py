"""
Bit-accurate model of a field programmable DSP array: a fixed pool of Common Modules configured
as an FIR, IIR, DCT, FFT or DWT engine
"""
#   -------------------------------------------------------------
#   Licensed under the Apache License 2.0. See LICENSE.txt in project root for information.
#   -------------------------------------------------------------

__version__ = "0.1.0"

from .numerics import Q1_7, Q1_15, Q2_13, Q2_14, ComplexFixed, FixedPoint, QFormat, Tally
from .filter_bank import FirSpec, IirSpec, fir_filter, iir_filter
from .wavelet import DilationPair, dwt_level, dwt_pyramid
from .fourier import FftPlan, fft16, fft32
from .cosine import dct16, dct2d, derive_decomposition
from .fabric import CmPool, ConfigMode, account, configure, decode, execute, release
from .descriptor import RunDescriptor
