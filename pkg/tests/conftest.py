"""
Shared fixtures for the FPDA tests.

Coefficient, sample and descriptor files live in ``test_files/`` at the project root.
"""

from pathlib import Path

import numpy as np
import pytest

from FPDA.wavelet import DilationPair


@pytest.fixture
def test_files() -> Path:
    return Path(__file__).resolve().parent.parent / "test_files"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def daubechies() -> DilationPair:
    return DilationPair.daubechies8()
