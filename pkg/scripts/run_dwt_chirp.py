import logging

import numpy as np

import sys
sys.path.append("../src")
from FPDA import DilationPair, Tally, dwt_pyramid
from FPDA.cli import main
from FPDA.numerics import Q1_7, quantize_array
from FPDA.sampleio import write_samples


def chirp(n: int, f0: float = 0.01, f1: float = 0.45) -> np.ndarray:
    t = np.arange(n)
    phase = 2 * np.pi * (f0 * t + 0.5 * (f1 - f0) * t**2 / n)
    return 0.9 * np.sin(phase)


if __name__ == "__main__":

    logging.basicConfig(level=logging.INFO, format="%(asctime)s:%(levelname)s:%(name)s:: %(message)s")

    samples = quantize_array(chirp(256), Q1_7)
    write_samples("chirp.txt", samples)

    # one level through the configured fabric, checked against the reference
    code = main(["-v", "run", "--config", "config-dwt.yaml"])
    print(f"fpda run exited with {code}")

    # three levels with the behavioural kernels
    tally = Tally()
    pyramid = dwt_pyramid(DilationPair.daubechies8(), samples, levels=3, tally=tally)
    for level in range(1, pyramid.depth + 1):
        detail = np.array([s.value for s in pyramid.detail(level)])
        print(f"level {level}: {len(detail)} detail samples, energy {np.sum(detail**2):.4f}")
    print(f"saturations: {tally.saturations}")
