"""Synthetic two-class benchmark: noisy sines (majority) vs noisy sawtooths (minority).

Each series draws its own amplitude, number of cycles and phase; sawtooths
also draw the fraction of each period spent rising (1.0 is a pure ramp,
0.5 a triangle). The spread keeps 1-NN from separating the classes
perfectly, so resampling methods have room to differ.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import sawtooth

from .data import Dataset

AMPLITUDE = (0.2, 1.0)
CYCLES = (1.0, 5.0)
RISE_FRACTION = (0.5, 1.0)


def _signals(kind: str, n: int, T: int, noise: float, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(T) / T
    amp = rng.uniform(*AMPLITUDE, size=(n, 1))
    cycles = rng.uniform(*CYCLES, size=(n, 1))
    phase = rng.uniform(0.0, 1.0, size=(n, 1))
    arg = 2 * np.pi * (cycles * t[None, :] + phase)
    if kind == "sine":
        clean = np.sin(arg)
    else:
        clean = sawtooth(arg, rng.uniform(*RISE_FRACTION, size=(n, 1)))
    return amp * clean + rng.normal(0.0, noise, size=(n, T))


def sine_sawtooth(
    n_major: int = 60,
    n_minor: int = 12,
    T: int = 60,
    noise: float = 0.05,
    rng: np.random.Generator | int | None = None,
) -> Dataset:
    """Label 0 ``sine`` (n_major rows) then label 1 ``sawtooth`` (n_minor rows)."""
    rng = np.random.default_rng(rng)
    X = np.vstack([_signals("sine", n_major, T, noise, rng), _signals("sawtooth", n_minor, T, noise, rng)])
    y = np.r_[np.zeros(n_major, dtype=np.int64), np.ones(n_minor, dtype=np.int64)]
    return Dataset(X, y, ("sine", "sawtooth"))


def benchmark_split(seed: int, noise: float = 0.05) -> tuple[Dataset, Dataset]:
    """Imbalanced 60/12 training set and balanced 40/40 test set for one seed."""
    rng = np.random.default_rng([seed, 0x5EED])
    train = sine_sawtooth(60, 12, 60, noise, rng)
    test = sine_sawtooth(40, 40, 60, noise, rng)
    return train, test
