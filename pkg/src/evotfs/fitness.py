"""Time/frequency similarity between a candidate series and a target.

DTW uses absolute local cost and the full (unbanded) accumulated-cost table.
The Fourier distance compares per-bin magnitudes and wrapped phase
differences over all T bins.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import EmptySeries, InvalidSigma, LengthMismatch

if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    # skip the TBB probe, which warns on older TBB installs
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

DEFAULT_SIGMA = 10.0
DEFAULT_ALPHA = 0.5
# bins with |X| at or below this fraction of the spectrum scale get arg = 0
ZERO_MAGNITUDE_RTOL = 1e-12
# smallest reported fitness, so scores stay inside (0, 1] after underflow
FITNESS_FLOOR = float(np.finfo(np.float64).tiny)


@numba.njit(cache=True, nogil=True)
def _dtw(a, b):
    m = a.shape[0]
    n = b.shape[0]
    prev = np.empty(n)
    cur = np.empty(n)
    acc = 0.0
    for j in range(n):
        acc += abs(a[0] - b[j])
        prev[j] = acc
    for i in range(1, m):
        ai = a[i]
        cur[0] = prev[0] + abs(ai - b[0])
        for j in range(1, n):
            best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            if prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = abs(ai - b[j]) + best
        prev, cur = cur, prev
    return prev[n - 1]


@numba.njit(cache=True, parallel=True)
def _pairwise_dtw(X):
    n = X.shape[0]
    out = np.zeros((n, n))
    for i in numba.prange(n):
        for j in range(i + 1, n):
            out[i, j] = _dtw(X[i], X[j])
    for i in range(n):
        for j in range(i + 1, n):
            out[j, i] = out[i, j]
    return out


@numba.njit(cache=True, parallel=True)
def _cross_dtw(A, B):
    out = np.empty((A.shape[0], B.shape[0]))
    for i in numba.prange(A.shape[0]):
        for j in range(B.shape[0]):
            out[i, j] = _dtw(A[i], B[j])
    return out


def _as_series(x) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D series")
    return arr


def dtw_distance(a, b) -> float:
    a, b = _as_series(a), _as_series(b)
    if a.size == 0 or b.size == 0:
        raise EmptySeries("DTW needs non-empty series")
    return float(_dtw(a, b))


def pairwise_dtw(X: np.ndarray) -> np.ndarray:
    """Symmetric (N, N) DTW matrix of the rows of ``X``."""
    return _pairwise_dtw(np.ascontiguousarray(X, dtype=np.float64))


def cross_dtw(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return _cross_dtw(np.ascontiguousarray(A, dtype=np.float64), np.ascontiguousarray(B, dtype=np.float64))


def dft(x) -> np.ndarray:
    """X[k] = sum_n x[n] exp(-2j*pi*k*n/T), any T >= 1."""
    return np.fft.fft(_as_series(x))


def _polar(spectrum: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mag = np.abs(spectrum)
    scale = max(1.0, float(mag.max(initial=0.0)))
    phase = np.where(mag <= ZERO_MAGNITUDE_RTOL * scale, 0.0, np.angle(spectrum))
    return mag, phase


def wrap_phase(d: np.ndarray) -> np.ndarray:
    """Map angle differences into (-pi, pi]."""
    return math.pi - np.mod(math.pi - d, 2 * math.pi)


def _fourier_polar(mag_a, ph_a, mag_b, ph_b) -> float:
    dphi = wrap_phase(ph_a - ph_b)
    return math.sqrt(float(np.sum((mag_a - mag_b) ** 2) + np.sum(dphi**2)))


def fourier_distance(x, x_hat) -> float:
    x, x_hat = _as_series(x), _as_series(x_hat)
    if x.shape != x_hat.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {x_hat.size}")
    return _fourier_polar(*_polar(dft(x)), *_polar(dft(x_hat)))


def gaussian_q(d: float, sigma: float) -> float:
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    return math.exp(-(d * d) / (2.0 * sigma * sigma))


@dataclass(frozen=True)
class FitnessContext:
    """Target sample with its spectrum precomputed once per GP process."""

    target: np.ndarray
    alpha: float = DEFAULT_ALPHA
    sigma_dtw: float = DEFAULT_SIGMA
    sigma_dft: float = DEFAULT_SIGMA
    target_spectrum: np.ndarray = field(init=False, repr=False)
    _mag: np.ndarray = field(init=False, repr=False)
    _phase: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        target = _as_series(self.target).copy()
        target.setflags(write=False)
        if target.size == 0:
            raise EmptySeries("empty target")
        if not (self.sigma_dtw > 0 and self.sigma_dft > 0):
            raise InvalidSigma("sigmas must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        spectrum = dft(target)
        mag, phase = _polar(spectrum)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "target_spectrum", spectrum)
        object.__setattr__(self, "_mag", mag)
        object.__setattr__(self, "_phase", phase)

    @property
    def sigma(self) -> float:
        return self.sigma_dtw

    def distances(self, candidate) -> tuple[float, float]:
        c = _as_series(candidate)
        if c.shape != self.target.shape:
            raise LengthMismatch(f"candidate length {c.size} != target length {self.target.size}")
        d_dtw = float(_dtw(self.target, c)) if self.alpha > 0 else 0.0
        d_dft = _fourier_polar(self._mag, self._phase, *_polar(dft(c))) if self.alpha < 1 else 0.0
        return d_dtw, d_dft


def combine(d_dtw: float, d_dft: float, ctx: FitnessContext) -> float:
    value = ctx.alpha * gaussian_q(d_dtw, ctx.sigma_dtw) + (1.0 - ctx.alpha) * gaussian_q(d_dft, ctx.sigma_dft)
    return max(value, FITNESS_FLOOR)


def fitness(candidate, ctx: FitnessContext) -> float:
    return combine(*ctx.distances(candidate), ctx)
