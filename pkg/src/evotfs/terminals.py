"""Sliding-window subseries pool used as the GP terminal set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .data import Dataset
from .errors import InvalidWindow, SeriesTooShort, WindowTooLong

CONST_RANGE = (-1.0, 1.0)


@dataclass(frozen=True)
class TerminalPool:
    """All stride-1 windows of every training series, flattened.

    Row ``i * K + j`` of ``subseries`` is the window of series ``i`` that
    starts at offset ``j``. ``source`` keeps the originating series index.
    """

    subseries: np.ndarray
    window_len: int
    window_count_per_series: int
    source: np.ndarray
    const_range: tuple[float, float] = CONST_RANGE

    def __len__(self) -> int:
        return self.subseries.shape[0]

    def index_of(self, series_index: int, start: int) -> int:
        return series_index * self.window_count_per_series + start


def extract_windows(d: Dataset, window_len: int) -> TerminalPool:
    T = d.length
    if window_len < 1:
        raise InvalidWindow(f"window length must be >= 1, got {window_len}")
    if window_len > T:
        raise WindowTooLong(f"window length {window_len} exceeds series length {T}")
    K = T - window_len + 1
    windows = sliding_window_view(d.values, window_len, axis=1)  # (N, K, L)
    subseries = np.ascontiguousarray(windows.reshape(len(d) * K, window_len))
    subseries.setflags(write=False)
    source = np.repeat(np.arange(len(d)), K)
    return TerminalPool(subseries, window_len, K, source)


def default_window_len(T: int) -> int:
    if T < 3:
        raise SeriesTooShort(f"series length {T} < 3; Connect needs three fragments")
    return math.ceil(T / 3)


def sample_constant(rng: np.random.Generator) -> float:
    lo, hi = CONST_RANGE
    return float(rng.uniform(lo, hi))
