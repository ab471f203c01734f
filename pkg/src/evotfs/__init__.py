"""Evolutionary time-frequency oversampling for imbalanced time series classification."""

__version__ = "0.1.0"

from .data import Dataset, LabeledSeries, NormParams, class_center, imbalance_ratio, load_ucr, min_max_normalize
from .fitness import FitnessContext, dft, dtw_distance, fourier_distance, gaussian_q
from .gp import GpConfig, GpTree, evolve
from .scheduler import FitnessSettings, build_plan, merge, oversample, population_size_for, run_plan
from .terminals import TerminalPool, default_window_len, extract_windows

__all__ = [
    "Dataset",
    "FitnessContext",
    "FitnessSettings",
    "GpConfig",
    "GpTree",
    "LabeledSeries",
    "NormParams",
    "TerminalPool",
    "build_plan",
    "class_center",
    "default_window_len",
    "dft",
    "dtw_distance",
    "evolve",
    "extract_windows",
    "fourier_distance",
    "gaussian_q",
    "imbalance_ratio",
    "load_ucr",
    "merge",
    "min_max_normalize",
    "oversample",
    "population_size_for",
    "run_plan",
]
