"""Desk-scale evaluation: metrics, density consistency, baselines, 1-NN classifiers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .data import Dataset, concat, min_max_normalize
from .errors import ConfigError, KTooLarge
from .fitness import cross_dtw, pairwise_dtw
from .gp import GpConfig
from .scheduler import FitnessSettings, oversample
from .terminals import default_window_len, extract_windows

log = logging.getLogger(__name__)

METHODS = ("none", "duplicate", "smote", "evotfs")
CLASSIFIERS = ("dtw1nn", "spec1nn")


@dataclass(frozen=True)
class ConfusionCounts:
    """Square confusion matrix; rows are true classes, columns predictions."""

    matrix: np.ndarray

    @classmethod
    def from_predictions(cls, y_true, y_pred, n_classes: int | None = None) -> "ConfusionCounts":
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if n_classes is None:
            n_classes = int(max(y_true.max(initial=0), y_pred.max(initial=0))) + 1
        m = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(m, (y_true, y_pred), 1)
        return cls(m)

    @classmethod
    def binary(cls, tp: int, fp: int, fn: int, tn: int) -> "ConfusionCounts":
        """Class 1 is positive, class 0 negative."""
        return cls(np.array([[tn, fp], [fn, tp]], dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    def tp(self, c: int) -> int:
        return int(self.matrix[c, c])

    def fp(self, c: int) -> int:
        return int(self.matrix[:, c].sum() - self.matrix[c, c])

    def fn(self, c: int) -> int:
        return int(self.matrix[c, :].sum() - self.matrix[c, c])

    def tn(self, c: int) -> int:
        return self.total - self.tp(c) - self.fp(c) - self.fn(c)

    def recall(self, c: int) -> float:
        support = self.tp(c) + self.fn(c)
        return self.tp(c) / support if support else 0.0


def f1_score(c: ConfusionCounts, positive_class: int = 1) -> float:
    tp, fp, fn = c.tp(positive_class), c.fp(positive_class), c.fn(positive_class)
    if tp == 0:
        return 0.0
    p = tp / (tp + fp)
    r = tp / (tp + fn)
    return 2 * p * r / (p + r)


def g_mean(c: ConfusionCounts) -> float:
    """Geometric mean of per-class recall over classes present in the truth.

    For two classes this is sqrt(sensitivity * specificity).
    """
    present = [k for k in range(c.matrix.shape[0]) if c.matrix[k].sum() > 0]
    recalls = [c.recall(k) for k in present]
    if not recalls or min(recalls) == 0.0:
        return 0.0
    return float(math.exp(sum(math.log(r) for r in recalls) / len(recalls)))


@dataclass(frozen=True)
class DensityReport:
    k: int
    u_value: float
    class_means: dict[int, float]
    majority: int
    per_minority: dict[int, float] = field(default_factory=dict)


def density_consistency(d: Dataset, k: int = 3, distances: np.ndarray | None = None) -> DensityReport:
    """Gap between majority and minority mean k-NN DTW distance.

    Neighbours come from the whole dataset regardless of class. With more
    than one minority class the largest gap is reported.
    """
    counts = d.class_counts
    if k < 1:
        raise KTooLarge("k must be >= 1")
    small = [c for c, n in counts.items() if n <= k]
    if small:
        raise KTooLarge(f"k={k} but classes {small} have at most {k} members")
    D = pairwise_dtw(d.values) if distances is None else np.asarray(distances)
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    knn_mean = np.sort(D, axis=1)[:, :k].sum(axis=1) / k
    means = {c: float(knn_mean[d.labels == c].mean()) for c in counts}
    maj = d.majority_class()
    gaps = {c: abs(means[maj] - means[c]) for c in counts if c != maj}
    return DensityReport(k, max(gaps.values()), means, maj, gaps)


def nearest_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k Euclidean-nearest other rows (ties by index)."""
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def smote_oversample(d: Dataset, k: int = 5, rng: np.random.Generator | None = None) -> Dataset:
    """Interpolate towards same-class neighbours until every class has the majority count."""
    rng = np.random.default_rng() if rng is None else rng
    counts = d.class_counts
    n_maj = max(counts.values())
    parts = [d]
    for label, n in counts.items():
        need = n_maj - n
        if need == 0:
            continue
        X = d.values[d.labels == label]
        kk = k
        if n <= k:
            kk = n - 1
            log.warning("class %d has %d samples; SMOTE uses k=%d", label, n, kk)
        out = np.empty((need, d.length))
        if kk == 0:
            out[:] = X[rng.integers(n, size=need)]
        else:
            nbrs = nearest_neighbors(X, kk)
            for s in range(need):
                i = int(rng.integers(n))
                j = int(nbrs[i, int(rng.integers(kk))])
                lam = rng.random()
                out[s] = X[i] + lam * (X[j] - X[i])
        parts.append(Dataset(out, np.full(need, label), d.label_names))
    return concat(parts)


def duplicate_oversample(d: Dataset, rng: np.random.Generator | None = None) -> Dataset:
    """Random duplication of existing minority rows (with replacement)."""
    rng = np.random.default_rng() if rng is None else rng
    counts = d.class_counts
    n_maj = max(counts.values())
    parts = [d]
    for label, n in counts.items():
        need = n_maj - n
        if need:
            X = d.values[d.labels == label]
            parts.append(Dataset(X[rng.integers(n, size=need)], np.full(need, label), d.label_names))
    return concat(parts)


def _vote(order: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    preds = np.empty(order.shape[0], dtype=np.int64)
    for r, row in enumerate(order[:, :k]):
        votes: dict[int, int] = {}
        for j in row:
            votes[int(labels[j])] = votes.get(int(labels[j]), 0) + 1
        best = max(votes.values())
        # tie: the class of the nearest tied neighbour
        preds[r] = next(int(labels[j]) for j in row if votes[int(labels[j])] == best)
    return preds


def _classify(dist: np.ndarray, train: Dataset, test: Dataset, k: int) -> ConfusionCounts:
    order = np.argsort(dist, axis=1, kind="stable")
    preds = _vote(order, train.labels, k)
    n = max(len(train.label_names), len(test.label_names))
    return ConfusionCounts.from_predictions(test.labels, preds, n)


def knn_dtw_classify(train: Dataset, test: Dataset, k: int = 1) -> ConfusionCounts:
    return _classify(cross_dtw(test.values, train.values), train, test, k)


def spectrum_magnitudes(X: np.ndarray) -> np.ndarray:
    return np.abs(np.fft.fft(np.asarray(X, dtype=np.float64), axis=1))


def knn_spectrum_classify(train: Dataset, test: Dataset, k: int = 1) -> ConfusionCounts:
    A = spectrum_magnitudes(test.values)
    B = spectrum_magnitudes(train.values)
    dist = np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2))
    return _classify(dist, train, test, k)


@dataclass(frozen=True)
class EvoSettings:
    """Everything the evotfs method needs besides the data and seed."""

    gp: GpConfig = GpConfig()
    fit: FitnessSettings = FitnessSettings()
    window_len: int | None = None
    workers: int = 1


def resample(train: Dataset, method: str, seed: int, settings: EvoSettings = EvoSettings()) -> Dataset:
    """Rebalance an already-normalized training set."""
    rng = np.random.default_rng(seed)
    if method == "none":
        return train
    if method == "duplicate":
        return duplicate_oversample(train, rng)
    if method == "smote":
        return smote_oversample(train, 5, rng)
    if method == "evotfs":
        L = settings.window_len or default_window_len(train.length)
        pool = extract_windows(train, L)
        merged, _ = oversample(train, pool, replace(settings.gp, seed=seed), settings.fit, settings.workers)
        return merged
    raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def minority_class(d: Dataset) -> int:
    counts = d.class_counts
    return min(counts, key=lambda c: (counts[c], c))


@dataclass(frozen=True)
class RunScore:
    method: str
    classifier: str
    seed: int
    f1: float
    g_mean: float
    u: float


def evaluate(
    train_raw: Dataset,
    test_raw: Dataset,
    methods: Sequence[str],
    classifier: str,
    seeds: Sequence[int],
    settings: EvoSettings = EvoSettings(),
    k_density: int = 3,
) -> list[RunScore]:
    """Score every (method, seed) pair; F1 is for the smallest training class."""
    if classifier not in CLASSIFIERS:
        raise ConfigError(f"unknown classifier {classifier!r}; choose from {', '.join(CLASSIFIERS)}")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    train, params = min_max_normalize(train_raw)
    test, _ = min_max_normalize(test_raw, params)
    positive = minority_class(train)
    classify = knn_dtw_classify if classifier == "dtw1nn" else knn_spectrum_classify
    scores = []
    for method in methods:
        for seed in seeds:
            rebalanced = resample(train, method, seed, settings)
            cm = classify(rebalanced, test)
            u = density_consistency(rebalanced, k_density).u_value
            scores.append(RunScore(method, classifier, seed, f1_score(cm, positive), g_mean(cm), u))
    return scores


def normalized_u(scores: Sequence[RunScore]) -> dict[tuple[str, int], float]:
    """Min-max scale U across methods separately for each seed."""
    out = {}
    for seed in sorted({s.seed for s in scores}):
        group = [s for s in scores if s.seed == seed]
        lo = min(s.u for s in group)
        hi = max(s.u for s in group)
        for s in group:
            out[(s.method, seed)] = (s.u - lo) / (hi - lo) if hi > lo else 0.0
    return out


REPORT_COLUMNS = (
    "method",
    "classifier",
    "seeds",
    "f1_mean",
    "f1_std",
    "gmean_mean",
    "gmean_std",
    "u_mean",
    "u_std",
    "u_norm_mean",
    "u_norm_std",
)


def format_report(scores: Sequence[RunScore]) -> str:
    """TSV with one row per (method, classifier); mean and std over seeds."""
    norm = normalized_u(scores)
    lines = ["\t".join(REPORT_COLUMNS)]
    keys = list(dict.fromkeys((s.method, s.classifier) for s in scores))
    for method, clf in keys:
        group = [s for s in scores if s.method == method and s.classifier == clf]
        cols = [method, clf, str(len(group))]
        for vals in (
            [s.f1 for s in group],
            [s.g_mean for s in group],
            [s.u for s in group],
            [norm[(s.method, s.seed)] for s in group],
        ):
            arr = np.asarray(vals)
            cols += [f"{arr.mean():.6f}", f"{arr.std():.6f}"]
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"
