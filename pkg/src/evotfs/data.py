"""UCR-format ingestion, min-max scaling and per-class statistics."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateScale,
    EmptyDataset,
    FormatError,
    NotImbalanceable,
    ParseError,
    UnknownClass,
)

_WHITESPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class LabeledSeries:
    label: int
    values: np.ndarray

    @property
    def length(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Dataset:
    """A set of equal-length univariate series with dense integer labels.

    ``values`` has shape (N, T). ``labels[i]`` indexes ``label_names`` which
    keeps the original label text for output.
    """

    values: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if values.ndim != 2 or values.shape[0] == 0:
            raise EmptyDataset("dataset has no series")
        if values.shape[1] < 1:
            raise FormatError(1, "series must have at least one value")
        if labels.shape != (values.shape[0],):
            raise ValueError("labels must have one entry per series")
        names = self.label_names or tuple(str(i) for i in range(int(labels.max()) + 1))
        if labels.min() < 0 or labels.max() >= len(names):
            raise ValueError("labels must index label_names")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_names", tuple(names))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @property
    def series(self) -> list[LabeledSeries]:
        return [LabeledSeries(int(y), x) for x, y in zip(self.values, self.labels)]

    @property
    def class_counts(self) -> dict[int, int]:
        counts = Counter(int(y) for y in self.labels)
        return dict(sorted(counts.items()))

    @property
    def classes(self) -> list[int]:
        return sorted(self.class_counts)

    def indices_of(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def majority_class(self) -> int:
        counts = self.class_counts
        # ties go to the smaller label
        return max(counts, key=lambda c: (counts[c], -c))

    def with_values(self, values: np.ndarray) -> "Dataset":
        return Dataset(values, self.labels, self.label_names)


@dataclass(frozen=True)
class ClassCenter:
    label: int
    center: np.ndarray


@dataclass(frozen=True)
class NormParams:
    lo: float
    hi: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.lo) / (self.hi - self.lo)

    def invert(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * (self.hi - self.lo) + self.lo


def _split(line: str) -> list[str]:
    if "\t" in line:
        return [tok.strip() for tok in line.split("\t")]
    if "," in line:
        return [tok.strip() for tok in line.split(",")]
    return _WHITESPACE.split(line.strip())


def parse_ucr(lines: Iterable[str], label_names: Sequence[str] = ()) -> Dataset:
    """Parse UCR text rows ``label<sep>v1<sep>v2...``.

    Rows are numbered from 1 in error messages. Blank lines are skipped.
    Labels are mapped to dense integers in first-seen order, after any
    ``label_names`` supplied (use the training set's names for a test file).
    """
    rows: list[list[float]] = []
    raw_labels: list[str] = []
    width = None
    for row_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        tokens = _split(line)
        if len(tokens) < 2:
            raise FormatError(row_no, "expected a label followed by at least one value")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise FormatError(row_no, f"expected {width - 1} values, found {len(tokens) - 1}")
        row = []
        for col, tok in enumerate(tokens[1:], start=1):
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(row_no, col, tok) from None
            if not math.isfinite(v):
                raise ParseError(row_no, col, tok)
            row.append(v)
        label = tokens[0]
        try:
            label = _canonical_label(label)
        except ValueError:
            raise ParseError(row_no, 0, tokens[0]) from None
        raw_labels.append(label)
        rows.append(row)
    if not rows:
        raise EmptyDataset("no series found")
    names: dict[str, int] = {name: i for i, name in enumerate(label_names)}
    for lab in raw_labels:
        names.setdefault(lab, len(names))
    labels = np.array([names[lab] for lab in raw_labels], dtype=np.int64)
    return Dataset(np.array(rows, dtype=np.float64), labels, tuple(names))


def _canonical_label(token: str) -> str:
    # "1", "1.0" and "1.000e+00" all name the same UCR class
    if not token:
        raise ValueError("empty label")
    try:
        v = float(token)
    except ValueError:
        return token
    if not math.isfinite(v):
        raise ValueError(token)
    return str(int(v)) if v.is_integer() else repr(v)


def load_ucr(path: str | Path, label_names: Sequence[str] = ()) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_ucr(fh, label_names)


def format_ucr(d: Dataset) -> str:
    """Emit a dataset as tab-separated UCR text; floats use shortest repr."""
    out = []
    for x, y in zip(d.values, d.labels):
        out.append("\t".join([d.label_names[y], *(repr(float(v)) for v in x)]))
    return "\n".join(out) + "\n"


def write_ucr(d: Dataset, path: str | Path) -> None:
    Path(path).write_text(format_ucr(d), encoding="utf-8")


def min_max_normalize(d: Dataset, params: NormParams | None = None) -> tuple[Dataset, NormParams]:
    """Scale with one global (min, max); pass ``params`` to reuse training bounds."""
    if params is None:
        lo, hi = float(d.values.min()), float(d.values.max())
        if not hi > lo:
            raise DegenerateScale(f"all values equal {lo}")
        params = NormParams(lo, hi)
    return d.with_values(params.apply(d.values)), params


def imbalance_ratio(d: Dataset) -> float:
    counts = d.class_counts
    if len(counts) < 2:
        raise NotImbalanceable("need at least two classes")
    return max(counts.values()) / min(counts.values())


def class_center(d: Dataset, label: int) -> ClassCenter:
    idx = d.indices_of(label)
    if idx.size == 0:
        raise UnknownClass(f"class {label} not in dataset")
    return ClassCenter(label, d.values[idx].mean(axis=0))


def concat(datasets: Sequence[Dataset]) -> Dataset:
    """Stack datasets that share a label vocabulary (first one's names win)."""
    first = datasets[0]
    return Dataset(
        np.vstack([d.values for d in datasets]),
        np.concatenate([d.labels for d in datasets]),
        first.label_names,
    )

