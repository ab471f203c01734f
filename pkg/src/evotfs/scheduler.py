"""Oversampling plan, per-target GP processes and merging."""

from __future__ import annotations

import logging
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .data import Dataset, LabeledSeries, class_center, concat, imbalance_ratio
from .errors import EmptyPlan, EvoTfsError, LengthMismatch
from .fitness import DEFAULT_ALPHA, DEFAULT_SIGMA, FitnessContext, dtw_distance
from .gp import GpConfig, Individual, evolve
from .terminals import TerminalPool

log = logging.getLogger(__name__)

POP_SIZE_SMALL = 30
POP_SIZE_LARGE = 50
POP_SIZE_IR_THRESHOLD = 15.0


@dataclass(frozen=True)
class ClassPlan:
    label: int
    n_existing: int
    n_generate: int
    n_processes: int
    targets: tuple[int, ...]  # dataset row indices, in process order
    quotas: tuple[int, ...]  # samples delivered by each process

    @property
    def per_process_quota(self) -> int:
        return math.ceil(self.n_generate / self.n_processes)


@dataclass(frozen=True)
class OversamplePlan:
    majority: int
    n_majority: int
    classes: tuple[ClassPlan, ...]

    @property
    def n_processes(self) -> int:
        return sum(c.n_processes for c in self.classes)

    @property
    def n_generate(self) -> int:
        return sum(c.n_generate for c in self.classes)


@dataclass(frozen=True)
class Provenance:
    label: int
    target_index: int
    rank: int
    seed: int
    fitness: float


@dataclass
class SyntheticBatch:
    values: np.ndarray
    labels: np.ndarray
    provenance: list[Provenance]
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.provenance)

    @property
    def samples(self) -> list[LabeledSeries]:
        return [LabeledSeries(int(y), x) for x, y in zip(self.values, self.labels)]

    @classmethod
    def empty(cls, T: int) -> "SyntheticBatch":
        return cls(np.empty((0, T)), np.empty(0, dtype=np.int64), [])


def population_size_for(ir: float) -> int:
    return POP_SIZE_SMALL if ir < POP_SIZE_IR_THRESHOLD else POP_SIZE_LARGE


def split_quota(n_generate: int, n_processes: int) -> tuple[int, ...]:
    """Spread ``n_generate`` over processes; each gets ceil or floor of the mean."""
    base, extra = divmod(n_generate, n_processes)
    return tuple(base + 1 if p < extra else base for p in range(n_processes))


def nearest_to_center(d: Dataset, label: int, count: int) -> list[int]:
    """Row indices of the ``count`` class members DTW-closest to the class center."""
    center = class_center(d, label).center
    idx = d.indices_of(label)
    dists = [(dtw_distance(d.values[i], center), int(i)) for i in idx]
    dists.sort()
    return [i for _, i in dists[:count]]


def build_plan(d: Dataset) -> OversamplePlan:
    """Balance every class up to the majority count.

    When a class needs at least as many new samples as it has members, each
    member becomes a target; otherwise the members nearest the class center
    are used, one process each.
    """
    imbalance_ratio(d)  # rejects single-class data
    counts = d.class_counts
    majority = d.majority_class()
    n_maj = counts[majority]
    entries = []
    for label, n_i in counts.items():
        n_g = n_maj - n_i
        if n_g <= 0:
            continue
        n_p = min(n_g, n_i)
        if n_p == n_i:
            targets = [int(i) for i in d.indices_of(label)]
        else:
            targets = nearest_to_center(d, label, n_p)
        entries.append(ClassPlan(label, n_i, n_g, n_p, tuple(targets), split_quota(n_g, n_p)))
    if not entries:
        raise EmptyPlan("all classes already have the majority count")
    return OversamplePlan(majority, n_maj, tuple(entries))


def process_seed(master: int, label: int, target_index: int) -> int:
    """Stable per-process seed, independent of scheduling order."""
    ss = np.random.SeedSequence([int(master), int(label), int(target_index)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class _Job:
    label: int
    target_index: int
    quota: int
    seed: int


@dataclass(frozen=True)
class FitnessSettings:
    alpha: float = DEFAULT_ALPHA
    sigma_dtw: float = DEFAULT_SIGMA
    sigma_dft: float = DEFAULT_SIGMA


def pick_distinct(ranked: list[Individual], quota: int) -> tuple[list[tuple[int, Individual]], bool]:
    """Top ``quota`` individuals with pairwise distinct phenotypes.

    Returns (rank, individual) pairs and whether duplicates had to be admitted.
    """
    chosen: list[tuple[int, Individual]] = []
    seen: set[bytes] = set()
    for r, ind in enumerate(ranked):
        key = ind.phenotype.tobytes()
        if key in seen:
            continue
        seen.add(key)
        chosen.append((r, ind))
        if len(chosen) == quota:
            return chosen, False
    taken = {r for r, _ in chosen}
    for r, ind in enumerate(ranked):
        if len(chosen) == quota:
            break
        if r not in taken:
            chosen.append((r, ind))
    chosen.sort(key=lambda p: p[0])
    return chosen, True


def _run_job(d: Dataset, pool: TerminalPool, cfg: GpConfig, fit: FitnessSettings, job: _Job, verbose: bool):
    target = LabeledSeries(job.label, d.values[job.target_index])
    ctx = FitnessContext(target.values, fit.alpha, fit.sigma_dtw, fit.sigma_dft)
    hook = None
    if verbose:
        name = f"{job.label}:{job.target_index}"

        def hook(gen: int, best: Individual) -> None:
            log.info("process=%s generation=%d best_fitness=%.6f", name, gen, best.fitness)

    try:
        ranked = evolve(target, pool, ctx, replace(cfg, seed=job.seed), hook)
    except EvoTfsError as exc:
        raise type(exc)(f"target {job.target_index}: {exc}") from exc
    chosen, collapsed = pick_distinct(ranked, job.quota)
    out = [(r, ind.phenotype, ind.fitness) for r, ind in chosen]
    return out, collapsed


_WORKER_STATE: dict = {}


def _init_worker(d, pool, cfg, fit, verbose):
    _WORKER_STATE.update(d=d, pool=pool, cfg=cfg, fit=fit, verbose=verbose)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")


def _worker(job: _Job):
    s = _WORKER_STATE
    return _run_job(s["d"], s["pool"], s["cfg"], s["fit"], job, s["verbose"])


def run_plan(
    d: Dataset,
    plan: OversamplePlan,
    pool: TerminalPool,
    cfg: GpConfig,
    fit: FitnessSettings = FitnessSettings(),
    workers: int = 1,
    verbose: bool = False,
) -> SyntheticBatch:
    """Run one GP process per target and collect exactly N_g samples per class.

    Each process is seeded from (cfg.seed, class, target index), so results
    do not depend on ``workers``.
    """
    if cfg.population_size is None:
        cfg = replace(cfg, population_size=population_size_for(imbalance_ratio(d)))
    jobs = [
        _Job(c.label, t, q, process_seed(cfg.seed, c.label, t))
        for c in plan.classes
        for t, q in zip(c.targets, c.quotas)
        if q > 0
    ]
    if not jobs:
        return SyntheticBatch.empty(d.length)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(
            max_workers=min(workers, len(jobs)),
            mp_context=multiprocessing.get_context("spawn"),
            initializer=_init_worker,
            initargs=(d, pool, cfg, fit, verbose),
        ) as ex:
            results = list(ex.map(_worker, jobs))
    else:
        results = [_run_job(d, pool, cfg, fit, job, verbose) for job in jobs]

    values, labels, prov, warnings = [], [], [], []
    for job, (picked, collapsed) in zip(jobs, results):
        if collapsed:
            msg = (
                f"class {job.label} target {job.target_index}: population has fewer than "
                f"{job.quota} distinct phenotypes; duplicates admitted"
            )
            log.warning(msg)
            warnings.append(msg)
        for r, phenotype, score in picked:
            values.append(phenotype)
            labels.append(job.label)
            prov.append(Provenance(job.label, job.target_index, r, job.seed, score))
    order = sorted(range(len(prov)), key=lambda i: (prov[i].label, prov[i].target_index, prov[i].rank))
    return SyntheticBatch(
        np.array([values[i] for i in order]),
        np.array([labels[i] for i in order], dtype=np.int64),
        [prov[i] for i in order],
        warnings,
    )


def merge(d: Dataset, batch: SyntheticBatch) -> Dataset:
    """Originals first in their order, then synthetic rows in batch order."""
    if len(batch) == 0:
        return d
    if batch.values.shape[1] != d.length:
        raise LengthMismatch(f"synthetic length {batch.values.shape[1]} != dataset length {d.length}")
    return concat([d, Dataset(batch.values, batch.labels, d.label_names)])


def oversample(
    d: Dataset,
    pool: TerminalPool,
    cfg: GpConfig,
    fit: FitnessSettings = FitnessSettings(),
    workers: int = 1,
    verbose: bool = False,
    plan_hook: Callable[[OversamplePlan], None] | None = None,
) -> tuple[Dataset, SyntheticBatch]:
    """Plan, run and merge; a dataset that is already balanced comes back unchanged."""
    try:
        plan = build_plan(d)
    except EmptyPlan:
        return d, SyntheticBatch.empty(d.length)
    if plan_hook:
        plan_hook(plan)
    batch = run_plan(d, plan, pool, cfg, fit, workers, verbose)
    return merge(d, batch), batch
