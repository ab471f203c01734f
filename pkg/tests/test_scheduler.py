import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evotfs.data import Dataset, imbalance_ratio
from evotfs.errors import EmptyPlan, LengthMismatch, NotImbalanceable
from evotfs.gp import GpConfig
from evotfs.gp.evolve import Individual
from evotfs.gp.tree import GpTree
from evotfs.scheduler import (
    build_plan,
    merge,
    oversample,
    pick_distinct,
    population_size_for,
    process_seed,
    run_plan,
    split_quota,
)
from evotfs.terminals import extract_windows
from oracles import center_fsum, dtw_brute

FAST = GpConfig(population_size=10, generations=3)


def dataset(counts, T=6, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(counts)), counts)
    return Dataset(rng.random((len(labels), T)), labels)


class TestPlan:
    def test_twenty_five(self):
        plan = build_plan(dataset([20, 5]))
        (c,) = plan.classes
        assert (c.n_generate, c.n_processes, c.per_process_quota) == (15, 5, 3)
        assert c.quotas == (3, 3, 3, 3, 3)
        assert c.targets == (20, 21, 22, 23, 24)

    def test_ten_six_uses_nearest_to_center(self):
        d = dataset([10, 6], T=5, seed=4)
        (c,) = build_plan(d).classes
        assert (c.n_generate, c.n_processes) == (4, 4)
        rows = [list(r) for r in d.values[10:]]
        center = center_fsum(rows)
        ranked = sorted((dtw_brute(r, center), 10 + i) for i, r in enumerate(rows))
        assert sorted(c.targets) == sorted(i for _, i in ranked[:4])
        assert c.targets == tuple(i for _, i in ranked[:4])

    def test_ten_five(self):
        (c,) = build_plan(dataset([10, 5])).classes
        assert (c.n_generate, c.n_processes, c.quotas) == (5, 5, (1, 1, 1, 1, 1))

    def test_uneven_quota(self):
        (c,) = build_plan(dataset([20, 6])).classes
        assert c.n_processes == 6 and sum(c.quotas) == 14
        assert max(c.quotas) - min(c.quotas) <= 1

    def test_multiclass(self):
        plan = build_plan(dataset([3, 12, 5]))
        assert plan.majority == 1
        assert {c.label: c.n_generate for c in plan.classes} == {0: 9, 2: 7}

    def test_balanced_and_single_class(self):
        with pytest.raises(EmptyPlan):
            build_plan(dataset([4, 4]))
        with pytest.raises(NotImbalanceable):
            build_plan(dataset([4]))

    @given(st.integers(0, 200), st.integers(1, 50))
    def test_split_quota(self, n, p):
        q = split_quota(n, p)
        assert len(q) == p and sum(q) == n
        assert max(q) - min(q) <= 1
        assert list(q) == sorted(q, reverse=True)


class TestPopulationSize:
    @pytest.mark.parametrize("ir, size", [(10, 30), (20.83, 50), (1.5, 30), (14.99, 30), (15, 50)])
    def test_rule(self, ir, size):
        assert population_size_for(ir) == size

    def test_from_counts(self):
        assert population_size_for(imbalance_ratio(dataset([90, 9]))) == 30
        assert population_size_for(imbalance_ratio(dataset([125, 6]))) == 50


@pytest.fixture(scope="module")
def toy():
    d = dataset([20, 5], T=9)
    return d, extract_windows(d, 3)


class TestRun:
    def test_counts_and_provenance(self, toy):
        d, pool = toy
        merged, batch = oversample(d, pool, FAST)
        assert merged.class_counts == {0: 20, 1: 20}
        assert len(batch) == 15
        np.testing.assert_array_equal(merged.values[:25], d.values)
        keys = [(p.label, p.target_index, p.rank) for p in batch.provenance]
        assert keys == sorted(keys)
        per_target = {}
        for p in batch.provenance:
            per_target[p.target_index] = per_target.get(p.target_index, 0) + 1
        assert per_target == {20: 3, 21: 3, 22: 3, 23: 3, 24: 3}
        assert all(0 < p.fitness <= 1 for p in batch.provenance)

    def test_seed_reproducible_and_sensitive(self, toy):
        d, pool = toy
        plan = build_plan(d)
        a = run_plan(d, plan, pool, FAST)
        b = run_plan(d, plan, pool, FAST)
        np.testing.assert_array_equal(a.values, b.values)
        c = run_plan(d, plan, pool, GpConfig(population_size=10, generations=3, seed=1))
        assert not np.array_equal(a.values, c.values)

    def test_worker_count_does_not_matter(self, toy):
        d, pool = toy
        plan = build_plan(d)
        a = run_plan(d, plan, pool, FAST, workers=1)
        b = run_plan(d, plan, pool, FAST, workers=2)
        assert a.values.tobytes() == b.values.tobytes()
        assert a.provenance == b.provenance

    def test_balanced_input_is_returned(self):
        d = dataset([4, 4])
        merged, batch = oversample(d, extract_windows(d, 2), FAST)
        assert merged is d and len(batch) == 0

    def test_process_seed(self):
        assert process_seed(0, 1, 20) == process_seed(0, 1, 20)
        assert len({process_seed(0, 1, t) for t in range(50)}) == 50
        assert 0 <= process_seed(2**40, 3, 9) < 2**63


class TestDistinct:
    def ind(self, v):
        return Individual(GpTree(()), 0.5, np.array([float(v)]))

    def test_skips_repeated_phenotypes(self):
        ranked = [self.ind(v) for v in (1, 1, 2, 3)]
        picked, collapsed = pick_distinct(ranked, 3)
        assert [r for r, _ in picked] == [0, 2, 3] and not collapsed

    def test_backfills_when_short(self):
        ranked = [self.ind(v) for v in (1, 1, 1, 2)]
        picked, collapsed = pick_distinct(ranked, 3)
        assert [r for r, _ in picked] == [0, 1, 3] and collapsed


def test_merge_length_check():
    from evotfs.scheduler import SyntheticBatch

    d = dataset([3, 1], T=4)
    with pytest.raises(LengthMismatch):
        merge(d, SyntheticBatch(np.zeros((1, 5)), np.array([1]), [None]))
