import numpy as np
import pytest

from evotfs.data import Dataset, LabeledSeries
from evotfs.errors import ConfigError
from evotfs.fitness import FitnessContext, fitness
from evotfs.gp import GpConfig, evolve, to_prefix
from evotfs.gp.evolve import Individual, rank
from evotfs.terminals import extract_windows


@pytest.fixture(scope="module")
def setup():
    rng = np.random.default_rng(0)
    x = rng.random((6, 12))
    pool = extract_windows(Dataset(x, np.array([0, 0, 0, 0, 1, 1])), 4)
    target = LabeledSeries(1, x[4])
    return target, pool, FitnessContext(target.values)


def run(setup, **kw):
    target, pool, ctx = setup
    best = []
    final = evolve(target, pool, ctx, GpConfig(population_size=20, generations=15, **kw), lambda g, b: best.append(b.fitness))
    return final, best


def test_best_fitness_never_drops(setup):
    for seed in range(5):
        _, best = run(setup, seed=seed)
        assert len(best) == 16
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))


def test_zero_generations_returns_initial_population(setup):
    target, pool, ctx = setup
    final = evolve(target, pool, ctx, GpConfig(population_size=12, generations=0))
    assert len(final) == 12
    fits = [ind.fitness for ind in final]
    assert fits == sorted(fits, reverse=True)


def test_reported_fitness_matches_phenotype(setup):
    target, pool, ctx = setup
    final, _ = run(setup, seed=3)
    for ind in final[:5]:
        if not ind.clamped:
            assert ind.fitness == pytest.approx(fitness(ind.phenotype, ctx), abs=1e-12)
        assert ind.phenotype.shape == (12,)


def test_deterministic_per_seed(setup):
    a, best_a = run(setup, seed=7)
    b, best_b = run(setup, seed=7)
    assert best_a == best_b
    assert [to_prefix(i.tree) for i in a] == [to_prefix(i.tree) for i in b]
    _, best_c = run(setup, seed=8)
    assert best_c != best_a


def test_requires_resolved_population(setup):
    target, pool, ctx = setup
    with pytest.raises(ConfigError):
        evolve(target, pool, ctx, GpConfig())


def test_rank_order():
    from evotfs.gp import parse_prefix

    small = parse_prefix("Connect(S#0, S#0, S#0)")
    big = parse_prefix("Connect(Add(S#0, S#1), S#0, S#0)")
    pop = [Individual(big, 0.5), Individual(small, 0.5), Individual(big, 0.9)]
    assert [(i.fitness, len(i.tree)) for i in rank(pop)] == [(0.9, 6), (0.5, 4), (0.5, 6)]
