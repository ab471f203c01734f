"""Generational GP loop for a single target sample."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..data import LabeledSeries
from ..errors import ConfigError
from ..fitness import FITNESS_FLOOR, FitnessContext, combine
from ..terminals import TerminalPool
from .config import GpConfig
from .operators import crossover, init_population, mutate, rank_key, tournament_select
from .tree import GpTree, evaluate_tree_flagged

log = logging.getLogger(__name__)


@dataclass
class Individual:
    tree: GpTree
    fitness: float | None = None
    phenotype: np.ndarray | None = None
    clamped: bool = False

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


def rank(population: list[Individual]) -> list[Individual]:
    order = sorted(
        range(len(population)),
        key=lambda i: rank_key(population[i].fitness, len(population[i].tree), i),
    )
    return [population[i] for i in order]


class _Evaluator:
    """Scores trees against one target, memoising by tree structure."""

    def __init__(self, pool: TerminalPool, ctx: FitnessContext):
        self.pool = pool
        self.ctx = ctx
        self.T = ctx.target.size
        self.cache: dict[GpTree, tuple[float, np.ndarray, bool]] = {}

    def __call__(self, ind: Individual) -> Individual:
        if ind.evaluated:
            return ind
        hit = self.cache.get(ind.tree)
        if hit is None:
            phenotype, clamped = evaluate_tree_flagged(ind.tree, self.pool, self.T)
            phenotype.setflags(write=False)
            # clamped trees get the worst score instead of a distance-based one
            score = FITNESS_FLOOR if clamped else combine(*self.ctx.distances(phenotype), self.ctx)
            hit = self.cache[ind.tree] = (score, phenotype, clamped)
        ind.fitness, ind.phenotype, ind.clamped = hit
        return ind


def evolve(
    target: LabeledSeries,
    pool: TerminalPool,
    ctx: FitnessContext,
    cfg: GpConfig,
    on_generation: Callable[[int, Individual], None] | None = None,
) -> list[Individual]:
    """Evolve synthetic series for ``target``; returns the final population ranked.

    ``on_generation(g, best)`` is called for the initial population (g=0)
    and after every generation.
    """
    if cfg.population_size is None:
        raise ConfigError("population_size must be set before evolving")
    if len(target.values) != ctx.target.size:
        raise ConfigError("fitness context was built for a different target length")
    rng = np.random.default_rng(cfg.seed)
    score = _Evaluator(pool, ctx)
    population = [score(Individual(t)) for t in init_population(pool, cfg, rng)]
    population = rank(population)
    if on_generation:
        on_generation(0, population[0])

    n = cfg.population_size
    for gen in range(1, cfg.generations + 1):
        offspring = [Individual(e.tree, e.fitness, e.phenotype, e.clamped) for e in population[: cfg.elites]]
        while len(offspring) < n:
            r = rng.random()
            if r < cfg.crossover_rate:
                a = tournament_select(population, cfg.tournament_size, rng)
                b = tournament_select(population, cfg.tournament_size, rng)
                c1, c2 = crossover(a.tree, b.tree, rng, cfg.max_depth)
                offspring.append(Individual(c1))
                if len(offspring) < n:
                    offspring.append(Individual(c2))
            elif r < cfg.crossover_rate + cfg.mutation_rate:
                a = tournament_select(population, cfg.tournament_size, rng)
                offspring.append(Individual(mutate(a.tree, pool, rng, cfg.max_depth)))
            else:
                a = tournament_select(population, cfg.tournament_size, rng)
                offspring.append(Individual(a.tree))
        population = rank([score(ind) for ind in offspring])
        if on_generation:
            on_generation(gen, population[0])
    return population
