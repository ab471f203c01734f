"""Type-constrained initialisation, crossover, mutation and selection."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import EmptyPopulation
from ..terminals import TerminalPool, sample_constant
from .config import GpConfig
from .tree import ARITHMETIC, GpTree, Node, NodeKind, NodeType, const, op, subseries

# chance that "grow" stops at an Array slot before the depth limit
GROW_TERMINAL_PROB = 0.5
# argument type patterns for arithmetic nodes; (Float, Float) is not Array-typed
_ARG_PATTERNS = (
    (NodeType.ARRAY, NodeType.ARRAY),
    (NodeType.ARRAY, NodeType.FLOAT),
    (NodeType.FLOAT, NodeType.ARRAY),
)


def _pool_size(pool: TerminalPool | int) -> int:
    return pool if isinstance(pool, int) else len(pool)


def random_terminal(kind: NodeType, pool_size: int, rng: np.random.Generator) -> Node:
    if kind is NodeType.FLOAT:
        return const(sample_constant(rng))
    return subseries(int(rng.integers(pool_size)))


def generate(kind: NodeType, pool_size: int, height: int, full: bool, rng: np.random.Generator) -> list[Node]:
    """Build a subtree returning ``kind`` whose height is at most ``height``.

    With ``full`` every Array path runs to exactly ``height``; otherwise each
    Array slot stops early with probability GROW_TERMINAL_PROB.
    """
    if kind is NodeType.FLOAT:
        return [random_terminal(kind, pool_size, rng)]
    if height <= 0 or (not full and rng.random() < GROW_TERMINAL_PROB):
        return [random_terminal(kind, pool_size, rng)]
    nodes = [op(ARITHMETIC[int(rng.integers(len(ARITHMETIC)))])]
    for arg in _ARG_PATTERNS[int(rng.integers(len(_ARG_PATTERNS)))]:
        nodes.extend(generate(arg, pool_size, height - 1, full, rng))
    return nodes


def make_tree(pool: TerminalPool | int, depth: int, full: bool, rng: np.random.Generator) -> GpTree:
    size = _pool_size(pool)
    nodes = [op(NodeKind.CONNECT)]
    for _ in range(3):
        nodes.extend(generate(NodeType.ARRAY, size, depth - 1, full, rng))
    return GpTree(tuple(nodes))


def init_population(pool: TerminalPool | int, cfg: GpConfig, rng: np.random.Generator) -> list[GpTree]:
    """Ramped half-and-half over depths 2..max_depth."""
    if _pool_size(pool) < 1:
        raise ValueError("terminal pool is empty")
    n = cfg.population_size
    if n is None:
        raise ValueError("population_size must be resolved before initialisation")
    depths = range(2, cfg.max_depth + 1)
    trees = []
    for i in range(n):
        depth = depths[(i // 2) % len(depths)]
        trees.append(make_tree(pool, depth, full=(i % 2 == 0), rng=rng))
    return trees


def crossover(p1: GpTree, p2: GpTree, rng: np.random.Generator, max_depth: int = 10) -> tuple[GpTree, GpTree]:
    """Swap a random non-root subtree of ``p1`` with a same-typed one of ``p2``.

    Offspring deeper than ``max_depth`` are replaced by their parent.
    """
    i = int(rng.integers(1, len(p1)))
    kind = p1[i].type
    matches = [j for j in range(1, len(p2)) if p2[j].type is kind]
    if not matches:
        return p1, p2
    j = matches[int(rng.integers(len(matches)))]
    c1 = p1.replace(i, p2.subtree(j))
    c2 = p2.replace(j, p1.subtree(i))
    if c1.depth > max_depth:
        c1 = p1
    if c2.depth > max_depth:
        c2 = p2
    return c1, c2


def mutate(p: GpTree, pool: TerminalPool | int, rng: np.random.Generator, max_depth: int = 10) -> GpTree:
    """Replace a random non-root subtree with a freshly grown one of the same type."""
    i = int(rng.integers(1, len(p)))
    kind = p[i].type
    room = max_depth - p.depths[i]
    height = int(rng.integers(0, room + 1))
    return p.replace(i, generate(kind, _pool_size(pool), height, False, rng))


def rank_key(fitness: float, size: int, index: int) -> tuple[float, int, int]:
    """Sort key: higher fitness, then fewer nodes, then earlier position."""
    return (-fitness, size, index)


def tournament_select(population: Sequence, k: int, rng: np.random.Generator):
    """Best of ``k`` uniform draws with replacement.

    Members need ``fitness`` and ``tree`` attributes.
    """
    if not population:
        raise EmptyPopulation("cannot select from an empty population")
    picks = rng.integers(len(population), size=k)
    best = min(
        (int(i) for i in picks),
        key=lambda i: rank_key(population[i].fitness, len(population[i].tree), i),
    )
    return population[best]
