"""Strongly-typed GP over sliding-window terminals."""

from .config import GpConfig
from .evolve import Individual, evolve, rank
from .operators import crossover, init_population, make_tree, mutate, tournament_select
from .tree import (
    GpTree,
    Node,
    NodeKind,
    NodeType,
    evaluate_tree,
    evaluate_tree_flagged,
    is_valid,
    parse_prefix,
    to_prefix,
    validate,
)

__all__ = [
    "GpConfig",
    "GpTree",
    "Individual",
    "Node",
    "NodeKind",
    "NodeType",
    "crossover",
    "evaluate_tree",
    "evaluate_tree_flagged",
    "evolve",
    "init_population",
    "is_valid",
    "make_tree",
    "mutate",
    "parse_prefix",
    "rank",
    "to_prefix",
    "tournament_select",
    "validate",
]
