from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError


@dataclass(frozen=True)
class GpConfig:
    """Evolution settings for one GP run.

    ``population_size=None`` means "pick from the imbalance ratio" and is
    resolved by the scheduler before any run starts.
    """

    population_size: int | None = None
    generations: int = 50
    crossover_rate: float = 0.80
    mutation_rate: float = 0.20
    tournament_size: int = 3
    elites: int = 2
    max_depth: int = 10
    init: str = "ramped-half-and-half"
    seed: int = 0

    def __post_init__(self):
        if self.population_size is not None and self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if self.generations < 0:
            raise ConfigError("generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.crossover_rate + self.mutation_rate > 1.0 + 1e-12:
            raise ConfigError("crossover_rate + mutation_rate must not exceed 1")
        if self.tournament_size < 1:
            raise ConfigError("tournament_size must be >= 1")
        if self.elites < 0:
            raise ConfigError("elites must be >= 0")
        if self.population_size is not None and self.elites >= self.population_size:
            raise ConfigError("elites must be smaller than population_size")
        if self.max_depth < 2:
            raise ConfigError("max_depth must be >= 2")
        if self.init != "ramped-half-and-half":
            raise ConfigError(f"unsupported init method {self.init!r}")
