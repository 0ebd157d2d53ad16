from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from ..dsl.ast import Node


@dataclass
class Individual:
    program: Node
    fitness: float = 0.0
    solved_mask: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def size(self) -> int:
        return self.program.size

    @property
    def n_solved(self) -> int:
        return int(self.solved_mask.sum())


def tournament_select(population, k: int, rng: random.Random) -> Individual:
    """Best of ``k`` distinct random individuals.

    Ties on fitness go to the smaller program, then to a uniform pick.
    """
    if not 1 <= k <= len(population):
        raise ValueError(f"tournament size {k} not in 1..{len(population)}")
    contestants = [population[i] for i in rng.sample(range(len(population)), k)]
    best_fit = max(ind.fitness for ind in contestants)
    top = [ind for ind in contestants if ind.fitness == best_fit]
    if len(top) == 1:
        return top[0]
    smallest = min(ind.size for ind in top)
    top = [ind for ind in top if ind.size == smallest]
    return top[rng.randrange(len(top))] if len(top) > 1 else top[0]


def best_individual(population) -> Individual:
    """Highest fitness, then smallest size, then earliest."""
    best = population[0]
    for ind in population[1:]:
        if ind.fitness > best.fitness or (ind.fitness == best.fitness and ind.size < best.size):
            best = ind
    return best
