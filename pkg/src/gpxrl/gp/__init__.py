"""Tree-based genetic programming with a sequence-length curriculum."""

from .config import ConfigError, GPConfig
from .evolution import (
    CurriculumState,
    EvolutionResult,
    GenerationStats,
    LengthRecord,
    RunReport,
    breed,
    curriculum_step,
    evaluate_population,
    evolve,
    init_population,
    run_generation,
)
from .fitness import evaluate_masks, fitness, fitness_value, rollout_match, solved_mask
from .operators import crossover, mutate
from .selection import Individual, best_individual, tournament_select

__all__ = [
    "ConfigError", "CurriculumState", "EvolutionResult", "GPConfig", "GenerationStats",
    "Individual", "LengthRecord", "RunReport", "best_individual", "breed", "crossover",
    "curriculum_step", "evaluate_masks", "evaluate_population", "evolve", "fitness",
    "fitness_value", "init_population", "mutate", "rollout_match", "run_generation",
    "solved_mask", "tournament_select",
]
