"""Evolve readable grid-maze policies as typed programs and explain their decisions."""

from .dsl import Action, Cell, Observation, evaluate, parse_program
from .env import Dataset, EnvSpec, generate_maze
from .estimator import ProgramImitator
from .explain import Explanation, accuracy_report, explain_decision, render_ascii
from .gp import GPConfig, RunReport, evolve
from .liblearn import Abstraction, mine_abstractions

__all__ = [
    "Abstraction", "Action", "Cell", "Dataset", "EnvSpec", "Explanation", "GPConfig",
    "Observation", "ProgramImitator", "RunReport", "accuracy_report", "evaluate", "evolve",
    "explain_decision", "generate_maze", "mine_abstractions", "parse_program", "render_ascii",
]
