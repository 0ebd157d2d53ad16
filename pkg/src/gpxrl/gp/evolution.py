"""Generation loop and sequence-length curriculum."""

from __future__ import annotations

import dataclasses
import json
import logging
import random
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..dsl.ast import Node
from ..dsl.grammar import Grammar, TypeTag, base_grammar
from ..dsl.sampling import sample_program
from ..env import Dataset, EnvSpec
from ..liblearn import dump_library, expand_abstractions, mine_abstractions, rewrite_program
from .config import GPConfig
from .fitness import evaluate_masks, fitness_value
from .operators import crossover, mutate
from .selection import Individual, best_individual, tournament_select

log = logging.getLogger(__name__)

DatasetProvider = Callable[[int], "Dataset | None"]


@dataclass
class GenerationStats:
    best_fitness: float
    best_accuracy: float
    union_accuracy: float
    mean_size: float
    solved_union: np.ndarray
    best: Individual
    individuals: list = field(repr=False, default_factory=list)

    @property
    def solved_programs(self) -> list:
        return [ind.program for ind in self.individuals if ind.solved_mask.any()]


def init_population(cfg: GPConfig, grammar: Grammar, rng: random.Random) -> list:
    return [
        sample_program(grammar, TypeTag.ACTION, cfg.max_sample_depth, rng)
        for _ in range(cfg.population_size)
    ]


def evaluate_population(programs, dataset: Dataset, cfg: GPConfig) -> list:
    masks = evaluate_masks(programs, dataset, cfg.n_jobs)
    n = len(dataset)
    return [
        Individual(p, fitness_value(n, int(m.sum()), p.size, cfg.bloat_weight), m)
        for p, m in zip(programs, masks)
    ]


def summarize(individuals, n_tasks: int) -> GenerationStats:
    best = best_individual(individuals)
    union = np.zeros(n_tasks, dtype=bool)
    for ind in individuals:
        union |= ind.solved_mask
    return GenerationStats(
        best_fitness=best.fitness,
        best_accuracy=best.n_solved / n_tasks,
        union_accuracy=float(union.sum()) / n_tasks,
        mean_size=float(np.mean([ind.size for ind in individuals])),
        solved_union=union,
        best=best,
        individuals=individuals,
    )


def breed(individuals, cfg: GPConfig, grammar: Grammar, rng: random.Random) -> list:
    """Elite of one, then tournament pairs -> crossover -> mutation."""
    new = [best_individual(individuals).program]
    while len(new) < cfg.population_size:
        mom = tournament_select(individuals, cfg.tournament_size, rng).program
        dad = tournament_select(individuals, cfg.tournament_size, rng).program
        kids = crossover(mom, dad, cfg.p_crossover, rng)
        for parent, kid in zip((mom, dad), kids):
            kid = mutate(kid, grammar, cfg.p_mutation, rng, cfg.max_sample_depth)
            if kid.depth > cfg.max_tree_depth:
                kid = parent
            new.append(kid)
    return new[:cfg.population_size]


def run_generation(population, dataset: Dataset, cfg: GPConfig, grammar: Grammar,
                   rng: random.Random) -> tuple:
    """Evaluate ``population`` on ``dataset`` and breed the next one."""
    individuals = evaluate_population(population, dataset, cfg)
    stats = summarize(individuals, len(dataset))
    return breed(individuals, cfg, grammar, rng), stats


# -- curriculum -------------------------------------------------------------


@dataclass
class LengthRecord:
    sequence_length: int
    generations: int
    best_accuracy: float
    union_accuracy: float
    best_program: str
    best_program_expanded: str
    library: list
    wall_clock_seconds: float = 0.0

    def to_dict(self, include_timing: bool = True) -> dict:
        data = dataclasses.asdict(self)
        if not include_timing:
            data.pop("wall_clock_seconds")
        return data


@dataclass
class CurriculumState:
    sequence_length: int
    dataset: Dataset
    grammar: Grammar
    generation_in_length: int = 0
    halted: bool = False
    finished: bool = False
    history: list = field(default_factory=list)
    corpus: dict = field(default_factory=dict)
    best_accuracy: float = 0.0
    union_accuracy: float = 0.0
    best: Individual | None = None
    new_rules: list = field(default_factory=list)

    @property
    def done(self) -> bool:
        return self.halted or self.finished

    @property
    def any_solved(self) -> bool:
        return bool(self.corpus)


def curriculum_step(state: CurriculumState, stats: GenerationStats, solved_programs,
                    cfg: GPConfig, dataset_provider: DatasetProvider) -> CurriculumState:
    """Book-keep one finished generation and advance the length if due.

    Advancing mines the library from every program that solved at least one
    sub-trajectory at this length, extends the grammar and loads the next
    dataset. A length budget in which nothing was solved halts the run.
    """
    corpus = dict(state.corpus)
    for p in solved_programs:
        corpus.setdefault(p.text, p)
    best = state.best
    if best is None or stats.best.fitness > best.fitness:
        best = stats.best
    state = dataclasses.replace(
        state,
        generation_in_length=state.generation_in_length + 1,
        corpus=corpus,
        best_accuracy=max(state.best_accuracy, stats.best_accuracy),
        union_accuracy=max(state.union_accuracy, stats.union_accuracy),
        best=best,
        new_rules=[],
    )
    advance = (stats.best_accuracy >= cfg.advance_threshold
               or state.generation_in_length >= cfg.max_generations_per_length)
    if not advance:
        return state

    grammar = state.grammar
    added = []
    if state.any_solved and cfg.use_library:
        abstractions, grammar, _ = mine_abstractions(
            list(corpus.values()), cfg.library_size_limit, cfg.library_count_limit, grammar,
        )
        added = abstractions
    record = LengthRecord(
        sequence_length=state.sequence_length,
        generations=state.generation_in_length,
        best_accuracy=state.best_accuracy,
        union_accuracy=state.union_accuracy,
        best_program=best.program.text,
        best_program_expanded=expand_abstractions(best.program).text,
        library=[a.definition() for a in added],
    )
    history = state.history + [record]
    if not state.any_solved:
        return dataclasses.replace(state, halted=True, history=history)

    next_length = state.sequence_length + 1
    dataset = dataset_provider(next_length) if next_length <= cfg.max_sequence_length else None
    if dataset is None:
        return dataclasses.replace(state, finished=True, history=history, grammar=grammar,
                                   new_rules=[grammar[a.name] for a in added])
    return CurriculumState(
        sequence_length=next_length,
        dataset=dataset,
        grammar=grammar,
        history=history,
        new_rules=[grammar[a.name] for a in added],
    )


# -- full run ---------------------------------------------------------------


@dataclass
class RunReport:
    config: dict
    records: list
    halted: bool
    stop_reason: str
    library: list
    best_program: str
    source_policy: str = "unknown"

    @property
    def max_length(self) -> int:
        return max((r.sequence_length for r in self.records), default=0)

    def record(self, length: int) -> LengthRecord | None:
        for r in self.records:
            if r.sequence_length == length:
                return r
        return None

    def to_dict(self, include_timing: bool = True) -> dict:
        return {
            "config": self.config,
            "source_policy": self.source_policy,
            "halted": self.halted,
            "stop_reason": self.stop_reason,
            "best_program": self.best_program,
            "library": self.library,
            "lengths": [r.to_dict(include_timing) for r in self.records],
        }

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        records = [
            LengthRecord(**{**{"wall_clock_seconds": 0.0}, **r}) for r in data["lengths"]
        ]
        return cls(data.get("config", {}), records, data.get("halted", False),
                   data.get("stop_reason", ""), data.get("library", []),
                   data.get("best_program", ""), data.get("source_policy", "unknown"))


@dataclass
class EvolutionResult:
    report: RunReport
    grammar: Grammar
    population: list
    best: Individual


def evolve(cfg: GPConfig, data, grammar: Grammar | None = None,
           on_generation: Callable | None = None) -> EvolutionResult:
    """Run the curriculum from ``cfg.start_length`` until it halts or runs out
    of lengths. ``data`` is an :class:`EnvSpec` or a callable mapping a length
    to a :class:`Dataset` (or None when no data exists for it)."""
    provider = data.dataset_provider() if isinstance(data, EnvSpec) else data
    rng = random.Random(cfg.rng_seed)
    grammar = grammar or base_grammar()
    dataset = provider(cfg.start_length)
    if dataset is None:
        raise ValueError(f"no dataset for start length {cfg.start_length}")
    state = CurriculumState(cfg.start_length, dataset, grammar)
    population = init_population(cfg, grammar, rng)
    started = time.perf_counter()
    while not state.done:
        population, stats = run_generation(population, state.dataset, cfg, state.grammar, rng)
        length = state.sequence_length
        state = curriculum_step(state, stats, stats.solved_programs, cfg, provider)
        if on_generation is not None:
            on_generation(length, state, stats)
        if state.generation_in_length == 0 or state.done:
            now = time.perf_counter()
            state.history[-1].wall_clock_seconds = round(now - started, 3)
            started = now
            log.info("length %d: best %.3f union %.3f after %d generations",
                     length, state.history[-1].best_accuracy, state.history[-1].union_accuracy,
                     state.history[-1].generations)
            for rule in state.new_rules:
                population = [rewrite_program(p, rule) for p in population]
    best = state.best or stats.best
    if state.halted:
        reason = f"no sub-trajectory solved at length {state.sequence_length}"
    else:
        reason = f"no data beyond length {state.history[-1].sequence_length}"
    report = RunReport(
        config=cfg.run_dict(),
        records=state.history,
        halted=state.halted,
        stop_reason=reason,
        library=dump_library(state.grammar).splitlines(),
        best_program=best.program.text,
        source_policy=state.dataset.source_policy,
    )
    return EvolutionResult(report, state.grammar, population, best)
