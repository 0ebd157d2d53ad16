"""scikit-learn style wrapper around the curriculum GP."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .dsl.interpreter import compile_program
from .dsl.values import Action
from .env import EmptyDataset, slice_dataset
from .explain import explain_decision
from .gp.config import GPConfig
from .gp.evolution import evolve
from .validation import check_actions, check_groups, check_observations

ACTION_LABELS = np.array([a.value for a in Action])


class ProgramImitator(ClassifierMixin, BaseEstimator):
    """Evolve a readable program that imitates demonstrated actions.

    ``X`` is a list of observations or an ``(n, 26)`` code matrix, ``y`` the
    actions taken. Consecutive rows sharing a ``groups`` value form one
    episode; without groups all rows are one episode. Each episode is cut into
    windows of growing length for the curriculum.
    """

    def __init__(self, population_size=1000, tournament_size=100, p_mutation=0.5,
                 p_crossover=0.5, bloat_weight=0.025, max_generations_per_length=10,
                 advance_threshold=0.95, use_library=True, start_length=3,
                 max_sequence_length=100, count=50, random_state=0, n_jobs=1):
        self.population_size = population_size
        self.tournament_size = tournament_size
        self.p_mutation = p_mutation
        self.p_crossover = p_crossover
        self.bloat_weight = bloat_weight
        self.max_generations_per_length = max_generations_per_length
        self.advance_threshold = advance_threshold
        self.use_library = use_library
        self.start_length = start_length
        self.max_sequence_length = max_sequence_length
        self.count = count
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self) -> GPConfig:
        return GPConfig(
            population_size=self.population_size,
            tournament_size=self.tournament_size,
            p_mutation=self.p_mutation,
            p_crossover=self.p_crossover,
            bloat_weight=self.bloat_weight,
            max_generations_per_length=self.max_generations_per_length,
            advance_threshold=self.advance_threshold,
            use_library=self.use_library,
            start_length=self.start_length,
            max_sequence_length=self.max_sequence_length,
            rng_seed=self.random_state,
            n_jobs=self.n_jobs,
        )

    def fit(self, X, y, groups=None):
        observations = check_observations(X)
        actions = check_actions(y, len(observations))
        groups = check_groups(groups, len(observations))
        cfg = self._config()

        episodes, start = [], 0
        for i in range(1, len(observations) + 1):
            if i == len(observations) or groups[i] != groups[start]:
                episodes.append(list(zip(observations[start:i], actions[start:i])))
                start = i
        if max(len(e) for e in episodes) < cfg.start_length:
            raise ValueError(f"no episode is at least start_length={cfg.start_length} long")

        def provide(length):
            try:
                return slice_dataset(episodes, length, self.count, self.random_state + length, "user")
            except EmptyDataset:
                return None

        result = evolve(cfg, provide)
        self.program_ = result.best.program
        self.grammar_ = result.grammar
        self.report_ = result.report
        self.library_ = list(result.report.library)
        self.classes_ = ACTION_LABELS.copy()
        self.n_features_in_ = 26
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "program_")
        run = compile_program(self.program_)
        return np.array([run(o).value for o in check_observations(X)])

    def explain(self, X) -> list:
        check_is_fitted(self, "program_")
        return [explain_decision(self.program_, o) for o in check_observations(X)]

    @property
    def program_text_(self) -> str:
        check_is_fitted(self, "program_")
        return self.program_.text
