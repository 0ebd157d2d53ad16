"""Sub-trajectory imitation and size-penalized fitness."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..dsl.ast import Node
from ..dsl.interpreter import _compile
from ..env import Dataset


def fitness_value(n_tasks: int, n_solved: int, size: int, bloat_weight: float) -> float:
    """``1 / (1 + N_D - solved + w_b * size)``."""
    return 1.0 / (1.0 + n_tasks - n_solved + bloat_weight * size)


def rollout_match(program: Node, trajectory: Sequence, use_cache: bool = True) -> int:
    """1 if the program reproduces every action of ``trajectory``, else 0.

    Stops at the first mismatching pair.
    """
    fn = _compile(program)
    for obs, action in trajectory:
        if fn(obs, obs.heading, (), use_cache) is not action:
            return 0
    return 1


def solved_mask(program: Node, trajectories: Sequence) -> np.ndarray:
    fn = _compile(program)
    mask = np.zeros(len(trajectories), dtype=bool)
    for i, traj in enumerate(trajectories):
        for obs, action in traj:
            if fn(obs, obs.heading, (), True) is not action:
                break
        else:
            mask[i] = True
    return mask


def fitness(program: Node, dataset: Dataset, bloat_weight: float) -> tuple:
    """Return ``(fitness, solved_mask)`` of ``program`` on ``dataset``."""
    if len(dataset) < 1:
        raise ValueError("fitness needs at least one sub-trajectory")
    mask = solved_mask(program, dataset.trajectories)
    return fitness_value(len(dataset), int(mask.sum()), program.size, bloat_weight), mask


def _masks_chunk(programs, trajectories):
    return [solved_mask(p, trajectories) for p in programs]


def evaluate_masks(programs: Sequence[Node], dataset: Dataset, n_jobs: int = 1) -> list:
    """Solved masks for ``programs``; identical programs are evaluated once."""
    unique = {}
    for p in programs:
        unique.setdefault(p.text, p)
    keys = list(unique)
    trajectories = dataset.trajectories
    if n_jobs == 1 or len(keys) < 64:
        masks = _masks_chunk([unique[k] for k in keys], trajectories)
    else:
        from joblib import Parallel, delayed, effective_n_jobs

        workers = effective_n_jobs(n_jobs)
        chunks = [keys[i::workers] for i in range(workers)]
        results = Parallel(n_jobs=workers)(
            delayed(_masks_chunk)([unique[k] for k in chunk], trajectories) for chunk in chunks
        )
        masks = [None] * len(keys)
        for w, chunk_masks in enumerate(results):
            for j, m in enumerate(chunk_masks):
                masks[w + j * workers] = m
    by_text = dict(zip(keys, masks))
    return [by_text[p.text] for p in programs]
