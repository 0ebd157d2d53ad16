"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

from .dsl.values import GRID_SIZE, Action, Cell, Observation

N_CELLS = GRID_SIZE * GRID_SIZE
N_FEATURES = N_CELLS + 1
# numeric cell codes used in feature matrices
CELL_CODES = (Cell.WALL, Cell.EMPTY, Cell.GOAL)


def observation_to_row(obs: Observation) -> np.ndarray:
    """25 cell codes (0 wall, 1 empty, 2 goal) followed by the heading."""
    row = np.empty(N_FEATURES, dtype=np.int64)
    row[:N_CELLS] = [CELL_CODES.index(c) for c in obs.cells]
    row[N_CELLS] = obs.heading
    return row


def observations_to_array(observations) -> np.ndarray:
    if not observations:
        return np.empty((0, N_FEATURES), dtype=np.int64)
    return np.stack([observation_to_row(o) for o in observations])


def check_observations(X) -> list:
    """Return a list of :class:`Observation` from observations or a feature matrix.

    A matrix must have shape ``(n, 26)`` with integer cell codes in 0..2 and a
    heading in 0..3 in the last column.
    """
    if isinstance(X, Observation):
        raise TypeError("expected a sequence of observations, got a single Observation")
    if isinstance(X, (list, tuple)) and X and all(isinstance(o, Observation) for o in X):
        return list(X)
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[1] != N_FEATURES:
        raise ValueError(f"expected shape (n_samples, {N_FEATURES}), got {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("need at least one observation")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError("feature matrix must be numeric")
    as_int = arr.astype(np.int64)
    if not np.array_equal(as_int, arr):
        raise ValueError("feature matrix must hold integer codes")
    cells, headings = as_int[:, :N_CELLS], as_int[:, N_CELLS]
    if cells.min() < 0 or cells.max() > 2:
        raise ValueError("cell codes must be 0 (wall), 1 (empty) or 2 (goal)")
    if headings.min() < 0 or headings.max() > 3:
        raise ValueError("headings must be in 0..3")
    return [
        Observation(tuple(CELL_CODES[c] for c in row), int(h))
        for row, h in zip(cells.tolist(), headings.tolist())
    ]


def check_actions(y, n_samples: int | None = None) -> list:
    """Coerce labels (``Action`` members or their names) to a list of ``Action``."""
    arr = np.asarray(y, dtype=object)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array of actions, got shape {arr.shape}")
    if n_samples is not None and len(arr) != n_samples:
        raise ValueError(f"got {len(arr)} actions for {n_samples} observations")
    try:
        return [a if isinstance(a, Action) else Action(str(a)) for a in arr]
    except ValueError as exc:
        raise ValueError(f"unknown action label: {exc}") from None


def check_groups(groups, n_samples: int) -> np.ndarray:
    if groups is None:
        return np.zeros(n_samples, dtype=np.int64)
    arr = np.asarray(groups)
    if arr.shape != (n_samples,):
        raise ValueError(f"groups must have shape ({n_samples},), got {arr.shape}")
    return arr
