"""Per-decision explanations and accuracy tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .dsl.ast import Node
from .dsl.interpreter import trace_evaluate
from .dsl.values import GRID_SIZE, HEADING_NAMES, Action, Cell, Observation
from .liblearn import expand_abstractions

_CELL_CHARS = {Cell.WALL: "#", Cell.EMPTY: ".", Cell.GOAL: "G"}
_OBJ_NAMES = {Cell.WALL: "wall-obj", Cell.EMPTY: "empty-obj", Cell.GOAL: "goal-obj"}


class EmptyReport(ValueError):
    pass


@dataclass(frozen=True)
class Highlight:
    cell: tuple
    compared: Cell | None = None
    outcome: bool | None = None

    def to_dict(self) -> dict:
        return {
            "x": self.cell[0],
            "y": self.cell[1],
            "compared": _OBJ_NAMES[self.compared] if self.compared is not None else None,
            "outcome": self.outcome,
        }


@dataclass(frozen=True)
class Explanation:
    action: Action
    highlighted_cells: tuple
    direction_checks: tuple
    program_text: str

    @property
    def used_direction_check(self):
        return self.direction_checks[0] if self.direction_checks else None

    def to_dict(self) -> dict:
        return {
            "action": self.action.value,
            "cells": [h.to_dict() for h in self.highlighted_cells],
            "direction_checks": [
                {"heading": h, "compared": d, "outcome": o} for h, d, o in self.direction_checks
            ],
            "program": self.program_text,
        }


def explain_decision(program: Node, obs: Observation, heading: int | None = None) -> Explanation:
    """Action plus the cells and comparisons on the executed path.

    The program is expanded first, so library calls never hide which cells
    were read.
    """
    expanded = expand_abstractions(program)
    trace = trace_evaluate(expanded, obs, heading)
    cell_checks = [c for c in trace.comparisons if c.kind == "cell"]
    highlights = []
    used = [False] * len(cell_checks)
    for xy in trace.accessed_cells:
        for i, comp in enumerate(cell_checks):
            if not used[i] and comp.subject == xy:
                used[i] = True
                highlights.append(Highlight(xy, comp.compared, comp.outcome))
                break
        else:
            highlights.append(Highlight(xy))
    directions = tuple(
        (c.subject, c.compared, c.outcome) for c in trace.comparisons if c.kind == "direction"
    )
    return Explanation(Action(trace.result), tuple(highlights), directions, expanded.text)


def render_ascii(explanation: Explanation, obs: Observation) -> str:
    """5x5 grid with the farthest row on top; inspected cells in brackets."""
    marked = {h.cell for h in explanation.highlighted_cells}
    lines = []
    for y in reversed(range(GRID_SIZE)):
        row = []
        for x in range(GRID_SIZE):
            ch = "A" if (x, y) == (2, 0) else _CELL_CHARS[obs.at(x, y)]
            row.append(f"[{ch}]" if (x, y) in marked else f" {ch} ")
        lines.append("".join(row))
    lines.append(f"heading: {HEADING_NAMES[obs.heading]}")
    lines.append(f"action: {explanation.action.value}")
    for h in explanation.highlighted_cells:
        if h.compared is None:
            lines.append(f"  read ({h.cell[0]},{h.cell[1]})")
        else:
            lines.append(f"  ({h.cell[0]},{h.cell[1]}) == {_OBJ_NAMES[h.compared]} -> {str(h.outcome).lower()}")
    for heading, direction, outcome in explanation.direction_checks:
        lines.append(f"  heading {heading} == direction-{direction} -> {str(outcome).lower()}")
    return "\n".join(lines)


# -- accuracy tables --------------------------------------------------------

METRICS = ("best_accuracy", "union_accuracy")


def _mean_std(values):
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def accuracy_report(reports: Sequence) -> list:
    """Rows ``(length, metric, mean, std, n_runs)`` over one or more runs.

    Accepts :class:`~gpxrl.gp.RunReport` objects or their dict form. Lengths
    a run never reached are left out of that run's contribution.
    """
    if not reports:
        raise EmptyReport("no run reports given")
    per_length = {}
    for report in reports:
        lengths = report["lengths"] if isinstance(report, dict) else [r.to_dict() for r in report.records]
        for rec in lengths:
            bucket = per_length.setdefault(rec["sequence_length"], {m: [] for m in METRICS})
            for m in METRICS:
                bucket[m].append(float(rec[m]))
    if not per_length:
        raise EmptyReport("run reports contain no sequence lengths")
    rows = []
    for length in sorted(per_length):
        for m in METRICS:
            mean, std = _mean_std(per_length[length][m])
            rows.append((length, m, mean, std, len(per_length[length][m])))
    return rows


def diff_report(rows_a: Sequence, rows_b: Sequence) -> list:
    """Per-length ``a - b`` of the mean of each metric (lengths in both only)."""
    b = {(r[0], r[1]): r for r in rows_b}
    out = []
    for length, metric, mean, std, n in rows_a:
        other = b.get((length, metric))
        if other is not None:
            out.append((length, metric, mean - other[2], math.hypot(std, other[3]), min(n, other[4])))
    return out


def rows_to_csv(rows: Sequence) -> str:
    lines = ["length,metric,mean,std,n_runs"]
    lines += [f"{length},{metric},{mean:.6f},{std:.6f},{n}" for length, metric, mean, std, n in rows]
    return "\n".join(lines) + "\n"


def explanations_to_json(explanations: Sequence[Explanation]) -> str:
    return json.dumps([e.to_dict() for e in explanations], indent=2) + "\n"
