"""Type-directed random program generation from a uniform grammar."""

from __future__ import annotations

import random

from .ast import Node
from .grammar import Grammar, TypeTag, UnsatisfiableType


def feasible_rules(grammar: Grammar, tag: TypeTag, depth: int) -> list:
    """Rules of type ``tag`` that can be completed within ``depth`` levels."""
    if depth <= 1:
        return [r for r in grammar.rules_for(tag) if not r.param_types and r.kind != "hole"]
    return [
        r for r in grammar.rules_for(tag)
        if r.kind != "hole" and grammar.rule_min_depth(r) <= depth
    ]


def sample_program(grammar: Grammar, return_type: TypeTag, max_depth: int, rng: random.Random) -> Node:
    """Grow a random tree: at each node pick uniformly among feasible rules."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if grammar.min_depth(return_type) > max_depth:
        raise UnsatisfiableType(f"no {return_type} program of depth <= {max_depth} exists in the grammar")
    return grow(grammar, return_type, max_depth, rng)


def grow(grammar: Grammar, tag: TypeTag, depth: int, rng: random.Random) -> Node:
    """Like :func:`sample_program` without the up-front satisfiability check."""
    options = feasible_rules(grammar, tag, depth)
    if not options:
        raise UnsatisfiableType(f"no {tag} rule fits in depth {depth}")
    rule = options[rng.randrange(len(options))]
    return Node(rule, [grow(grammar, t, depth - 1, rng) for t in rule.param_types])
