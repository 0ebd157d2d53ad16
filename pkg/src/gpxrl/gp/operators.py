"""Type-preserving mutation and one-point crossover on program trees."""

from __future__ import annotations

import random

from ..dsl.ast import Node
from ..dsl.grammar import Grammar
from ..dsl.sampling import grow, feasible_rules


def mutate(program: Node, grammar: Grammar, p_mutation: float, rng: random.Random,
           max_depth: int = 6) -> Node:
    """Visit nodes in pre-order; each is picked with ``p_mutation``.

    A picked node gets a uniformly chosen rule of the same return type. Its
    children survive when the new rule's parameter types equal theirs,
    otherwise fresh subtrees are grown below it. Descendants of a picked node
    are not visited.
    """
    if p_mutation <= 0.0:
        return program
    return _mutate(program, grammar, p_mutation, rng, max_depth)


def _mutate(node, grammar, p, rng, max_depth):
    if rng.random() < p:
        options = feasible_rules(grammar, node.return_type, max_depth)
        rule = options[rng.randrange(len(options))]
        if rule.param_types == tuple(c.return_type for c in node.children):
            return Node(rule, node.children)
        return Node(rule, [grow(grammar, t, max_depth - 1, rng) for t in rule.param_types])
    if not node.children:
        return node
    children = [_mutate(c, grammar, p, rng, max_depth) for c in node.children]
    if all(a is b for a, b in zip(children, node.children)):
        return node
    return Node(node.rule, children)


def crossover(a: Node, b: Node, p_crossover: float, rng: random.Random) -> tuple:
    """Swap one subtree of ``a`` with a same-typed subtree of ``b``.

    Nodes of ``a`` are marked independently with ``p_crossover``; one marked
    node is picked uniformly, then a uniformly chosen node of ``b`` with the
    same return type. With nothing marked the parents come back unchanged.
    """
    if p_crossover <= 0.0:
        return a, b
    marked = [(path, n) for path, n in a.walk() if rng.random() < p_crossover]
    if not marked:
        return a, b
    path_a, node_a = marked[rng.randrange(len(marked))]
    candidates = [(path, n) for path, n in b.walk() if n.return_type == node_a.return_type]
    if not candidates:
        return a, b
    path_b, node_b = candidates[rng.randrange(len(candidates))]
    return a.replace(path_a, node_b), b.replace(path_b, node_a)
