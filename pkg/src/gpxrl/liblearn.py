"""Library learning: mine typed abstractions from a corpus of programs,
register them as grammar rules and rewrite programs to call them.

The miner is a corpus-guided top-down search. A pattern starts as a single
concrete rule over holes; the first open hole (in pre-order) is either
refined with a rule that occurs at that position in at least two matching
locations, or frozen as a parameter. Patterns are scored by

    utility = (occurrences - 1) * (concrete_size - 1)

where occurrences are non-overlapping matches. Parameters (``$0``/``$1``) are
never baked into a body, so abstractions stay closed terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dsl.ast import Node
from .dsl.grammar import DSLError, DuplicateName, Grammar, Rule, TypeTag, hole_rule
from .dsl.parser import parse_program, read_program_file
from .dsl.typecheck import type_check

MAX_ARITY = 4


@dataclass(frozen=True)
class Abstraction:
    name: str
    body: Node

    @property
    def hole_types(self) -> tuple:
        holes = {}
        for _, n in self.body.walk():
            if n.rule.kind == "hole":
                holes.setdefault(n.rule.value, n.rule.return_type)
        return tuple(holes[i] for i in sorted(holes))

    @property
    def arity(self) -> int:
        return len(self.hole_types)

    @property
    def return_type(self) -> TypeTag:
        return self.body.return_type

    @property
    def concrete_size(self) -> int:
        return sum(1 for _, n in self.body.walk() if n.rule.kind != "hole")

    def definition(self) -> str:
        return f"{self.name} = {self.body.text}"

    def __str__(self):
        return self.definition()


@dataclass
class MatchSet:
    body: Node
    occurrences: list  # (program index, path, bindings)
    utility: float


# -- matching ------------------------------------------------------------


def match(pattern: Node, node: Node, bindings: dict | None = None):
    """Bind holes of ``pattern`` against ``node``; None when they differ."""
    if bindings is None:
        bindings = {}
    rule = pattern.rule
    if rule.kind == "hole":
        if node.return_type != rule.return_type:
            return None
        prev = bindings.get(rule.value)
        if prev is not None and prev != node:
            return None
        bindings[rule.value] = node
        return bindings
    if node.rule is not rule and node.rule.name != rule.name:
        return None
    for p, n in zip(pattern.children, node.children):
        if match(p, n, bindings) is None:
            return None
    return bindings


def substitute(body: Node, args: Sequence[Node]) -> Node:
    if body.rule.kind == "hole":
        return args[body.rule.value]
    if not body.children:
        return body
    return Node(body.rule, [substitute(c, args) for c in body.children])


def expand_abstractions(node: Node) -> Node:
    """Inline every abstraction call; the result uses base rules only."""
    if node.rule.kind == "abstraction":
        return expand_abstractions(substitute(node.rule.body, node.children))
    if not node.children:
        return node
    children = [expand_abstractions(c) for c in node.children]
    if all(a is b for a, b in zip(children, node.children)):
        return node
    return Node(node.rule, children)


def rewrite_program(node: Node, rule: Rule) -> Node:
    """Replace non-overlapping occurrences of ``rule.body`` top-down."""
    bindings = match(rule.body, node)
    if bindings is not None:
        args = [rewrite_program(bindings[i], rule) for i in range(rule.arity)]
        return Node(rule, args)
    if not node.children:
        return node
    children = [rewrite_program(c, rule) for c in node.children]
    if all(a is b for a, b in zip(children, node.children)):
        return node
    return Node(node.rule, children)


def rewrite_corpus(corpus: Iterable[Node], rule: Rule) -> list:
    return [rewrite_program(p, rule) for p in corpus]


# -- registration ---------------------------------------------------------


def next_name(grammar: Grammar) -> str:
    k = 0
    while f"fn_{k}" in grammar:
        k += 1
    return f"fn_{k}"


def register_abstraction(grammar: Grammar, abstraction: Abstraction) -> Grammar:
    """Add ``abstraction`` as a cached production rule; returns a new grammar."""
    if abstraction.name in grammar:
        raise DuplicateName(f"rule {abstraction.name!r} already defined")
    body = abstraction.body
    if body.rule.kind == "hole":
        raise DSLError("an abstraction body cannot be a bare hole")
    if any(n.rule.kind == "parameter" for _, n in body.walk()):
        raise DSLError("abstraction bodies must abstract $0/$1 as holes")
    indices = sorted({h.value for h in body.holes()})
    if indices != list(range(len(indices))):
        raise DSLError(f"holes of {abstraction.name} must be numbered 0..k-1, got {indices}")
    violations = type_check(body)
    if violations:
        raise DSLError(f"ill-typed abstraction body: {violations[0].message}")
    rule = Rule(abstraction.name, abstraction.hole_types, body.return_type, "abstraction", body=body)
    return grammar.extend(rule)


def abstraction_of(rule: Rule) -> Abstraction:
    return Abstraction(rule.name, rule.body)


def canonical_body(body: Node) -> Node:
    """Renumber holes by first occurrence in pre-order."""
    order = {}
    for _, n in body.walk():
        if n.rule.kind == "hole" and n.rule.value not in order:
            order[n.rule.value] = len(order)

    def renumber(n):
        if n.rule.kind == "hole":
            return Node(hole_rule(order[n.rule.value], n.rule.return_type))
        if not n.children:
            return n
        return Node(n.rule, [renumber(c) for c in n.children])

    return renumber(body)


# -- mining ---------------------------------------------------------------


class _Search:
    def __init__(self, corpus, size_limit, max_arity, exclude):
        self.size_limit = size_limit
        self.max_arity = max_arity
        self.exclude = exclude
        self.locations = [
            (i, path, node)
            for i, prog in enumerate(corpus)
            for path, node in prog.walk()
            if node.rule.kind not in ("hole", "parameter")
        ]
        self.best_key = None
        self.best_body = None

    def run(self):
        groups = _group(self.locations, ())
        for rule, locs in sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0].name)):
            if len(locs) < 2:
                continue
            root = Node(rule, [Node(hole_rule(0, t)) for t in rule.param_types])
            open_holes = [(j,) for j in range(rule.arity)]
            self.visit(root, open_holes, 0, 1, locs)
        return self.best_key, self.best_body

    def visit(self, pattern, open_holes, frozen, concrete, locs):
        if frozen > self.max_arity:
            return
        # occurrences only shrink and concrete size stays below the limit
        if self.best_key is not None and (len(locs) - 1) * (self.size_limit - 2) < self.best_key[0]:
            return
        if frozen + len(open_holes) <= self.max_arity and concrete >= 2:
            self.score(pattern, concrete, locs)
        if not open_holes:
            return
        hole_path, rest = open_holes[0], open_holes[1:]
        if concrete + 1 < self.size_limit:
            groups = _group(locs, hole_path)
            for rule, sub in sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0].name)):
                if len(sub) < 2 or rule.kind in ("parameter", "hole"):
                    continue
                refined = pattern.replace(
                    hole_path,
                    Node(rule, [Node(hole_rule(0, t)) for t in rule.param_types]),
                )
                new_holes = [hole_path + (j,) for j in range(rule.arity)]
                self.visit(refined, new_holes + rest, frozen, concrete + 1, sub)
        self.visit(pattern, rest, frozen + 1, concrete, locs)

    def score(self, pattern, concrete, locs):
        body = _number_holes(pattern)
        if body.text in self.exclude:
            return
        utility = (_non_overlapping(body, locs) - 1) * (concrete - 1)
        if utility <= 0:
            return
        # ties: larger body, then shorter text, then lexicographic
        key = (utility, concrete, -len(body.text), body.text)
        if self.best_key is None or key > self.best_key:
            self.best_key, self.best_body = key, body


def _group(locs, path) -> dict:
    groups = {}
    for loc in locs:
        sub = loc[2].subtree(path)
        groups.setdefault(sub.rule, []).append(loc)
    return groups


def _number_holes(pattern: Node) -> Node:
    counter = iter(range(1 << 30))

    def renumber(n):
        if n.rule.kind == "hole":
            return Node(hole_rule(next(counter), n.rule.return_type))
        if not n.children:
            return n
        return Node(n.rule, [renumber(c) for c in n.children])

    return renumber(pattern)


def _concrete_paths(body: Node) -> list:
    return [p for p, n in body.walk() if n.rule.kind != "hole"]


def _non_overlapping(body: Node, locs) -> int:
    concrete = _concrete_paths(body)
    covered = set()
    count = 0
    # locations are produced in per-program pre-order, which is the greedy order
    for prog, path, node in locs:
        if (prog, path) in covered:
            continue
        if match(body, node) is None:
            continue
        count += 1
        for p in concrete:
            covered.add((prog, path + p))
    return count


def mine_step(corpus: Sequence[Node], size_limit: int = 10, max_arity: int = MAX_ARITY,
              exclude: Iterable[str] = ()) -> MatchSet | None:
    """Best-utility pattern in ``corpus`` (None if no pattern compresses)."""
    if not corpus:
        return None
    key, body = _Search(corpus, size_limit, max_arity, set(exclude)).run()
    if body is None:
        return None
    probe = Rule("_probe", tuple(h.return_type for h in _ordered_holes(body)), body.return_type,
                 "abstraction", body=body)
    occurrences = []
    for i, prog in enumerate(corpus):
        _collect(prog, probe, i, (), occurrences)
    return MatchSet(body, occurrences, key[0])


def _ordered_holes(body):
    holes = {}
    for _, n in body.walk():
        if n.rule.kind == "hole":
            holes.setdefault(n.rule.value, n.rule)
    return [holes[i] for i in sorted(holes)]


def _collect(node, rule, prog, path, out):
    bindings = match(rule.body, node)
    if bindings is not None:
        out.append((prog, path, tuple(bindings[i] for i in range(rule.arity))))
        hole_paths = {n.rule.value: p for p, n in rule.body.walk() if n.rule.kind == "hole"}
        for i in range(rule.arity):
            _collect(bindings[i], rule, prog, path + hole_paths[i], out)
        return
    for j, child in enumerate(node.children):
        _collect(child, rule, prog, path + (j,), out)


def mine_abstractions(
    corpus: Sequence[Node],
    size_limit: int = 10,
    count_limit: int = 5,
    grammar: Grammar | None = None,
) -> tuple:
    """Greedily mine up to ``count_limit`` abstractions.

    After each accepted abstraction the corpus is rewritten to use it, so
    later abstractions may call earlier ones. Returns ``(abstractions,
    grammar, rewritten_corpus)``; the grammar includes the new rules.
    """
    from .dsl.grammar import base_grammar

    if size_limit < 2 or count_limit < 1:
        raise ValueError("size_limit must be >= 2 and count_limit >= 1")
    grammar = grammar if grammar is not None else base_grammar()
    corpus = list(dict.fromkeys(corpus))
    found = []
    existing = {canonical_body(r.body).text for r in grammar.abstractions}
    for _ in range(count_limit):
        best = mine_step(corpus, size_limit, exclude=existing)
        if best is None:
            break
        abstraction = Abstraction(next_name(grammar), best.body)
        grammar = register_abstraction(grammar, abstraction)
        rule = grammar[abstraction.name]
        corpus = list(dict.fromkeys(rewrite_corpus(corpus, rule)))
        existing.add(best.body.text)
        found.append(abstraction)
    return found, grammar, corpus


# -- library files --------------------------------------------------------

_DEF = re.compile(r"^\s*(fn_\d+)\s*=\s*(.+)$")


def dump_library(grammar: Grammar) -> str:
    lines = [abstraction_of(r).definition() for r in grammar.abstractions]
    return "\n".join(lines) + ("\n" if lines else "")


def load_library(text: str, grammar: Grammar | None = None) -> Grammar:
    """Extend ``grammar`` with ``fn_k = <body>`` definitions, in order."""
    from .dsl.grammar import base_grammar

    grammar = grammar if grammar is not None else base_grammar()
    for line in read_program_file(text):
        m = _DEF.match(line)
        if not m:
            raise DSLError(f"bad library line: {line!r}")
        body = parse_program(m.group(2), grammar, allow_holes=True)
        grammar = register_abstraction(grammar, Abstraction(m.group(1), body))
    return grammar
