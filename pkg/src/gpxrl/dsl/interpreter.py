"""Evaluation of DSL programs.

Two evaluators share one semantics:

* :func:`evaluate` compiles a tree into nested closures once (memoized on the
  node) and runs abstraction calls through their per-rule result cache.
* :func:`trace_evaluate` walks the tree, inlining abstraction calls lazily, and
  records every executed ``get`` and comparison. Traces therefore describe the
  expanded program, whatever library calls it contains.

``if_T``, ``and`` and ``or`` short-circuit in both. Grid indices are clamped
into 0..4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import Node
from .values import GRID_SIZE, Observation

MAX_INDEX = GRID_SIZE - 1
CACHE_LIMIT = 200_000
_MISSING = object()


class EvaluationError(Exception):
    pass


def _const(value):
    return lambda o, h, e, c: value


def _compile(node: Node):
    fn = node._compiled
    if fn is not None:
        return fn
    rule = node.rule
    name = rule.name
    kind = rule.kind
    kids = [_compile(ch) for ch in node.children]

    if kind == "terminal":
        fn = _const(rule.value)
    elif kind == "parameter":
        fn = (lambda o, h, e, c: h) if name == "$0" else (lambda o, h, e, c: o)
    elif kind == "hole":
        idx = rule.value
        fn = lambda o, h, e, c: e[idx]
    elif kind == "abstraction":
        fn = _compile_call(rule, kids)
    elif name.startswith("if_"):
        cond, then, other = kids
        fn = lambda o, h, e, c: then(o, h, e, c) if cond(o, h, e, c) else other(o, h, e, c)
    elif name == "and":
        a, b = kids
        fn = lambda o, h, e, c: a(o, h, e, c) and b(o, h, e, c)
    elif name == "or":
        a, b = kids
        fn = lambda o, h, e, c: a(o, h, e, c) or b(o, h, e, c)
    elif name == "not":
        (a,) = kids
        fn = lambda o, h, e, c: not a(o, h, e, c)
    elif name == "eq-direction?":
        a, b = kids
        fn = lambda o, h, e, c: a(o, h, e, c) == b(o, h, e, c)
    elif name == "eq-obj?":
        a, b = kids
        fn = lambda o, h, e, c: a(o, h, e, c)[0] is b(o, h, e, c)
    elif name == "get-game-obj":
        (a,) = kids
        fn = lambda o, h, e, c: a(o, h, e, c)[0]
    elif name == "get":
        m, xf, yf = kids

        def fn(o, h, e, c):
            grid = m(o, h, e, c)
            x = xf(o, h, e, c)
            y = yf(o, h, e, c)
            if x > MAX_INDEX:
                x = MAX_INDEX
            if y > MAX_INDEX:
                y = MAX_INDEX
            return (grid.cells[y * GRID_SIZE + x], x, y)
    else:
        raise EvaluationError(f"no semantics for rule {name!r}")
    node._compiled = fn
    return fn


def _compile_call(rule, kids):
    body = _compile(rule.body)
    cache = rule.cache

    def call(o, h, e, c):
        args = tuple([k(o, h, e, c) for k in kids])
        if not c:
            return body(o, h, args, c)
        result = cache.get(args, _MISSING)
        if result is _MISSING:
            result = body(o, h, args, c)
            if len(cache) >= CACHE_LIMIT:
                cache.clear()
            cache[args] = result
        return result

    return call


def compile_program(node: Node, use_cache: bool = True):
    """Return ``f(obs, heading) -> value`` for repeated evaluation."""
    fn = _compile(node)
    return lambda obs, heading=None: fn(obs, obs.heading if heading is None else heading, (), use_cache)


def evaluate(node: Node, obs: Observation, heading: int | None = None, use_cache: bool = True):
    """Value of ``node`` with ``$1`` bound to ``obs`` and ``$0`` to ``heading``
    (the observation's own heading when omitted)."""
    if heading is None:
        heading = obs.heading
    return _compile(node)(obs, heading, (), use_cache)


@dataclass(frozen=True)
class Comparison:
    """One executed ``eq-obj?`` (subject is a cell) or ``eq-direction?``
    (subject is the agent heading)."""

    kind: str
    subject: object
    compared: object
    outcome: bool


@dataclass
class EvalTrace:
    accessed_cells: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)
    result: object = None


def trace_evaluate(node: Node, obs: Observation, heading: int | None = None) -> EvalTrace:
    if heading is None:
        heading = obs.heading
    trace = EvalTrace()
    trace.result = _Tracer(obs, heading, trace).run(node, ())
    return trace


class _Tracer:
    def __init__(self, obs, heading, trace):
        self.obs = obs
        self.heading = heading
        self.trace = trace

    def run(self, node, env):
        rule = node.rule
        kind = rule.kind
        name = rule.name
        ch = node.children
        if kind == "terminal":
            return rule.value
        if kind == "parameter":
            return self.heading if name == "$0" else self.obs
        if kind == "hole":
            arg, arg_env = env[rule.value]
            return self.run(arg, arg_env)
        if kind == "abstraction":
            return self.run(rule.body, tuple((c, env) for c in ch))
        if name.startswith("if_"):
            return self.run(ch[1] if self.run(ch[0], env) else ch[2], env)
        if name == "and":
            return bool(self.run(ch[0], env)) and bool(self.run(ch[1], env))
        if name == "or":
            return bool(self.run(ch[0], env)) or bool(self.run(ch[1], env))
        if name == "not":
            return not self.run(ch[0], env)
        if name == "eq-direction?":
            heading = self.run(ch[0], env)
            direction = self.run(ch[1], env)
            outcome = heading == direction
            self.trace.comparisons.append(Comparison("direction", heading, direction, outcome))
            return outcome
        if name == "eq-obj?":
            cell, x, y = self.run(ch[0], env)
            obj = self.run(ch[1], env)
            outcome = cell is obj
            self.trace.comparisons.append(Comparison("cell", (x, y), obj, outcome))
            return outcome
        if name == "get-game-obj":
            return self.run(ch[0], env)[0]
        if name == "get":
            grid = self.run(ch[0], env)
            x = min(self.run(ch[1], env), MAX_INDEX)
            y = min(self.run(ch[2], env), MAX_INDEX)
            self.trace.accessed_cells.append((x, y))
            return (grid.cells[y * GRID_SIZE + x], x, y)
        raise EvaluationError(f"no semantics for rule {name!r}")
