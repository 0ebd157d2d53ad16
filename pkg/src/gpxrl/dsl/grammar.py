"""Type tags, production rules and the base grammar."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .values import Action, Cell


class DSLError(Exception):
    pass


class UnknownSymbol(DSLError):
    pass


class TypeMismatch(DSLError):
    def __init__(self, message, path=(), expected=None, actual=None):
        super().__init__(message)
        self.path = tuple(path)
        self.expected = expected
        self.actual = actual


class ArityError(DSLError):
    pass


class UnsatisfiableType(DSLError):
    pass


class DuplicateName(DSLError):
    pass


class TypeTag(str, Enum):
    ACTION = "action"
    INT = "int"
    AGENT_DIRECTION = "agentDirection"
    MAP = "map"
    DIRECTION = "direction"
    OBJECT = "object"
    MAP_OBJECT = "mapObject"
    BOOL = "bool"

    def __str__(self):
        return self.value


T = TypeTag

IF_TYPES = (T.ACTION, T.OBJECT, T.MAP_OBJECT, T.DIRECTION, T.INT, T.BOOL)


@dataclass(frozen=True, eq=False)
class Rule:
    """A typed production rule.

    ``kind`` is one of ``builtin``, ``terminal``, ``parameter``,
    ``abstraction`` or ``hole``. Terminals carry their runtime ``value``;
    abstractions carry a ``body`` pattern whose holes are numbered from 0.
    """

    name: str
    param_types: tuple
    return_type: TypeTag
    kind: str = "builtin"
    value: object = None
    body: object = None
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def arity(self) -> int:
        return len(self.param_types)

    @property
    def is_terminal(self) -> bool:
        return not self.param_types

    def __repr__(self):
        return f"Rule({self.name!r})"

    def signature(self) -> str:
        return " -> ".join(str(t) for t in (*self.param_types, self.return_type))

    def __reduce__(self):
        # Base rules are singletons; keep identity across pickling.
        if BASE_RULES.get(self.name) is self:
            return (_base_rule, (self.name,))
        if self.kind == "hole":
            return (hole_rule, (self.value, self.return_type))
        return (Rule, (self.name, self.param_types, self.return_type, self.kind, self.value, self.body))


def _base_rule(name):
    return BASE_RULES[name]


def _terminal(name, tag, value, kind="terminal"):
    return Rule(name, (), tag, kind, value)


def _base_rules() -> list:
    rules = [
        _terminal("left-action", T.ACTION, Action.LEFT),
        _terminal("right-action", T.ACTION, Action.RIGHT),
        _terminal("forward-action", T.ACTION, Action.FORWARD),
    ]
    rules += [_terminal(str(i), T.INT, i) for i in range(6)]
    rules += [
        _terminal("$0", T.AGENT_DIRECTION, 0, "parameter"),
        _terminal("$1", T.MAP, 1, "parameter"),
    ]
    rules += [_terminal(f"direction-{i}", T.DIRECTION, i) for i in range(4)]
    rules += [
        _terminal("wall-obj", T.OBJECT, Cell.WALL),
        _terminal("empty-obj", T.OBJECT, Cell.EMPTY),
        _terminal("goal-obj", T.OBJECT, Cell.GOAL),
    ]
    rules += [Rule(f"if_{t.value}", (T.BOOL, t, t), t) for t in IF_TYPES]
    rules += [
        Rule("eq-direction?", (T.AGENT_DIRECTION, T.DIRECTION), T.BOOL),
        Rule("eq-obj?", (T.MAP_OBJECT, T.OBJECT), T.BOOL),
        Rule("get", (T.MAP, T.INT, T.INT), T.MAP_OBJECT),
        Rule("get-game-obj", (T.MAP_OBJECT,), T.OBJECT),
        Rule("not", (T.BOOL,), T.BOOL),
        Rule("and", (T.BOOL, T.BOOL), T.BOOL),
        Rule("or", (T.BOOL, T.BOOL), T.BOOL),
    ]
    return rules


BASE_RULES = {r.name: r for r in _base_rules()}


class Grammar:
    """An ordered, immutable set of rules with a per-type index.

    ``extend`` returns a new grammar; the rule objects themselves are shared.
    """

    def __init__(self, rules: Iterable[Rule]):
        self._rules = {}
        for rule in rules:
            if rule.name in self._rules:
                raise DuplicateName(f"rule {rule.name!r} already defined")
            self._rules[rule.name] = rule
        self._by_type = {tag: [] for tag in TypeTag}
        for rule in self._rules.values():
            self._by_type[rule.return_type].append(rule)
        self._min_depth = _min_depths(self._rules.values())

    def __contains__(self, name):
        return name in self._rules

    def __getitem__(self, name) -> Rule:
        try:
            return self._rules[name]
        except KeyError:
            raise UnknownSymbol(f"unknown symbol {name!r}") from None

    def __iter__(self):
        return iter(self._rules.values())

    def __len__(self):
        return len(self._rules)

    def get(self, name, default=None):
        return self._rules.get(name, default)

    def rules_for(self, tag: TypeTag) -> list:
        return self._by_type[tag]

    def min_depth(self, tag: TypeTag) -> float:
        """Smallest depth of a complete tree of type ``tag`` (inf if none)."""
        return self._min_depth[tag]

    def rule_min_depth(self, rule: Rule) -> float:
        if not rule.param_types:
            return 1
        return 1 + max(self._min_depth[t] for t in rule.param_types)

    @property
    def abstractions(self) -> list:
        return [r for r in self._rules.values() if r.kind == "abstraction"]

    def extend(self, *rules: Rule) -> "Grammar":
        return Grammar([*self._rules.values(), *rules])

    def dump(self) -> str:
        lines = []
        for rule in self._rules.values():
            params = ", ".join(str(t) for t in rule.param_types)
            lines.append(f"{rule.name}\t[{params}]\t{rule.return_type}\t{rule.kind}")
        return "\n".join(lines)


def _min_depths(rules) -> dict:
    depth = {tag: float("inf") for tag in TypeTag}
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule.kind == "hole":
                continue
            d = 1 if not rule.param_types else 1 + max(depth[t] for t in rule.param_types)
            if d < depth[rule.return_type]:
                depth[rule.return_type] = d
                changed = True
    return depth


def base_grammar() -> Grammar:
    return Grammar(BASE_RULES.values())


_HOLES = {}


def hole_rule(index: int, tag: TypeTag) -> Rule:
    """Interned placeholder rule ``#index`` of type ``tag``."""
    key = (index, tag)
    if key not in _HOLES:
        _HOLES[key] = Rule(f"#{index}", (), tag, "hole", index)
    return _HOLES[key]
