"""S-expression reading and printing for DSL programs."""

from __future__ import annotations

import re

from .ast import Node
from .grammar import ArityError, DSLError, Grammar, TypeMismatch, TypeTag, UnknownSymbol, hole_rule

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


class ParseError(DSLError):
    pass


def strip_comment(line: str) -> str:
    return line.split(";", 1)[0]


def tokenize(text: str) -> list:
    text = "\n".join(strip_comment(line) for line in text.splitlines())
    return _TOKEN.findall(text)


def read_sexpr(text: str):
    """Read exactly one S-expression into nested lists of symbol strings."""
    tokens = tokenize(text)
    if not tokens:
        raise ParseError("empty program text")
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ParseError("unexpected ')'")
        if tok != "(":
            return tok
        items = []
        while True:
            if pos >= len(tokens):
                raise ParseError("missing ')'")
            if tokens[pos] == ")":
                pos += 1
                return items
            items.append(read())

    expr = read()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens after program: {' '.join(tokens[pos:])}")
    return expr


def parse_program(
    text: str,
    grammar: Grammar,
    check: bool = True,
    allow_holes: bool = False,
    expected: TypeTag | None = None,
) -> Node:
    """Parse ``text`` into a program tree.

    With ``check`` set (the default) type errors raise :class:`TypeMismatch`;
    otherwise ill-typed trees are returned for :func:`type_check` to report.
    A generic ``if`` is resolved to the typed ``if_T`` it must be, and
    ``(eq-obj? <object> <mapObject>)`` is normalized to the canonical order.
    """
    return _Builder(grammar, check, allow_holes).build(read_sexpr(text), expected, ())


def print_program(node: Node) -> str:
    return node.text


class _Builder:
    def __init__(self, grammar, check, allow_holes):
        self.grammar = grammar
        self.check = check
        self.allow_holes = allow_holes

    def build(self, expr, expected, path) -> Node:
        if isinstance(expr, str):
            node = self.atom(expr, expected, path)
        else:
            node = self.apply(expr, expected, path)
        if self.check and expected is not None and node.return_type != expected:
            raise TypeMismatch(
                f"at {list(path)}: expected {expected}, got {node.return_type} from {node.rule.name}",
                path, expected, node.return_type,
            )
        return node

    def atom(self, symbol, expected, path) -> Node:
        if symbol.startswith("#") and symbol[1:].isdigit():
            if not self.allow_holes:
                raise UnknownSymbol(f"hole {symbol} outside an abstraction body")
            if expected is None:
                raise ParseError(f"cannot infer the type of hole {symbol} at {list(path)}")
            return Node(hole_rule(int(symbol[1:]), expected))
        rule = self.grammar[symbol]
        if rule.param_types:
            raise ArityError(f"{symbol} takes {rule.arity} arguments but is used as a constant")
        return Node(rule)

    def apply(self, expr, expected, path) -> Node:
        if not expr:
            raise ParseError(f"empty application at {list(path)}")
        head, args = expr[0], expr[1:]
        if not isinstance(head, str):
            raise ParseError(f"application head must be a symbol at {list(path)}")
        if head == "if":
            head = self._resolve_if(args, expected, path)
        rule = self.grammar[head]
        if len(args) != rule.arity:
            raise ArityError(
                f"{head} expects {rule.arity} arguments, got {len(args)} at {list(path)}"
            )
        if head == "eq-obj?" and self._flipped_eq_obj(args, path):
            args = [args[1], args[0]]
        children = [
            self.build(arg, tag, path + (i,))
            for i, (arg, tag) in enumerate(zip(args, rule.param_types))
        ]
        return Node(rule, children)

    def _resolve_if(self, args, expected, path) -> str:
        tag = expected
        if tag is None:
            if len(args) != 3:
                raise ArityError(f"if expects 3 arguments, got {len(args)} at {list(path)}")
            tag = self.build(args[1], None, path + (1,)).return_type
        return f"if_{tag.value}"

    def _flipped_eq_obj(self, args, path) -> bool:
        first = args[0]
        if isinstance(first, str):
            rule = self.grammar.get(first)
            return rule is not None and rule.return_type == TypeTag.OBJECT
        try:
            return self.build(first, None, path).return_type == TypeTag.OBJECT
        except DSLError:
            return False


def read_program_file(text: str) -> list:
    """Program sources from a file body: one per line, ``;`` comments."""
    lines = []
    for line in text.splitlines():
        body = strip_comment(line).strip()
        if body:
            lines.append(body)
    return lines


def parse_program_file(text: str, grammar: Grammar) -> list:
    return [parse_program(src, grammar) for src in read_program_file(text)]
