"""Static well-typedness checks; violations are returned, not raised."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Node
from .grammar import TypeTag


@dataclass(frozen=True)
class Violation:
    path: tuple
    expected: object
    actual: object
    message: str


def type_check(node: Node, expected: TypeTag | None = None) -> list:
    violations = []
    if expected is not None and node.return_type != expected:
        violations.append(Violation((), expected, node.return_type, f"root: expected {expected}, got {node.return_type}"))
    for path, n in node.walk():
        rule = n.rule
        if len(n.children) != rule.arity:
            violations.append(Violation(
                path, rule.arity, len(n.children),
                f"{rule.name} at {list(path)}: expected {rule.arity} children, got {len(n.children)}",
            ))
            continue
        for i, (child, tag) in enumerate(zip(n.children, rule.param_types)):
            if child.return_type != tag:
                violations.append(Violation(
                    path + (i,), tag, child.return_type,
                    f"{rule.name} argument {i} at {list(path + (i,))}: expected {tag}, got {child.return_type}",
                ))
    return violations


def is_well_typed(node: Node, expected: TypeTag | None = None) -> bool:
    return not type_check(node, expected)
