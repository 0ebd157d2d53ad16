"""Immutable program trees."""

from __future__ import annotations

from typing import Iterator

from .grammar import Rule, TypeTag


class Node:
    """One production-rule application; a whole program is its root node.

    Nodes are immutable and compare structurally by their canonical text.
    ``size`` counts rule applications and ``depth`` counts nodes on the
    longest root-to-leaf path.
    """

    __slots__ = ("rule", "children", "size", "depth", "_text", "_compiled")

    def __init__(self, rule: Rule, children=()):
        self.rule = rule
        self.children = tuple(children)
        size, depth = 1, 0
        for child in self.children:
            size += child.size
            if child.depth > depth:
                depth = child.depth
        self.size = size
        self.depth = depth + 1
        self._text = None
        self._compiled = None

    @property
    def return_type(self) -> TypeTag:
        return self.rule.return_type

    @property
    def text(self) -> str:
        if self._text is None:
            if self.children:
                self._text = "(" + " ".join([self.rule.name] + [c.text for c in self.children]) + ")"
            else:
                self._text = self.rule.name
        return self._text

    def __str__(self):
        return self.text

    def __repr__(self):
        return f"Node({self.text})"

    def __eq__(self, other):
        return isinstance(other, Node) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __reduce__(self):
        return (Node, (self.rule, self.children))

    def walk(self, path=()) -> Iterator[tuple]:
        """Yield ``(path, node)`` in pre-order."""
        stack = [(path, self)]
        while stack:
            p, node = stack.pop()
            yield p, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((p + (i,), node.children[i]))

    def subtree(self, path) -> "Node":
        node = self
        for i in path:
            node = node.children[i]
        return node

    def replace(self, path, new: "Node") -> "Node":
        if not path:
            return new
        i = path[0]
        children = list(self.children)
        children[i] = children[i].replace(path[1:], new)
        return Node(self.rule, children)

    def holes(self) -> list:
        return [n.rule for _, n in self.walk() if n.rule.kind == "hole"]

    def uses_abstractions(self) -> bool:
        return any(n.rule.kind == "abstraction" for _, n in self.walk())


Program = Node
