"""Typed syntax tree shared by the parser, the differ and the pattern matcher.

Nodes sit at statement *and* expression granularity: an ``if`` statement, its
condition, the invocation inside the condition and the literal passed to that
invocation are all distinct nodes.
"""

from __future__ import annotations

import json
from typing import Iterator, Sequence

NODE_KINDS = frozenset(
    {
        "CompilationUnit",
        "Class",
        "Method",
        "Parameter",
        "Block",
        "If",
        "Condition",
        "Then",
        "Else",
        "Return",
        "Throw",
        "Break",
        "Continue",
        "Assignment",
        "LocalVariable",
        "Invocation",
        "BinaryOperator",
        "UnaryOperator",
        "FieldRead",
        "FieldWrite",
        "VariableRead",
        "VariableWrite",
        "ArrayAccess",
        "Literal",
        "TypeReference",
        "While",
        "For",
    }
)


class NodeNotInTree(ValueError):
    pass


class AstNode:
    """One tree node.

    ``id`` and ``parent`` are assigned by :func:`finalize`; until then the node
    is a loose subtree. After finalization the tree must not be mutated.
    """

    __slots__ = ("id", "kind", "value", "children", "span", "parent", "_height", "_size")

    def __init__(
        self,
        kind: str,
        value: str = "",
        children: Sequence["AstNode"] = (),
        span: tuple[int, int] = (0, 0),
    ):
        if kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        self.id = -1
        self.kind = kind
        self.value = value
        self.children = tuple(children)
        self.span = span
        self.parent: AstNode | None = None
        self._height = -1
        self._size = -1

    def __repr__(self) -> str:
        return f"AstNode({self.kind}, {self.value!r}, id={self.id})"

    @property
    def label(self) -> tuple[str, str]:
        return (self.kind, self.value)

    @property
    def height(self) -> int:
        if self._height < 0:
            self._height = 1 + max((c.height for c in self.children), default=0)
        return self._height

    @property
    def size(self) -> int:
        if self._size < 0:
            self._size = 1 + sum(c.size for c in self.children)
        return self._size

    @property
    def depth(self) -> int:
        d = 0
        p = self.parent
        while p is not None:
            d += 1
            p = p.parent
        return d


def finalize(root: AstNode) -> AstNode:
    """Assign dense pre-order ids and parent links. Returns ``root``."""
    root.parent = None
    counter = 0
    stack = [root]
    while stack:
        node = stack.pop()
        node.id = counter
        counter += 1
        for child in reversed(node.children):
            child.parent = node
            stack.append(child)
    return root


def preorder(root: AstNode) -> Iterator[AstNode]:
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def postorder(root: AstNode) -> Iterator[AstNode]:
    for child in root.children:
        yield from postorder(child)
    yield root


def node_height(n: AstNode) -> int:
    """1 for a leaf, otherwise 1 + the tallest child."""
    if not n.children:
        return 1
    return 1 + max(node_height(c) for c in n.children)


def ancestors_within(n: AstNode, tree: AstNode, d: int) -> list[AstNode]:
    """Parent chain of ``n``, nearest first, truncated to ``d`` entries."""
    if d < 1:
        raise ValueError("distance must be >= 1")
    chain = []
    top = n
    while top.parent is not None:
        chain.append(top.parent)
        top = top.parent
    if top is not tree:
        raise NodeNotInTree(f"{n!r} is not in the given tree")
    return chain[:d]


def serialize_tree(root: AstNode) -> str:
    """Indented dump, one ``Kind: "value" [start,end)`` line per node."""
    lines = []

    def walk(node: AstNode, depth: int) -> None:
        value = json.dumps(node.value, ensure_ascii=False)
        lines.append(f"{'  ' * depth}{node.kind}: {value} [{node.span[0]},{node.span[1]})")
        for child in node.children:
            walk(child, depth + 1)

    walk(root, 0)
    return "\n".join(lines)


def same_tree(a: AstNode, b: AstNode) -> bool:
    """Structural equality on (kind, value, child order); spans ignored."""
    if a.kind != b.kind or a.value != b.value or len(a.children) != len(b.children):
        return False
    return all(same_tree(x, y) for x, y in zip(a.children, b.children))
