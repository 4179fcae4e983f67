"""AST node type and traversal helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .source import Span

FUNCTION_KINDS = frozenset({"FunctionDecl", "FunctionExpr", "Arrow"})
MEMBER_KINDS = frozenset({"Member", "ComputedMember"})
CALL_KINDS = frozenset({"Call", "New"})


@dataclass(eq=False)
class Node:
    kind: str
    children: list["Node"]
    start: int
    end: int
    span: Span
    snippet: str
    value: Optional[str] = None
    parent: Optional["Node"] = field(default=None, repr=False)

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal (source order)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def first(self, kind: str) -> Optional["Node"]:
        for child in self.children:
            if child.kind == kind:
                return child
        return None

    def shape(self) -> tuple:
        """Position-free structural fingerprint, used for round-trip checks."""
        return (self.kind, self.value, tuple(c.shape() for c in self.children))

    def __repr__(self) -> str:
        sl, sc, el, ec = self.span
        val = f" {self.value!r}" if self.value is not None else ""
        return f"<{self.kind}{val} {sl}:{sc}-{el}:{ec}>"


# Accessors for the fixed child layouts produced by the parser.

def fn_name(fn: Node) -> Optional[Node]:
    return fn.first("BindingIdent")


def fn_params(fn: Node) -> list[Node]:
    params = fn.first("Params")
    return params.children if params is not None else []


def fn_body(fn: Node) -> Node:
    return fn.children[-1]


def call_callee(call: Node) -> Node:
    return call.children[0]


def call_args(call: Node) -> list[Node]:
    return call.children[1:]


def member_object(member: Node) -> Node:
    return member.children[0]


def strip_parens(node: Node) -> Node:
    while node.kind == "Paren":
        node = node.children[0]
    return node


def enclosing_function(node: Node) -> Optional[Node]:
    cur = node.parent
    while cur is not None and cur.kind not in FUNCTION_KINDS:
        cur = cur.parent
    return cur


def member_path(node: Node) -> Optional[str]:
    """Dotted rendering of an identifier/member chain (``a.b.c``); calls in
    the chain render as ``()``.  None for anything else."""
    node = strip_parens(node)
    if node.kind in ("Ident", "This"):
        return node.value if node.kind == "Ident" else "this"
    if node.kind == "Member":
        base = member_path(node.children[0])
        return None if base is None else f"{base}.{node.value}"
    if node.kind == "Call":
        base = member_path(node.children[0])
        return None if base is None else f"{base}()"
    return None


def root_ident(node: Node) -> Optional[Node]:
    node = strip_parens(node)
    while node.kind in MEMBER_KINDS or node.kind == "Call":
        node = strip_parens(node.children[0])
    return node if node.kind == "Ident" else None
