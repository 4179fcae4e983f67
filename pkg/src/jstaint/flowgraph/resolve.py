"""Precision-0 callee resolution and the unresolved-call sets."""

from __future__ import annotations

from dataclasses import dataclass

from ..frontend.ast import FUNCTION_KINDS, Node, call_callee, strip_parens
from ..index import FunctionEntry, InvocationEntry, ProgramIndex
from . import catalog


@dataclass(frozen=True)
class UnresolvedCallSet:
    raw: frozenset[int]
    filtered: frozenset[int]

    def __post_init__(self) -> None:
        assert self.filtered <= self.raw


def _function_value(node: Node | None) -> Node | None:
    if node is None:
        return None
    node = strip_parens(node)
    return node if node.kind in ("FunctionExpr", "Arrow") else None


def _resolve_ident(ident: Node, path: str, index: ProgramIndex) -> Node | None:
    binding = index.binding_of(ident, path)
    if binding is None or not binding.single_assignment:
        return None
    if binding.kind == "function":
        # (a) a lexically visible declaration (or a named expression's own name)
        fn = binding.inits[0]
        return fn if fn.kind in FUNCTION_KINDS else None
    if binding.kind in ("const", "let"):
        # (b) single-assignment const/let bound to a function expression
        return _function_value(binding.inits[0])
    return None


def _resolve_member(member: Node, path: str, index: ProgramIndex) -> Node | None:
    # (c) o.m() where o is a single-assignment binding of an object literal
    base = strip_parens(member.children[0])
    if base.kind != "Ident":
        return None
    binding = index.binding_of(base, path)
    if binding is None or binding.kind in ("param", "implicit", "function") or not binding.single_assignment:
        return None
    obj = strip_parens(binding.inits[0])
    if obj.kind != "Object":
        return None
    found = None
    for prop in obj.children:
        if prop.kind == "Prop" and prop.value == member.value:
            found = _function_value(prop.children[0])
    return found


def resolve_callees_p0(invocation: InvocationEntry, index: ProgramIndex) -> list[FunctionEntry]:
    """Callees derivable from direct lexical or single-assignment evidence."""
    path = index.node(invocation.node).file
    callee = strip_parens(call_callee(invocation.ast))
    target = None
    if callee.kind == "Ident":
        target = _resolve_ident(callee, path, index)
    elif callee.kind == "Member":
        target = _resolve_member(callee, path, index)
    elif callee.kind in ("FunctionExpr", "Arrow"):
        # (d) immediately invoked function literal
        target = callee
    if target is None:
        return []
    entry = index.function_for_ast(target)
    return [entry] if entry is not None else []


def summary_entry(invocation: InvocationEntry, index: ProgramIndex) -> catalog.SummaryEntry | None:
    path = index.node(invocation.node).file

    def is_global(ident: Node) -> bool:
        b = index.binding_of(ident, path)
        return b is None or b.kind == "implicit"

    return catalog.lookup(invocation.ast, is_global)


def unresolved_calls(index: ProgramIndex) -> UnresolvedCallSet:
    raw, filtered = set(), set()
    for inv in index.invocations:
        if inv.in_test_dir or resolve_callees_p0(inv, index):
            continue
        raw.add(inv.node)
        if summary_entry(inv, index) is None:
            filtered.add(inv.node)
    return UnresolvedCallSet(frozenset(raw), frozenset(filtered))
