"""Call-boundary classification by walking the callee's access path back to
a definition or a ``require``."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

from ..frontend.ast import FUNCTION_KINDS, Node, call_callee, strip_parens

if TYPE_CHECKING:
    from .program import InvocationEntry, ProgramIndex

MAX_TRACE_DEPTH = 8

Verdict = tuple[str, Optional[tuple[str, int]]]


def _trace(node: Node, path: str, index: "ProgramIndex", depth: int, seen: set[int]) -> Verdict:
    if depth > MAX_TRACE_DEPTH or id(node) in seen:
        return "unknown", None
    seen.add(id(node))
    node = strip_parens(node)
    kind = node.kind
    if kind in FUNCTION_KINDS or kind == "Object":
        return "first", None
    if kind == "Ident":
        binding = index.binding_of(node, path)
        if binding is None:
            return "unknown", None
        if binding.kind == "function":
            return "first", None
        if binding.kind == "param" or not binding.single_assignment:
            return "unknown", None
        return _trace(binding.inits[0], path, index, depth + 1, seen)
    if kind in ("Member", "ComputedMember"):
        return _trace(node.children[0], path, index, depth + 1, seen)
    if kind in ("Call", "New"):
        spec = index.require_specifier(node)
        if spec is not None:
            if index.resolve_module(path, spec) is not None:
                return "first", None
            return "third", (path, node.span[0])
        return _trace(call_callee(node), path, index, depth + 1, seen)
    return "unknown", None


def classify_boundary(
    invocation: "InvocationEntry", index: "ProgramIndex", with_witness: bool = False
) -> str | Verdict:
    """``third`` iff the callee traces to a require of a specifier that does
    not resolve inside the package; ``first`` iff it traces to a
    first-party definition; ``unknown`` otherwise."""
    call = invocation.ast
    path = index.node(invocation.node).file
    verdict = _trace(call_callee(call), path, index, 0, set())
    return verdict if with_witness else verdict[0]
