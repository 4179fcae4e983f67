"""Built-in endpoint catalog and sanitizer barriers.

The base catalog is deliberately small: URL and request reads as sources,
and a handful of well-known sink APIs per weakness class.
"""

from __future__ import annotations

from ..frontend.ast import Node, call_args, call_callee, member_path, strip_parens
from ..index import ProgramIndex

BASE_SOURCE_PATHS = frozenset(
    {
        "location.hash",
        "location.search",
        "location.href",
        "window.location.hash",
        "window.location.search",
        "window.location.href",
        "document.location.hash",
        "document.location.search",
        "document.location.href",
        "document.URL",
        "process.argv",
    }
)
BASE_REQUEST_ROOTS = frozenset({"req", "request"})
BASE_REQUEST_FIELDS = frozenset({"query", "body", "params", "headers"})

BASE_EXEC = frozenset({"exec", "execSync", "spawn", "spawnSync", "execFile", "execFileSync"})

HTML_ESCAPES = frozenset({"escapeHtml", "escape", "sanitize", "escapeHTML", "htmlEscape", "encodeHTML"})
SHELL_QUOTES = frozenset({"quote", "shellescape", "shellEscape", "escapeShellArg"})
PATH_NORMALIZERS = frozenset({"path.normalize", "path.resolve"})


def _unshadowed_root(node: Node, index: ProgramIndex, path: str) -> bool:
    root = strip_parens(node)
    while root.kind in ("Member", "Call"):
        root = strip_parens(root.children[0])
    if root.kind != "Ident":
        return False
    binding = index.binding_of(root, path)
    return binding is None or binding.kind == "implicit"


def _call_name(call: Node):
    callee = strip_parens(call_callee(call))
    return callee.value if callee.kind in ("Ident", "Member") else None


def base_sources(index: ProgramIndex) -> set[int]:
    out = set()
    for fid, node in enumerate(index.ast_nodes):
        if node.kind != "Member":
            continue
        path = index.nodes[fid].file
        if index.in_test_dir(path):
            continue
        parent = node.parent
        if parent is not None and parent.kind == "Assign" and parent.children[0] is node:
            continue
        dotted = member_path(node)
        if dotted in BASE_SOURCE_PATHS and _unshadowed_root(node, index, path):
            out.add(fid)
        elif node.value in BASE_REQUEST_FIELDS:
            base = strip_parens(node.children[0])
            if base.kind == "Ident" and base.value in BASE_REQUEST_ROOTS:
                out.add(fid)
    return out


def base_sinks(index: ProgramIndex, cwe: str) -> set[int]:
    out = set()
    for fid, node in enumerate(index.ast_nodes):
        path = index.nodes[fid].file
        if index.in_test_dir(path):
            continue
        if node.kind == "Assign" and cwe == "79":
            target = strip_parens(node.children[0])
            if target.kind == "Member" and target.value in ("innerHTML", "outerHTML"):
                out.add(index.id_of(node.children[1]))
        elif node.kind in ("Call", "New"):
            args = call_args(node)
            if not args:
                continue
            dotted = member_path(call_callee(node))
            name = _call_name(node)
            if cwe == "79" and dotted in ("document.write", "document.writeln"):
                out.update(index.id_of(a) for a in args)
            elif cwe == "78" and name in BASE_EXEC:
                out.add(index.id_of(args[0]))
            elif cwe == "94" and dotted == "eval" and _unshadowed_root(call_callee(node), index, path):
                out.add(index.id_of(args[0]))
            elif cwe == "22" and dotted is not None and dotted.startswith("fs.") and dotted.count(".") == 1:
                out.add(index.id_of(args[0]))
    return out


def _guarded_binding(call: Node, index: ProgramIndex, path: str) -> bool:
    """The normalized path is stored in a variable that is later checked
    with ``startsWith``."""
    parent = call.parent
    if parent is None:
        return False
    if parent.kind == "Declarator" and parent.children[1] is call:
        binding = index.binding_of(parent.children[0], path)
    elif parent.kind == "Assign" and parent.children[1] is call and strip_parens(parent.children[0]).kind == "Ident":
        binding = index.binding_of(strip_parens(parent.children[0]), path)
    else:
        return False
    if binding is None:
        return False
    for read in binding.reads:
        up = read.parent
        if up is not None and up.kind == "Member" and up.value == "startsWith" and up.parent is not None and up.parent.kind == "Call":
            return True
    return False


def barrier_nodes(index: ProgramIndex, cwe: str) -> set[int]:
    out = set()
    for fid, node in enumerate(index.ast_nodes):
        if node.kind != "Call":
            continue
        name = _call_name(node)
        if cwe == "79" and name in HTML_ESCAPES:
            out.add(fid)
        elif cwe == "78" and name in SHELL_QUOTES:
            out.add(fid)
        elif cwe == "22" and member_path(call_callee(node)) in PATH_NORMALIZERS:
            if _guarded_binding(node, index, index.nodes[fid].file):
                out.add(fid)
    return out
