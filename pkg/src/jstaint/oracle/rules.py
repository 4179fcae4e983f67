"""Rule tables the deterministic backend uses for discovery."""

from __future__ import annotations

from ..frontend.ast import (
    Node,
    call_args,
    call_callee,
    fn_body,
    fn_params,
    member_path,
    strip_parens,
)
from ..index import ProgramIndex
from ..index.program import function_returns
from .pointsto import Ext, Fn, Global, Module, Obj, PointsTo

ENV_SOURCE_PATHS = frozenset(
    {
        "location.hash",
        "location.search",
        "location.href",
        "window.location.hash",
        "window.location.search",
        "window.location.href",
        "window.name",
        "document.URL",
        "document.documentURI",
        "document.cookie",
        "document.location.hash",
        "document.location.search",
        "document.getElementById().value",
        "document.querySelector().value",
        "process.argv",
    }
)
REQUEST_NAMES = frozenset({"req", "request"})
REQUEST_FIELDS = frozenset({"query", "body", "params", "headers", "cookies"})

EXEC_NAMES = frozenset({"exec", "execSync", "spawn", "spawnSync", "execFile", "execFileSync"})
FS_NAMES = frozenset(
    {
        "readFile", "readFileSync", "writeFile", "writeFileSync", "appendFile", "appendFileSync",
        "createReadStream", "createWriteStream", "unlink", "unlinkSync", "readdir", "readdirSync",
        "open", "openSync", "stat", "statSync",
    }
)
SQL_NAMES = frozenset({"query", "execute", "raw"})
MARKUP_PROPS = frozenset({"innerHTML", "outerHTML"})
REDIRECT_TARGETS = frozenset({"location", "location.href", "window.location", "window.location.href", "document.location"})


def callee_name(call: Node):
    callee = strip_parens(call_callee(call))
    if callee.kind in ("Ident", "Member"):
        return callee.value
    return None


def request_field(node: Node) -> bool:
    """``req.query`` style reads (the root must be named like a request)."""
    if node.kind != "Member" or node.value not in REQUEST_FIELDS:
        return False
    base = strip_parens(node.children[0])
    return base.kind == "Ident" and base.value in REQUEST_NAMES


def is_write_target(node: Node) -> bool:
    parent = node.parent
    return parent is not None and parent.kind == "Assign" and parent.children[0] is node


def env_sources(index: ProgramIndex, pt: PointsTo) -> list[tuple[Node, int, str]]:
    out = []
    for fid, node in enumerate(index.ast_nodes):
        if node.kind != "Member" or is_write_target(node) or index.in_test_dir(index.nodes[fid].file):
            continue
        if request_field(node):
            out.append((node, 5, f"request field {node.value}"))
            continue
        hits = sorted(v.path for v in pt.values(node) if isinstance(v, Global) and v.path in ENV_SOURCE_PATHS)
        if hits:
            out.append((node, 5, f"environment read {hits[0]}"))
    return out


def _is_iife(call: Node) -> bool:
    return call.kind == "Call" and strip_parens(call_callee(call)).kind in ("FunctionExpr", "Arrow")


def exported_roots(index: ProgramIndex, pt: PointsTo) -> set:
    roots: set = set()
    for path in sorted(pt.exports):
        for _key, rhs in pt.exports[path]:
            roots |= pt.values(rhs)
    for base, _key, rhs in pt.writes:
        if any(isinstance(v, Global) and v.path in ("window", "global", "globalThis", "self") for v in pt.values(base)):
            roots |= pt.values(rhs)
    for path in sorted(index.asts):
        for stmt in index.asts[path].children:
            exprs = []
            if stmt.kind == "ExprStmt":
                exprs.append(stmt.children[0])
            elif stmt.kind == "VarDecl":
                exprs += [d.children[1] for d in stmt.children if len(d.children) > 1]
            for e in exprs:
                e = strip_parens(e)
                if e.kind == "Assign":
                    e = strip_parens(e.children[1])
                if _is_iife(e):
                    roots |= pt.values(e)
    return roots


def exported_functions(index: ProgramIndex, pt: PointsTo) -> list[Node]:
    """Functions reachable from the package's export points.  A factory
    (a function that returns functions) is replaced by what it returns."""
    found: dict[int, Node] = {}
    seen: set = set()

    def visit(v, depth: int) -> None:
        if depth > 4 or v in seen:
            return
        seen.add(v)
        if isinstance(v, Fn):
            returned = set()
            for ret in function_returns(v.node):
                returned |= pt.values(ret)
            made = [r for r in returned if isinstance(r, (Fn, Obj))]
            if made:
                for r in sorted(made, key=lambda r: (pt.path_of[id(r.node)], r.node.span)):
                    visit(r, depth + 1)
            else:
                found[id(v.node)] = v.node
        elif isinstance(v, (Obj, Module)):
            for inner in sorted(
                (x for x in pt.all_props(v) if isinstance(x, (Fn, Obj))),
                key=lambda r: (pt.path_of[id(r.node)], r.node.span),
            ):
                visit(inner, depth + 1)

    for v in sorted((r for r in exported_roots(index, pt) if isinstance(r, (Fn, Obj, Module))), key=repr):
        visit(v, 0)
    return sorted(found.values(), key=lambda n: (pt.path_of[id(n)], n.span))


def param_sources(index: ProgramIndex, pt: PointsTo) -> list[tuple[Node, int, str]]:
    out = []
    for fn in exported_functions(index, pt):
        if index.in_test_dir(pt.path_of[id(fn)]):
            continue
        for i, param in enumerate(fn_params(fn)):
            out.append((param, 4, f"parameter {i + 1} of an exported function"))
    return out


def _returned(node: Node) -> bool:
    parent = node.parent
    if parent is None:
        return False
    if parent.kind == "Return":
        return True
    if parent.kind == "Paren":
        return _returned(parent)
    return parent.kind == "Arrow" and fn_body(parent) is node


def _concat_operands(node: Node) -> list[Node]:
    node_s = strip_parens(node)
    if node_s.kind == "Binary" and node_s.value == "+":
        return _concat_operands(node_s.children[0]) + _concat_operands(node_s.children[1])
    return [node]


def _markup_sinks(node: Node) -> list[tuple[Node, int, str]]:
    out = []
    if node.kind == "Template" and "<" in (node.value or "") and _returned(node):
        for part in node.children:
            out.append((part, 4, "interpolation into returned markup"))
    elif node.kind == "Binary" and node.value == "+" and _returned(node):
        parts = _concat_operands(node)
        if any(strip_parens(p).kind == "Str" and "<" in p.value for p in parts if strip_parens(p).kind == "Str"):
            for p in parts:
                if strip_parens(p).kind != "Str":
                    out.append((p, 4, "concatenation into returned markup"))
    return out


def _receiver_is(pt: PointsTo, call: Node, module: str) -> bool:
    callee = strip_parens(call_callee(call))
    if callee.kind != "Member":
        return False
    base = strip_parens(callee.children[0])
    if base.kind == "Ident" and base.value == module:
        return True
    return Ext(module) in pt.values(base)


def cwe_sinks(cwe: str, index: ProgramIndex, pt: PointsTo) -> list[tuple[Node, int, str]]:
    out: list[tuple[Node, int, str]] = []
    for fid, node in enumerate(index.ast_nodes):
        if index.in_test_dir(index.nodes[fid].file):
            continue
        kind = node.kind
        if kind in ("Call", "New"):
            name = callee_name(node)
            args = call_args(node)
            path = member_path(call_callee(node))
            if not args:
                continue
            if cwe == "79":
                if path in ("document.write", "document.writeln"):
                    out += [(a, 5, "document.write argument") for a in args]
                elif name == "insertAdjacentHTML" and len(args) > 1:
                    out.append((args[1], 5, "insertAdjacentHTML argument"))
            elif cwe == "78" and name in EXEC_NAMES:
                out.append((args[0], 5, f"command passed to {name}"))
            elif cwe == "94":
                callee = strip_parens(call_callee(node))
                if callee.kind == "Ident" and callee.value == "eval" and pt.is_global(callee):
                    out.append((args[0], 5, "eval argument"))
                elif kind == "New" and callee.kind == "Ident" and callee.value == "Function":
                    out += [(a, 5, "Function constructor argument") for a in args]
                elif name in ("runInThisContext", "runInNewContext") and _receiver_is(pt, node, "vm"):
                    out.append((args[0], 5, f"vm.{name} argument"))
            elif cwe == "22":
                if (name in FS_NAMES and _receiver_is(pt, node, "fs")) or name == "sendFile":
                    out.append((args[0], 4, f"path passed to {name}"))
            elif cwe == "89" and name in SQL_NAMES and strip_parens(call_callee(node)).kind == "Member":
                out.append((args[0], 4, f"statement passed to {name}"))
            elif cwe == "601":
                if path in ("location.assign", "location.replace", "window.location.assign", "window.location.replace") or (
                    name == "redirect" and strip_parens(call_callee(node)).kind == "Member"
                ):
                    out.append((args[-1], 4, "redirect target"))
        elif kind == "Assign":
            target = strip_parens(node.children[0])
            rhs = node.children[1]
            if cwe == "79" and target.kind == "Member" and target.value in MARKUP_PROPS:
                out.append((rhs, 5, f"{target.value} assignment"))
            elif cwe == "601" and member_path(target) in REDIRECT_TARGETS:
                out.append((rhs, 4, "location assignment"))
            elif cwe == "915" and target.kind == "ComputedMember":
                key = strip_parens(target.children[1])
                if key.kind not in ("Str", "Num"):
                    out.append((target.children[1], 3, "computed property write key"))
        elif cwe == "79" and kind in ("Template", "Binary"):
            out += _markup_sinks(node)
    return out

