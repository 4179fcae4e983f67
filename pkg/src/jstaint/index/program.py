"""Program-wide registries: FlowNodes, functions, invocations, imports."""

from __future__ import annotations

import fnmatch
import json
import os
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Iterable, Optional

from ..frontend import SourceFile, parse_file
from ..frontend.ast import (
    CALL_KINDS,
    FUNCTION_KINDS,
    Node,
    call_args,
    call_callee,
    fn_body,
    fn_name,
    fn_params,
    strip_parens,
)
from ..frontend.source import Span
from .scopes import Binding, ScopeResolver

FLOW_KINDS = ("expression", "parameter", "invocation", "function", "property-write", "object-literal")

EXPRESSION_KINDS = frozenset(
    {
        "Ident", "BindingIdent", "This", "Num", "Str", "Bool", "Null", "Template", "Array",
        "Member", "ComputedMember", "Assign", "Binary", "Unary", "Update", "Conditional", "Paren",
    }
)

DEFAULT_TEST_DIRS = ("test", "tests", "__tests__")
DEFAULT_TEST_FILES = ("*.test.js", "*.spec.js")


class EmptyQuery(ValueError):
    pass


def flow_kind(node: Node) -> Optional[str]:
    kind = node.kind
    if kind in FUNCTION_KINDS:
        return "function"
    if kind == "Param":
        return "parameter"
    if kind in CALL_KINDS:
        return "invocation"
    if kind == "Object":
        return "object-literal"
    if kind == "Assign" and node.children[0].kind in ("Member", "ComputedMember"):
        return "property-write"
    if kind in EXPRESSION_KINDS:
        return "expression"
    return None


def snippet_label(snippet: str) -> str:
    """Single-line rendering of a snippet: multi-line text keeps its first
    line followed by a marker counting the elided characters."""
    if "\n" not in snippet:
        return snippet
    first = snippet.split("\n", 1)[0]
    return f"{first}…[+{len(snippet) - len(first)}]"


@dataclass(frozen=True)
class FlowNode:
    id: int
    file: str
    span: Span
    snippet: str
    kind: str

    @property
    def label(self) -> str:
        return snippet_label(self.snippet)

    @property
    def line(self) -> int:
        return self.span[0]

    @property
    def col(self) -> int:
        return self.span[1]

    def to_record(self) -> dict:
        return {"id": self.id, "kind": self.kind, "file": self.file, "span": list(self.span), "snippet": self.snippet}


@dataclass
class FunctionEntry:
    index: int
    name: Optional[str]
    file: str
    span: Span
    node: int  # FlowNode id of the function
    params: list[int]
    returns: list[int]
    ast: Node = field(repr=False, compare=False)


@dataclass
class InvocationEntry:
    node: int
    callee_name: Optional[str]
    args: list[int]
    in_test_dir: bool
    boundary_hint: str = "unknown"
    witness: Optional[tuple[str, int]] = None  # (file, line) of the require for third-party hints
    ast: Node = field(default=None, repr=False, compare=False)  # type: ignore[assignment]


@dataclass
class RequireSite:
    file: str
    node: int  # invocation FlowNode id of the require(...) call
    specifier: str
    resolved: Optional[str]  # package-relative path when first-party


class TestDirRule:
    """Decides whether a package path lies in a test location."""

    __test__ = False  # not a pytest class

    def __init__(self, dirs: Iterable[str] = DEFAULT_TEST_DIRS, files: Iterable[str] = DEFAULT_TEST_FILES) -> None:
        self.dirs = frozenset(dirs)
        self.files = tuple(files)

    def __call__(self, path: str) -> bool:
        parts = PurePosixPath(path).parts
        if any(part in self.dirs for part in parts[:-1]):
            return True
        return any(fnmatch.fnmatch(parts[-1], pat) for pat in self.files) if parts else False


def infer_function_name(fn: Node) -> Optional[str]:
    name = fn_name(fn)
    if name is not None:
        return name.value
    parent = fn.parent
    if parent is None:
        return None
    if parent.kind == "Prop":
        return parent.value
    if parent.kind == "Declarator":
        return parent.value
    if parent.kind == "Assign" and parent.children[1] is fn:
        target = parent.children[0]
        if target.kind in ("Ident", "Member"):
            return target.value
    return None


def function_returns(fn: Node) -> list[Node]:
    body = fn_body(fn)
    if body.kind != "Block":
        return [body]
    out = []
    for node in body.walk():
        if node.kind == "Return" and node.children:
            # skip returns that belong to nested functions
            cur = node.parent
            while cur is not None and cur is not fn and cur.kind not in FUNCTION_KINDS:
                cur = cur.parent
            if cur is fn:
                out.append(node.children[0])
    return out


class ProgramIndex:
    """Immutable registry over one package's first-party MiniJS files."""

    def __init__(
        self,
        root: str,
        files: list[SourceFile],
        asts: dict[str, Node],
        npm_files: Optional[dict[str, str]] = None,
        test_rule: Optional[TestDirRule] = None,
    ) -> None:
        self.root = root
        self.files = {f.path: f for f in files}
        self.asts = asts
        self.npm_files = dict(sorted((npm_files or {}).items()))
        self.test_rule = test_rule or TestDirRule()
        self.nodes: list[FlowNode] = []
        self.ast_nodes: list[Node] = []
        self._node_of: dict[int, int] = {}
        self.functions: list[FunctionEntry] = []
        self._function_of_node: dict[int, int] = {}
        self.invocations: list[InvocationEntry] = []
        self._invocation_of_node: dict[int, int] = {}
        self.resolvers: dict[str, ScopeResolver] = {}
        self.requires: list[RequireSite] = []
        self._by_start: dict[tuple[str, int, int], list[int]] = {}
        self._build()

    # construction --------------------------------------------------------

    def _build(self) -> None:
        for path in sorted(self.asts):
            program = self.asts[path]
            self.resolvers[path] = ScopeResolver(program, path).run()
            for node in program.walk():
                kind = flow_kind(node)
                if kind is None:
                    continue
                fid = len(self.nodes)
                self.nodes.append(FlowNode(fid, path, node.span, node.snippet, kind))
                self.ast_nodes.append(node)
                self._node_of[id(node)] = fid
                self._by_start.setdefault((path, node.span[0], node.span[1]), []).append(fid)
        for fid, node in enumerate(self.ast_nodes):
            kind = self.nodes[fid].kind
            if kind == "function":
                entry = FunctionEntry(
                    index=len(self.functions),
                    name=infer_function_name(node),
                    file=self.nodes[fid].file,
                    span=node.span,
                    node=fid,
                    params=[self.id_of(p) for p in fn_params(node)],
                    returns=[self.id_of(r) for r in function_returns(node)],
                    ast=node,
                )
                self._function_of_node[fid] = entry.index
                self.functions.append(entry)
            elif kind == "invocation":
                path = self.nodes[fid].file
                callee = strip_parens(call_callee(node))
                name = callee.value if callee.kind in ("Ident", "Member") else None
                inv = InvocationEntry(
                    node=fid,
                    callee_name=name,
                    args=[self.id_of(a) for a in call_args(node)],
                    in_test_dir=self.test_rule(path),
                    ast=node,
                )
                self._invocation_of_node[fid] = len(self.invocations)
                self.invocations.append(inv)
                spec = self.require_specifier(node)
                if spec is not None:
                    self.requires.append(RequireSite(path, fid, spec, self.resolve_module(path, spec)))
        from .boundary import classify_boundary

        for inv in self.invocations:
            hint, witness = classify_boundary(inv, self, with_witness=True)
            inv.boundary_hint = hint
            inv.witness = witness

    # lookups ---------------------------------------------------------------

    def id_of(self, node: Node) -> int:
        return self._node_of[id(node)]

    def has_node(self, node: Node) -> bool:
        return id(node) in self._node_of

    def node(self, fid: int) -> FlowNode:
        return self.nodes[fid]

    def ast(self, fid: int) -> Node:
        return self.ast_nodes[fid]

    def nodes_at(self, file: str, line: int, col: int) -> list[FlowNode]:
        return [self.nodes[i] for i in self._by_start.get((file, line, col), [])]

    def function_for_node(self, fid: int) -> Optional[FunctionEntry]:
        idx = self._function_of_node.get(fid)
        return None if idx is None else self.functions[idx]

    def function_for_ast(self, node: Node) -> Optional[FunctionEntry]:
        fid = self._node_of.get(id(node))
        return None if fid is None else self.function_for_node(fid)

    def invocation_for_node(self, fid: int) -> Optional[InvocationEntry]:
        idx = self._invocation_of_node.get(fid)
        return None if idx is None else self.invocations[idx]

    def binding_of(self, ident: Node, path: Optional[str] = None) -> Optional[Binding]:
        if path is None:
            path = self.nodes[self.id_of(ident)].file if self.has_node(ident) else None
        if path is None:
            for resolver in self.resolvers.values():
                b = resolver.resolution.get(id(ident))
                if b is not None:
                    return b
            return None
        return self.resolvers[path].resolution.get(id(ident))

    def file_of(self, node: Node) -> str:
        cur = node
        while cur.parent is not None:
            cur = cur.parent
        for path, program in self.asts.items():
            if program is cur:
                return path
        raise KeyError("node is not part of this index")

    def in_test_dir(self, path: str) -> bool:
        return self.test_rule(path)

    # modules -----------------------------------------------------------------

    @staticmethod
    def require_specifier(call: Node) -> Optional[str]:
        if call.kind != "Call":
            return None
        callee = strip_parens(call_callee(call))
        args = call_args(call)
        if callee.kind == "Ident" and callee.value == "require" and len(args) == 1 and args[0].kind == "Str":
            return args[0].value
        return None

    def resolve_module(self, from_file: str, specifier: str) -> Optional[str]:
        """Package-relative path for ``./`` and ``../`` specifiers that exist."""
        if not specifier.startswith(("./", "../")):
            return None
        base = PurePosixPath(from_file).parent
        joined = os.path.normpath(str(base / specifier)).replace("\\", "/")
        if joined.startswith(".."):
            return None
        for cand in (joined, joined + ".js", joined + "/index.js"):
            if cand in self.files:
                return cand
        return None

    def require_site(self, fid: int) -> Optional[RequireSite]:
        for site in self.requires:
            if site.node == fid:
                return site
        return None

    # queries -----------------------------------------------------------------

    def lookup_functions(self, name: Optional[str] = None, file: Optional[str] = None) -> list[FunctionEntry]:
        """Case-insensitive substring search over function names and paths,
        exact matches ranked first."""
        if not name and not file:
            raise EmptyQuery("lookup_functions needs a name or a file filter")
        qname = name.lower() if name else None
        qfile = file.lower() if file else None
        hits = []
        for entry in self.functions:
            ename = (entry.name or "").lower()
            epath = entry.file.lower()
            if qname is not None and qname not in ename:
                continue
            if qfile is not None and qfile not in epath:
                continue
            rank = (
                0 if qname is None or ename == qname else 1,
                0 if qfile is None or epath == qfile or epath.endswith("/" + qfile) else 1,
            )
            hits.append((rank, entry.index, entry))
        hits.sort(key=lambda h: (h[0], h[1]))
        return [h[2] for h in hits]

    def to_records(self) -> list[dict]:
        return [n.to_record() for n in self.nodes]

    def dump(self, path: str | Path) -> None:
        """Write the index file: one JSON record per FlowNode."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for rec in self.to_records():
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def discover_files(package_root: str | Path) -> tuple[list[str], list[str]]:
    """First-party ``.js`` files and ``node_modules`` files, both sorted."""
    root = Path(package_root)
    first, npm = [], []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        rel_dir = Path(dirpath).relative_to(root)
        in_npm = "node_modules" in rel_dir.parts
        for fname in sorted(filenames):
            rel = (rel_dir / fname).as_posix()
            if in_npm:
                npm.append(rel)
            elif fname.endswith(".js"):
                first.append(rel)
    return sorted(first), sorted(npm)


def build_program_index(
    package_root: str | Path,
    files: Optional[list[SourceFile]] = None,
    test_rule: Optional[TestDirRule] = None,
) -> ProgramIndex:
    """Parse (unless ``files`` is given) and index a package directory."""
    root = Path(package_root)
    npm_texts: dict[str, str] = {}
    if files is None:
        first, npm = discover_files(root)
        files = [SourceFile.read(root, p) for p in first]
        for p in npm:
            try:
                npm_texts[p] = (root / p).read_text(encoding="utf-8")
            except UnicodeDecodeError:
                continue
    asts = {f.path: parse_file(f) for f in files}
    return ProgramIndex(str(root), list(files), asts, npm_texts, test_rule)


def index_from_sources(sources: dict[str, str], test_rule: Optional[TestDirRule] = None) -> ProgramIndex:
    """Index in-memory sources (path -> text); handy for tests and demos."""
    files = [SourceFile(p, t) for p, t in sorted(sources.items())]
    return build_program_index(".", files=files, test_rule=test_rule)
