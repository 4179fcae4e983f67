"""Construction of the taint-flow graph from a program index."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..frontend.ast import FUNCTION_KINDS, MEMBER_KINDS, Node, call_args, call_callee, fn_params, strip_parens
from ..index import ProgramIndex
from ..index.program import function_returns
from . import resolve
from .graph import DEFAULT_ACCESS_PATH_LIMIT, EXTENDED_LABELS, FlowEdge, FlowGraph

ALL_RULES = frozenset(EXTENDED_LABELS)


class DanglingEdge(ValueError):
    pass


@dataclass
class GraphOptions:
    extended: bool | Iterable[str] = False
    asserted_edges: Iterable[tuple[int, int]] = ()  # (invocation id, function id)
    summaries: Iterable[int] = ()  # invocation ids with an enabled third-party edge
    unresolved: Optional[Iterable[int]] = None  # invocations the Param/Method rules apply to
    access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT
    rules: frozenset[str] = field(init=False)

    def __post_init__(self) -> None:
        if self.extended is True:
            self.rules = ALL_RULES
        elif self.extended is False:
            self.rules = frozenset()
        else:
            self.rules = frozenset(self.extended)
            unknown = self.rules - ALL_RULES
            if unknown:
                raise ValueError(f"unknown extended rules: {sorted(unknown)}")


def _is_module_exports(node: Node) -> bool:
    node = strip_parens(node)
    return (
        node.kind == "Member"
        and node.value == "exports"
        and strip_parens(node.children[0]).kind == "Ident"
        and strip_parens(node.children[0]).value == "module"
    )


def _is_exports_ident(node: Node) -> bool:
    node = strip_parens(node)
    return node.kind == "Ident" and node.value == "exports"


class _Builder:
    def __init__(self, index: ProgramIndex, options: GraphOptions) -> None:
        self.index = index
        self.options = options
        self.edges: set[FlowEdge] = set()
        self.unresolved = resolve.unresolved_calls(index)
        if options.unresolved is None:
            self.rule_calls = set(self.unresolved.filtered)
        else:
            self.rule_calls = set(options.unresolved)

    def add(self, src: Node | int, dst: Node | int, label: str = "intra", op: str = "plain") -> None:
        ix = self.index
        s = src if isinstance(src, int) else ix.id_of(src)
        d = dst if isinstance(dst, int) else ix.id_of(dst)
        if s != d or op != "plain":
            self.edges.add(FlowEdge(s, d, label, op))

    # helpers ------------------------------------------------------------------

    def hub(self, binding) -> Optional[Node]:
        if binding is None or binding.decl is None:
            return None
        return binding.decl

    def write_back(self, base: Node, label: str = "intra") -> None:
        """Propagate a modification of ``base`` back to where it is stored:
        a variable's hub, or one level up a member chain."""
        base = strip_parens(base)
        if base.kind == "Ident":
            binding = self.index.binding_of(base, self.path)
            hub = self.hub(binding)
            if hub is not None:
                self.add(base, hub, label)
            elif binding is not None:
                for read in binding.reads:
                    self.add(base, read, label)
        elif base.kind in MEMBER_KINDS:
            inner = base.children[0]
            if self.index.has_node(inner):
                self.add(base, inner, label, "store")
                self.write_back(inner, label)

    def store_into(self, value: Node, base: Node, label: str = "intra") -> None:
        self.add(value, base, label, "store")
        self.write_back(base, label)

    # per-file walk -------------------------------------------------------------------

    def build(self) -> FlowGraph:
        ix = self.index
        for path in sorted(ix.asts):
            self.path = path
            resolver = ix.resolvers[path]
            for binding in resolver.bindings:
                self.binding_edges(binding)
            for node in ix.asts[path].walk():
                self.node_edges(node)
        self.path = None
        for inv in ix.invocations:
            self.path = ix.node(inv.node).file
            self.call_edges(inv)
        self.module_edges()
        for inv_id, fn_id in self.options.asserted_edges:
            self.asserted(inv_id, fn_id)
        for inv_id in self.options.summaries:
            self.candidate_summary(inv_id)
        if self.options.rules:
            for path in sorted(ix.asts):
                self.path = path
                for node in ix.asts[path].walk():
                    self.extended_edges(node)
        return FlowGraph(len(ix.nodes), self.edges, self.options.access_path_limit)

    def binding_edges(self, binding) -> None:
        hub = self.hub(binding)
        if hub is not None:
            for read in binding.reads:
                self.add(hub, read)
            return
        # implicit global: connect every write site to every read site
        for write in binding.writes:
            for read in binding.reads:
                if read is not write:
                    self.add(write, read)

    def node_edges(self, node: Node) -> None:
        kind = node.kind
        ix = self.index
        if kind == "Declarator":
            if len(node.children) > 1:
                self.add(node.children[1], node.children[0])
        elif kind == "FunctionDecl":
            name = node.first("BindingIdent")
            if name is not None:
                self.add(node, name)
        elif kind == "FunctionExpr":
            name = node.first("BindingIdent")
            if name is not None:
                self.add(node, name)
        elif kind == "Assign":
            target, rhs = node.children
            self.add(rhs, node)
            target_s = strip_parens(target)
            if target_s.kind == "Ident":
                self.add(rhs, target_s)
                self.write_back(target_s)
            elif target_s.kind in MEMBER_KINDS:
                self.store_into(rhs, target_s.children[0])
        elif kind in ("ForOf", "ForIn"):
            head, iterable = node.children[0], node.children[1]
            if kind == "ForOf":
                if head.kind == "VarDecl":
                    self.add(iterable, head.children[0].children[0], op="load")
                else:
                    self.add(iterable, head, op="load")
                    self.write_back(head)
        elif kind == "Template":
            for part in node.children:
                self.add(part, node)
        elif kind == "Binary" and node.value in ("+", "&&", "||"):
            for part in node.children:
                self.add(part, node)
        elif kind == "Conditional":
            self.add(node.children[1], node)
            self.add(node.children[2], node)
        elif kind == "Paren":
            self.add(node.children[0], node)
        elif kind in MEMBER_KINDS:
            parent = node.parent
            is_target = parent is not None and parent.kind == "Assign" and parent.children[0] is node
            if not is_target and ix.has_node(node.children[0]):
                self.add(node.children[0], node, op="load")
        elif kind == "Object":
            for prop in node.children:
                value = prop.children[-1]
                self.add(value, node, op="store")
        elif kind == "Array":
            for element in node.children:
                self.add(element, node, op="store")

    # calls ------------------------------------------------------------------------------

    def link_call(self, call: Node, fn: Node, label_in: str, label_out: str) -> None:
        for arg, param in zip(call_args(call), fn_params(fn)):
            self.add(arg, param, label_in)
        for ret in function_returns(fn):
            self.add(ret, call, label_out)

    def call_edges(self, inv) -> None:
        call = inv.ast
        for entry in resolve.resolve_callees_p0(inv, self.index):
            self.link_call(call, entry.ast, "call-arg", "call-return")
        if inv.node not in self.unresolved.raw:
            return
        summary = resolve.summary_entry(inv, self.index)
        if summary is None:
            return
        args = call_args(call)
        flow = summary.flow
        label = "summary-internal"
        receiver = summary.receiver
        if flow == "preserve":
            if receiver is not None:
                self.add(receiver, call, label)
            for arg in args:
                self.add(arg, call, label)
        elif flow == "args":
            for arg in args:
                self.add(arg, call, label)
        elif flow == "load-receiver":
            if receiver is not None:
                self.add(receiver, call, label, "load")
            for arg in args:
                self.add(arg, call, label)
        elif flow == "store-receiver":
            if receiver is not None:
                self.add(receiver, call, label, "store")
        elif flow == "to-receiver":
            if receiver is not None:
                for arg in args:
                    self.store_into(arg, receiver, label)
        elif flow == "assign":
            if args:
                for src in args[1:]:
                    self.add(src, args[0], label)
                self.write_back(args[0], label)
                for arg in args:
                    self.add(arg, call, label)
        elif flow == "store-arg":
            if args:
                self.add(args[0], call, label, "store")
        elif flow == "arg":
            if args:
                self.add(args[0], call, label)

    def module_edges(self) -> None:
        ix = self.index
        for site in ix.requires:
            if site.resolved is None:
                continue
            for node in ix.asts[site.resolved].walk():
                if node.kind != "Assign" or node.value != "=":
                    continue
                target, rhs = node.children
                if _is_module_exports(target):
                    self.add(rhs, site.node)
                elif strip_parens(target).kind == "Member":
                    base = strip_parens(target).children[0]
                    if _is_module_exports(base) or _is_exports_ident(base):
                        self.add(rhs, site.node, op="store")

    def asserted(self, inv_id: int, fn_id: int) -> None:
        ix = self.index
        n = len(ix.nodes)
        if not (0 <= inv_id < n and ix.nodes[inv_id].kind == "invocation"):
            raise DanglingEdge(f"asserted edge names missing invocation node {inv_id}")
        if not (0 <= fn_id < n and ix.nodes[fn_id].kind == "function"):
            raise DanglingEdge(f"asserted edge names missing function node {fn_id}")
        self.link_call(ix.ast(inv_id), ix.ast(fn_id), "asserted-edge", "asserted-edge")

    def candidate_summary(self, inv_id: int) -> None:
        ix = self.index
        if not (0 <= inv_id < len(ix.nodes) and ix.nodes[inv_id].kind == "invocation"):
            raise DanglingEdge(f"summary names missing invocation node {inv_id}")
        call = ix.ast(inv_id)
        callee = strip_parens(call_callee(call))
        if callee.kind in MEMBER_KINDS:
            self.add(callee.children[0], call, "candidate-summary")
        for arg in call_args(call):
            self.add(arg, call, "candidate-summary")

    # extended rules -----------------------------------------------------------------------

    def extended_edges(self, node: Node) -> None:
        rules = self.options.rules
        ix = self.index
        kind = node.kind
        if kind in ("Call", "New") and ix.id_of(node) in self.rule_calls:
            if "param" in rules:
                for arg in call_args(node):
                    self.add(arg, node, "param")
            if "method" in rules:
                root = strip_parens(call_callee(node))
                if root.kind in MEMBER_KINDS:
                    while root.kind in MEMBER_KINDS:
                        root = strip_parens(root.children[0])
                    if root.kind == "Ident":
                        self.add(root, node, "method")
        elif kind == "Object":
            for prop in node.children:
                value = prop.children[-1]
                if "object" in rules:
                    self.add(value, node, "object")
                if "func-obj" in rules:
                    self.func_obj(strip_parens(value), node)
        elif kind == "Assign":
            target = strip_parens(node.children[0])
            if target.kind not in MEMBER_KINDS:
                return
            rhs = node.children[1]
            base = strip_parens(target.children[0])
            if "func-obj" in rules and ix.has_node(base):
                self.func_obj(strip_parens(rhs), base)
            if "object" in rules:
                while True:
                    if ix.has_node(base):
                        self.add(rhs, base, "object")
                    if base.kind == "Ident":
                        binding = ix.binding_of(base, self.path)
                        hub = self.hub(binding)
                        if hub is not None:
                            self.add(rhs, hub, "object")
                        break
                    if base.kind not in MEMBER_KINDS:
                        break
                    base = strip_parens(base.children[0])

    def func_obj(self, fn: Node, container: Node) -> None:
        if fn.kind not in FUNCTION_KINDS:
            return
        for param in fn_params(fn):
            self.add(param, container, "func-obj")
        for ret in function_returns(fn):
            self.add(ret, container, "func-obj")
        self.add(fn, container, "func-obj")


def build_flow_graph(index: ProgramIndex, options: Optional[GraphOptions] = None, **kwargs) -> FlowGraph:
    """Build G over ``index``; keyword arguments are forwarded to
    :class:`GraphOptions` when ``options`` is omitted."""
    if options is None:
        options = GraphOptions(**kwargs)
    return _Builder(index, options).build()
