"""Lexical scopes and binding resolution.

``var`` and function declarations hoist to the nearest function (or
program) scope; ``let``/``const`` bind in the nearest block.  Names that
never resolve become per-file implicit globals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend.ast import FUNCTION_KINDS, Node, fn_name, fn_params

BLOCK_SCOPE_KINDS = frozenset({"Block", "For", "ForOf", "ForIn"})


@dataclass(eq=False)
class Binding:
    name: str
    kind: str  # var let const param function implicit
    decl: Optional[Node]  # BindingIdent / Param, None for implicit globals
    file: str
    inits: list[Node] = field(default_factory=list)  # value expressions written to the binding
    writes: list[Node] = field(default_factory=list)  # Ident targets of assignments / loop heads
    reads: list[Node] = field(default_factory=list)

    @property
    def single_assignment(self) -> bool:
        return len(self.inits) == 1 and not self.writes

    def __repr__(self) -> str:
        return f"<Binding {self.kind} {self.name} @{self.file}>"


@dataclass(eq=False)
class Scope:
    node: Node
    parent: Optional["Scope"]
    is_function: bool
    names: dict[str, Binding] = field(default_factory=dict)

    def lookup(self, name: str) -> Optional[Binding]:
        scope: Optional[Scope] = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None

    def function_scope(self) -> "Scope":
        scope = self
        while not scope.is_function and scope.parent is not None:
            scope = scope.parent
        return scope


class ScopeResolver:
    """Two passes over one file: declare, then resolve identifier uses."""

    def __init__(self, program: Node, path: str) -> None:
        self.program = program
        self.path = path
        self.scopes: dict[int, Scope] = {}
        self.resolution: dict[int, Binding] = {}  # id(Ident node) -> Binding
        self.globals: dict[str, Binding] = {}
        self.bindings: list[Binding] = []

    def run(self) -> "ScopeResolver":
        root = Scope(self.program, None, True)
        self.scopes[id(self.program)] = root
        self._declare(self.program, root)
        self._resolve(self.program, root)
        return self

    # pass 1 --------------------------------------------------------------

    def _bind(self, scope: Scope, name: str, kind: str, decl: Node) -> Binding:
        existing = scope.names.get(name)
        if existing is not None:
            return existing
        binding = Binding(name, kind, decl, self.path)
        scope.names[name] = binding
        self.bindings.append(binding)
        return binding

    def _declare(self, node: Node, scope: Scope) -> None:
        kind = node.kind
        if kind in FUNCTION_KINDS:
            name = fn_name(node)
            if kind == "FunctionDecl" and name is not None:
                b = self._bind(scope.function_scope(), name.value, "function", name)
                b.inits.append(node)
            inner = Scope(node, scope, True)
            self.scopes[id(node)] = inner
            if kind == "FunctionExpr" and name is not None:
                b = self._bind(inner, name.value, "function", name)
                b.inits.append(node)
            for param in fn_params(node):
                self._bind(inner, param.value, "param", param)
            body = node.children[-1]
            if body.kind == "Block":
                # the body block shares the function scope
                self.scopes[id(body)] = inner
                for child in body.children:
                    self._declare(child, inner)
            else:
                self._declare(body, inner)
            return
        if kind in BLOCK_SCOPE_KINDS:
            inner = Scope(node, scope, False)
            self.scopes[id(node)] = inner
            for child in node.children:
                self._declare(child, inner)
            return
        if kind == "VarDecl":
            target = scope.function_scope() if node.value == "var" else scope
            for decl in node.children:
                ident = decl.children[0]
                b = self._bind(target, ident.value, node.value, ident)
                if len(decl.children) > 1:
                    b.inits.append(decl.children[1])
                elif node.parent is not None and node.parent.kind in ("ForOf", "ForIn"):
                    b.writes.append(ident)
        for child in node.children:
            self._declare(child, scope)

    # pass 2 --------------------------------------------------------------

    def _global(self, name: str) -> Binding:
        b = self.globals.get(name)
        if b is None:
            b = Binding(name, "implicit", None, self.path)
            self.globals[name] = b
            self.bindings.append(b)
        return b

    def lookup(self, name: str, scope: Scope) -> Binding:
        return scope.lookup(name) or self._global(name)

    def _resolve(self, node: Node, scope: Scope) -> None:
        scope = self.scopes.get(id(node), scope)
        kind = node.kind
        if kind == "Ident":
            b = self.lookup(node.value, scope)
            self.resolution[id(node)] = b
            parent = node.parent
            if parent is not None and parent.kind == "Assign" and parent.children[0] is node:
                b.writes.append(node)
                b.inits.append(parent.children[1])
                if parent.value != "=":
                    b.reads.append(node)
            elif parent is not None and parent.kind in ("ForOf", "ForIn") and parent.children[0] is node:
                b.writes.append(node)
            elif parent is not None and parent.kind == "Update":
                b.writes.append(node)
                b.reads.append(node)
            else:
                b.reads.append(node)
            return
        if kind in ("BindingIdent", "Param"):
            b = scope.lookup(node.value)
            if b is not None and b.decl is node:
                self.resolution[id(node)] = b
            else:
                # shadowed duplicate declaration, attach to the visible binding
                self.resolution[id(node)] = self.lookup(node.value, scope)
            return
        for child in node.children:
            self._resolve(child, scope)
