"""A small context-insensitive points-to evaluator used by the
deterministic backend to answer call-resolution and discovery questions.

Abstract values:

``Fn(node)``        a function literal or declaration
``Obj(node)``       an object literal, plus properties written onto it
``Arr(node)``       an array literal, plus pushed elements
``Str(text)``       a string or number constant
``Entries(src)``    ``Object.entries`` over the values in ``src``
``Entry(src)``      one ``[key, value]`` pair of such a result
``Vals(src)``       ``Object.values`` over ``src``
``Module(path)``    a first-party module's exports
``Ext(lib)``        anything obtained from a third-party module
``Global(path)``    an unshadowed global, e.g. ``location.hash``

Queries are answered by rounds of evaluation.  Within a round each query
is computed once; a query re-entered while it is still being computed sees
its value from the previous round.  Values only grow, and rounds repeat
until none changes, so the final answers are a fixpoint.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from ..frontend.ast import FUNCTION_KINDS, MEMBER_KINDS, Node, call_args, call_callee, fn_params, strip_parens
from ..index import ProgramIndex
from ..index.program import function_returns

MAX_DEPTH = 200


class Fn(NamedTuple):
    node: Node


class Obj(NamedTuple):
    node: Node


class Arr(NamedTuple):
    node: Node


class Str(NamedTuple):
    text: str


class Entries(NamedTuple):
    src: frozenset


class Entry(NamedTuple):
    src: frozenset


class Vals(NamedTuple):
    src: frozenset


class Module(NamedTuple):
    path: str


class Ext(NamedTuple):
    lib: str


class Global(NamedTuple):
    path: str


EMPTY: frozenset = frozenset()


def library_name(specifier: str) -> str:
    parts = specifier.split("/")
    if specifier.startswith("@") and len(parts) > 1:
        return "/".join(parts[:2])
    return parts[0]


class PointsTo:
    def __init__(self, index: ProgramIndex) -> None:
        self.index = index
        self.path_of: dict[int, str] = {}
        self.writes: list[tuple[Node, Optional[str], Node]] = []  # (base, key or None, rhs)
        self.pushes: list[tuple[Node, list[Node]]] = []
        self.calls: list[Node] = []
        self.exports: dict[str, list[tuple[Optional[str], Node]]] = {}
        for path in sorted(index.asts):
            for node in index.asts[path].walk():
                self.path_of[id(node)] = path
                if node.kind == "Assign" and node.value == "=":
                    self._note_write(path, node)
                elif node.kind in ("Call", "New"):
                    self.calls.append(node)
                    callee = strip_parens(call_callee(node))
                    if callee.kind == "Member" and callee.value in ("push", "unshift"):
                        self.pushes.append((callee.children[0], call_args(node)))
        self._memo: dict[tuple, frozenset] = {}  # final answers
        self._approx: dict[tuple, frozenset] = {}  # previous-round answers
        self._round: dict[tuple, frozenset] = {}
        self._stack: set[tuple] = set()
        self._changed = False
        self.truncated = False

    def _note_write(self, path: str, node: Node) -> None:
        target = strip_parens(node.children[0])
        rhs = node.children[1]
        if target.kind not in MEMBER_KINDS:
            return
        base = strip_parens(target.children[0])
        if target.kind == "Member":
            key = target.value
        else:
            k = strip_parens(target.children[1])
            key = k.value if k.kind in ("Str", "Num") else None
        if base.kind == "Member" and base.value == "exports" and self._is_ident(base.children[0], "module"):
            self.exports.setdefault(path, []).append((key, rhs))
        elif self._is_ident(base, "exports"):
            self.exports.setdefault(path, []).append((key, rhs))
        elif target.kind == "Member" and target.value == "exports" and self._is_ident(base, "module"):
            self.exports.setdefault(path, []).append((None, rhs))
            return
        self.writes.append((base, key, rhs))

    @staticmethod
    def _is_ident(node: Node, name: str) -> bool:
        node = strip_parens(node)
        return node.kind == "Ident" and node.value == name

    # memo machinery ---------------------------------------------------------

    def _memoized(self, key: tuple, compute) -> frozenset:
        if key in self._memo:
            return self._memo[key]
        if key in self._round:
            return self._round[key]
        if key in self._stack:
            return self._approx.get(key, EMPTY)
        if not self._stack:
            return self._solve(key, compute)
        return self._eval(key, compute)

    def _eval(self, key: tuple, compute) -> frozenset:
        if len(self._stack) >= MAX_DEPTH:
            self.truncated = True
            return self._approx.get(key, EMPTY)
        self._stack.add(key)
        try:
            result = frozenset(compute())
        finally:
            self._stack.discard(key)
        prev = self._approx.get(key, EMPTY)
        result |= prev
        if result != prev:
            self._changed = True
        self._approx[key] = result
        self._round[key] = result
        return result

    def _solve(self, key: tuple, compute) -> frozenset:
        while True:
            self._round = {}
            self._changed = False
            result = self._eval(key, compute)
            if not self._changed:
                break
        self._memo.update(self._round)
        self._round = {}
        return result

    def binding(self, ident: Node):
        return self.index.binding_of(ident, self.path_of.get(id(ident)))

    def is_global(self, ident: Node) -> bool:
        b = self.binding(ident)
        return b is None or (b.kind == "implicit" and not b.inits)

    # evaluation ---------------------------------------------------------------

    def values(self, expr: Node) -> frozenset:
        return self._memoized(("v", id(expr)), lambda: self._values(strip_parens(expr)))

    def _values(self, e: Node):
        kind = e.kind
        if kind in FUNCTION_KINDS:
            return {Fn(e)}
        if kind == "Object":
            return {Obj(e)}
        if kind == "Array":
            return {Arr(e)}
        if kind in ("Str", "Num"):
            return {Str(e.value)}
        if kind == "Template" and not e.children:
            return {Str(e.value)}
        if kind == "Ident":
            return self._ident(e)
        if kind == "Member":
            out = set()
            for v in self.values(e.children[0]):
                out |= self.props(v, e.value)
            return out
        if kind == "ComputedMember":
            return self._computed(e)
        if kind in ("Call", "New"):
            return self._call(e)
        if kind == "Conditional":
            return self.values(e.children[1]) | self.values(e.children[2])
        if kind == "Binary" and e.value in ("&&", "||"):
            return self.values(e.children[0]) | self.values(e.children[1])
        if kind == "Assign":
            return self.values(e.children[1])
        return EMPTY

    def _ident(self, e: Node):
        b = self.binding(e)
        if b is None:
            return EMPTY
        if b.kind == "param":
            return self.param_values(b.decl)
        out = set()
        for init in b.inits:
            out |= self.values(init)
        for w in b.writes:
            loop = w.parent
            if loop is not None and loop.kind == "Declarator":
                loop = loop.parent.parent if loop.parent is not None else None
            if loop is not None and loop.kind == "ForOf":
                for v in self.values(loop.children[1]):
                    out |= self.elements(v)
            elif loop is not None and loop.kind == "ForIn":
                for v in self.values(loop.children[1]):
                    out |= self.keys(v)
        if b.kind == "implicit" and not b.inits:
            out.add(Global(b.name))
        return out

    def _computed(self, e: Node):
        keys = self.values(e.children[1])
        names = {k.text for k in keys if isinstance(k, Str)}
        exact = bool(keys) and all(isinstance(k, Str) for k in keys)
        out = set()
        for v in self.values(e.children[0]):
            if isinstance(v, (Arr, Entries, Vals)):
                out |= self.elements(v)
            elif isinstance(v, Entry):
                for name in names or {"0", "1"}:
                    out |= self.props(v, name)
            elif exact:
                for name in sorted(names):
                    out |= self.props(v, name)
            else:
                out |= self.all_props(v)
        return out

    def _call(self, e: Node):
        callee = strip_parens(call_callee(e))
        args = call_args(e)
        spec = self.index.require_specifier(e)
        if spec is not None and self.is_global(callee):
            resolved = self.index.resolve_module(self.path_of[id(e)], spec)
            return {Module(resolved)} if resolved else {Ext(library_name(spec))}
        if callee.kind == "Member":
            base = strip_parens(callee.children[0])
            if base.kind == "Ident" and base.value == "Object" and self.is_global(base):
                if callee.value == "assign":
                    out = set()
                    for a in args:
                        out |= self.values(a)
                    return out
                if callee.value == "entries" and args:
                    return {Entries(self.values(args[0]))}
                if callee.value == "values" and args:
                    return {Vals(self.values(args[0]))}
        out = set()
        for f in self.values(callee):
            if isinstance(f, Fn):
                for ret in function_returns(f.node):
                    out |= self.values(ret)
            elif isinstance(f, Ext):
                out.add(f)
            elif isinstance(f, Global):
                out.add(Global(f.path + "()"))
        return out

    def param_values(self, param: Node) -> frozenset:
        def compute():
            fn = param.parent.parent
            pos = fn_params(fn).index(param)
            out = set()
            for call in self.calls:
                if Fn(fn) in self.callee_values(call):
                    args = call_args(call)
                    if pos < len(args):
                        out |= self.values(args[pos])
            return out

        return self._memoized(("p", id(param)), compute)

    def callee_values(self, call: Node) -> frozenset:
        return self.values(call_callee(call))

    # heap -----------------------------------------------------------------------

    def _written(self, v, key: Optional[str]):
        out = set()
        for base, wkey, rhs in self.writes:
            if (key is None or wkey is None or wkey == key) and v in self.values(base):
                out |= self.values(rhs)
        return out

    def props(self, v, key: str) -> frozenset:
        return self._memoized(("prop", v, key), lambda: self._props(v, key))

    def _props(self, v, key: str):
        if isinstance(v, Ext):
            return {v}
        if isinstance(v, Global):
            return {Global(f"{v.path}.{key}")}
        if isinstance(v, Entry):
            if key == "0":
                return {k for s in v.src for k in self.keys(s)}
            if key == "1":
                out = set()
                for s in v.src:
                    out |= self.all_props(s)
                return out
            return EMPTY
        if isinstance(v, (Arr, Entries, Vals)):
            return self.elements(v) if key.isdigit() else EMPTY
        if isinstance(v, Module):
            out = set()
            for k, rhs in self.exports.get(v.path, []):
                if k is None:
                    for inner in self.values(rhs):
                        out |= self.props(inner, key)
                elif k == key:
                    out |= self.values(rhs)
            return out
        out = set()
        if isinstance(v, Obj):
            for prop in v.node.children:
                if prop.kind == "Prop" and prop.value == key:
                    out |= self.values(prop.children[0])
                elif prop.kind == "ComputedProp":
                    k = strip_parens(prop.children[0])
                    if k.kind not in ("Str", "Num") or k.value == key:
                        out |= self.values(prop.children[1])
        out |= self._written(v, key)
        return out

    def all_props(self, v) -> frozenset:
        return self._memoized(("all", v), lambda: self._all_props(v))

    def _all_props(self, v):
        if isinstance(v, Ext):
            return {v}
        if isinstance(v, (Arr, Entries, Vals)):
            return self.elements(v)
        if isinstance(v, Entry):
            return self.props(v, "0") | self.props(v, "1")
        if isinstance(v, Module):
            out = set()
            for k, rhs in self.exports.get(v.path, []):
                vals = self.values(rhs)
                if k is None:
                    for inner in vals:
                        out |= self.all_props(inner)
                else:
                    out |= vals
            return out
        out = set()
        if isinstance(v, Obj):
            for prop in v.node.children:
                out |= self.values(prop.children[-1])
        if isinstance(v, (Obj, Fn)):
            out |= self._written(v, None)
        return out

    def keys(self, v) -> frozenset:
        if isinstance(v, Obj):
            out = {Str(p.value) for p in v.node.children if p.kind == "Prop"}
            out |= {Str(k) for base, k, _ in self.writes if k is not None and v in self.values(base)}
            return frozenset(out)
        if isinstance(v, Module):
            return frozenset(Str(k) for k, _ in self.exports.get(v.path, []) if k is not None)
        return EMPTY

    def elements(self, v) -> frozenset:
        return self._memoized(("el", v), lambda: self._elements(v))

    def _elements(self, v):
        if isinstance(v, Ext):
            return {v}
        if isinstance(v, Entries):
            return {Entry(v.src)}
        if isinstance(v, Vals):
            out = set()
            for s in v.src:
                out |= self.all_props(s)
            return out
        if isinstance(v, Arr):
            out = set()
            for element in v.node.children:
                out |= self.values(element)
            for receiver, args in self.pushes:
                if v in self.values(receiver):
                    for a in args:
                        out |= self.values(a)
            return out
        return EMPTY

    # convenience ------------------------------------------------------------------

    def functions_of(self, values) -> list[Node]:
        fns = [v.node for v in values if isinstance(v, Fn)]
        return sorted(fns, key=lambda n: (self.path_of[id(n)], n.span))

    def libraries_of(self, values) -> list[str]:
        return sorted({v.lib for v in values if isinstance(v, Ext)})
