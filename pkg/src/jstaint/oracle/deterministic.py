"""Offline rule-based backend.

It answers every role by driving the same tools a remote model would use,
so its transcripts have the same shape.  Results depend only on the
package contents and the task.
"""

from __future__ import annotations

import re
from typing import Optional

from ..frontend.ast import Node, call_callee, fn_params, strip_parens
from ..index import ProgramIndex, snippet_label
from .pointsto import Ext, Fn, Global, Module, PointsTo, library_name
from .rules import cwe_sinks, env_sources, param_sources
from .toolbelt import MAX_FP_BATCH, Toolbelt
from .types import ResolutionTask, SummaryTask

ESCAPE_NAMES = ("escapeHtml", "escapeHTML", "escape_html", "htmlEscape", "encodeHTML", "sanitize")
MAX_TRACE = 6


class DeterministicBackend:
    name = "deterministic"

    def __init__(self) -> None:
        self._pt: dict[int, tuple[ProgramIndex, PointsTo]] = {}

    def points_to(self, index: ProgramIndex) -> PointsTo:
        cached = self._pt.get(id(index))
        if cached is None or cached[0] is not index:
            cached = (index, PointsTo(index))
            self._pt[id(index)] = cached
        return cached[1]

    def run(self, role: str, tb: Toolbelt, payload) -> None:
        if role == "source_sink":
            self._discover(tb)
        elif role == "callgraph":
            self._resolve(tb, payload)
        elif role == "flowsummary":
            self._classify(tb, payload)
        else:
            raise ValueError(f"unknown role {role!r}")

    # helpers -------------------------------------------------------------------

    @staticmethod
    def _location(index: ProgramIndex, node: Node) -> dict:
        fid = index.id_of(node)
        flow = index.node(fid)
        return {"file_path": f"source/{flow.file}", "line": flow.span[0], "column": flow.span[1], "snippet": flow.label}

    # source / sink ---------------------------------------------------------------

    def _discover(self, tb: Toolbelt) -> None:
        index = tb.index
        pt = self.points_to(index)
        cwe = tb.cwe.id if tb.cwe is not None else ""
        tb.call("view_dir", path="source")
        for node, confidence, why in param_sources(index, pt) + env_sources(index, pt):
            tb.call("propose_source", location=self._location(index, node), description=why, confidence=confidence)
        for node, confidence, why in cwe_sinks(cwe, index, pt):
            if index.has_node(node):
                tb.call("propose_sink", location=self._location(index, node), description=why, confidence=confidence)
        tb.call("view_proposed_sources_sinks", verbose=False, item_type="all")
        n_src, n_snk = len(tb.state.sources), len(tb.state.sinks)
        tb.call(
            "complete_discovery",
            justification="exported entry points, environment-read catalog and the sink table for this weakness class",
            summary=f"{n_src} sources, {n_snk} sinks",
            confidence=4,
        )

    # call graph ---------------------------------------------------------------------

    def _chain(self, index: ProgramIndex, pt: PointsTo, expr: Node) -> list[str]:
        steps: list[str] = []
        seen: set[int] = set()
        cur: Optional[Node] = strip_parens(expr)
        while cur is not None and len(steps) < MAX_TRACE and id(cur) not in seen:
            seen.add(id(cur))
            nxt = None
            if cur.kind == "Ident":
                b = pt.binding(cur)
                if b is None or b.kind == "implicit":
                    steps.append(f"`{cur.value}` is a global")
                elif b.kind == "param":
                    fn = b.decl.parent.parent
                    pos = fn_params(fn).index(b.decl) + 1
                    steps.append(f"`{cur.value}` is parameter {pos} at line {b.decl.span[0]}; values come from its callers' arguments")
                elif b.kind == "function":
                    steps.append(f"`{cur.value}` names the function declared at line {b.decl.span[0]}")
                elif len(b.inits) == 1:
                    nxt = b.inits[0]
                    steps.append(f"`{cur.value}` is assigned `{snippet_label(nxt.snippet)}` at line {nxt.span[0]}")
                else:
                    loop = None
                    for w in b.writes:
                        parent = w.parent
                        if parent is not None and parent.kind == "Declarator":
                            parent = parent.parent.parent
                        if parent is not None and parent.kind in ("ForOf", "ForIn"):
                            loop = parent
                    if loop is not None:
                        nxt = loop.children[1]
                        steps.append(f"`{cur.value}` iterates over `{snippet_label(nxt.snippet)}` at line {loop.span[0]}")
                    else:
                        steps.append(f"`{cur.value}` has {len(b.inits)} assignments")
            elif cur.kind in ("Member", "ComputedMember"):
                steps.append(f"property lookup `{snippet_label(cur.snippet)}` at line {cur.span[0]}")
                nxt = cur.children[0]
            elif cur.kind in ("Call", "New"):
                steps.append(f"value produced by `{snippet_label(cur.snippet)}` at line {cur.span[0]}")
                callee = strip_parens(call_callee(cur))
                if callee.kind == "Member" and callee.value == "entries" and len(cur.children) > 1:
                    nxt = cur.children[1]
            cur = strip_parens(nxt) if nxt is not None else None
        return steps

    def _resolve(self, tb: Toolbelt, task: ResolutionTask) -> None:
        index = tb.index
        pt = self.points_to(index)
        call = index.ast(task.invocation)
        flow = index.node(task.invocation)
        lo = max(1, flow.span[0] - 3)
        tb.call("view_src", file_path=f"source/{flow.file}", start_line=lo, end_line=flow.span[2] + 3)
        values = pt.callee_values(call)
        fns = pt.functions_of(values)
        head = f"call site {flow.file}:{flow.span[0]}:{flow.span[1]} `{flow.label}`"
        chain = self._chain(index, pt, call_callee(call))
        if fns:
            files = sorted({pt.path_of[id(f)] for f in fns})
            listing: set[int] = set()
            for path in files:
                listing.update(hit["function_index"] for hit in tb.call("search_functions", file_path=path)["functions"])
            confidence = 5 if all(isinstance(v, Fn) for v in values) else 4
            candidates = []
            for fn in fns:
                entry = index.function_for_ast(fn)
                if entry is None or entry.index not in listing:
                    tb.call(
                        "mark_target_not_indexed",
                        target_file=pt.path_of[id(fn)],
                        target_line=fn.span[0],
                        target_name=fn.first("BindingIdent").value if fn.first("BindingIdent") else "<anonymous>",
                        explanation="definition reached by the trace is missing from the function index",
                    )
                    continue
                where = f"definition `{entry.name or '<anonymous>'}` at {entry.file}:{entry.span[0]}"
                candidates.append({"function_index": entry.index, "trace_steps": [head, *chain, where], "confidence": confidence})
            for start in range(0, len(candidates), MAX_FP_BATCH):
                tb.call("propose_fp", candidates=candidates[start : start + MAX_FP_BATCH])
            if tb.state.fp:
                tb.call("view_proposed_callees", verbose=False)
                tb.call("complete_resolution", status="resolved", summary=f"{len(tb.state.fp)} first-party callees")
                return
        libs = pt.libraries_of(values)
        if libs:
            lib = libs[0]
            site = self._require_site(index, flow.file, lib)
            module_path = self._module_path(index, lib)
            tb.call(
                "propose_tp",
                library_name=lib,
                metadata={"library_type": "npm", "module_path": module_path, "import_statement": site},
                confidence=5 if site else 4,
                reasoning=f"the callee is obtained from the {lib} module",
            )
            tb.call("complete_resolution", status="resolved", summary=f"third-party call into {lib}")
            return
        builtins = sorted(v.path for v in values if isinstance(v, Global))
        reason = f"callee is the runtime API {builtins[0]}" if builtins else "no definition reaches the callee"
        tb.call("complete_resolution", status="unresolvable", summary=reason)

    @staticmethod
    def _require_site(index: ProgramIndex, path: str, lib: str) -> str:
        sites = [s for s in index.requires if library_name(s.specifier) == lib and s.resolved is None]
        sites.sort(key=lambda s: (s.file != path, s.file, index.node(s.node).span))
        if not sites:
            return ""
        site = sites[0]
        line = index.node(site.node).span[0]
        return index.files[site.file].line(line).strip()

    @staticmethod
    def _module_path(index: ProgramIndex, lib: str) -> str:
        files = [p for p in index.npm_files if p.startswith(f"node_modules/{lib}/") and p.endswith(".js")]
        if not files:
            return f"npm/{lib}"
        main = next((p for p in files if p.endswith("/index.js")), files[0])
        return "npm/" + main.split("node_modules/", 1)[1]

    # flow summary ------------------------------------------------------------------------

    def _classify(self, tb: Toolbelt, task: SummaryTask) -> None:
        index = tb.index
        pt = self.points_to(index)
        call = index.ast(task.invocation)
        flow = index.node(task.invocation)
        head = f"call site {flow.file}:{flow.span[0]} `{flow.label}`"
        tb.call("view_src", file_path=f"source/{flow.file}", start_line=max(1, flow.span[0] - 2), end_line=flow.span[2] + 2)
        callee = strip_parens(call_callee(call))
        values = set(pt.callee_values(call))
        if callee.kind in ("Member", "ComputedMember"):
            values |= pt.values(callee.children[0])
        libs = pt.libraries_of(values) or ([task.library] if task.library else [])
        method = callee.value if callee.kind == "Member" else None
        if not libs:
            self._verdict(tb, "unknown", 1, [head, "the callee does not come from an identifiable library"])
            return
        lib = libs[0]
        lib_files = {p: t for p, t in index.npm_files.items() if p.startswith(f"node_modules/{lib}/") and p.endswith(".js")}
        if not lib_files:
            self._verdict(tb, "unknown", 1, [head, f"library {lib} is not available under npm/"])
            return
        tb.call("view_dir", path=f"npm/{lib}")
        entry_file, entry_line, body = self._method_body(lib_files, method)
        entry = f"library entry {entry_file}:{entry_line} `{method or 'call'}`"
        tb.call("view_src", file_path="npm/" + entry_file.split("node_modules/", 1)[1], start_line=entry_line, end_line=entry_line + 8)
        escape_at = self._escape_point(lib_files)
        plugin = self._overriding_plugin(index, pt, lib, tb)
        if plugin is not None:
            use_site, plugin_where = plugin
            steps = [
                head,
                entry,
                f"{method or 'the call'} delegates output generation to the renderer rules",
                f"default rules escape markup at {escape_at}" if escape_at else "the default rules do not escape markup",
                f"plugin registered with `{use_site}`",
                f"plugin replaces renderer rules at {plugin_where}",
                "the replaced rules return the argument text unescaped to the caller",
            ]
            self._verdict(tb, "propagates", 5, steps)
            return
        escape_in_body = next((name for name in ESCAPE_NAMES if re.search(rf"\b{name}\s*\(", body)), None)
        if escape_in_body:
            self._verdict(tb, "sanitizes", 4, [head, entry, f"`{escape_in_body}` encodes the argument before it is returned", "library exit returns encoded text"])
            return
        self._verdict(tb, "propagates", 3, [head, entry, "no encoding step on the traced path", "library exit returns text derived from the argument"])

    @staticmethod
    def _verdict(tb: Toolbelt, cls: str, confidence: int, steps: list[str]) -> None:
        names = {"propagates": "propagates-taint", "sanitizes": "sanitizes-taint", "unknown": "unknown"}
        tb.call("classify_edge", flow_trace={"classification": names[cls], "confidence": confidence, "steps": steps})

    @staticmethod
    def _method_body(files: dict[str, str], method: Optional[str]) -> tuple[str, int, str]:
        ordered = sorted(files, key=lambda p: (not p.endswith("/index.js"), p))
        if method:
            pattern = re.compile(rf"(\b{re.escape(method)}\s*[:=]\s*function\b|\bfunction\s+{re.escape(method)}\s*\()")
            for path in ordered:
                lines = files[path].split("\n")
                for n, line in enumerate(lines, start=1):
                    if pattern.search(line):
                        body = []
                        for follow in lines[n - 1 :]:
                            body.append(follow)
                            if follow.startswith("}") or follow.strip() == "};":
                                break
                        return path, n, "\n".join(body)
        first = ordered[0]
        return first, 1, files[first]

    @staticmethod
    def _escape_point(files: dict[str, str]) -> str:
        for path in sorted(files):
            for n, line in enumerate(files[path].split("\n"), start=1):
                if any(re.search(rf"\b{name}\s*\(", line) for name in ESCAPE_NAMES):
                    return f"{path}:{n}"
        return ""

    def _overriding_plugin(self, index: ProgramIndex, pt: PointsTo, lib: str, tb: Toolbelt):
        for call in pt.calls:
            callee = strip_parens(call_callee(call))
            if callee.kind != "Member" or callee.value != "use" or len(call.children) < 2:
                continue
            if Ext(lib) not in pt.values(callee.children[0]):
                continue
            use_site = snippet_label(call.snippet)
            tb.call("find_string", search=".use(", max_results=20, start_index=0)
            for v in sorted(pt.values(call.children[1]), key=repr):
                texts: list[tuple[str, str]] = []
                if isinstance(v, Fn):
                    path = pt.path_of[id(v.node)]
                    texts.append((path, index.files[path].text))
                elif isinstance(v, Module):
                    texts.append((v.path, index.files[v.path].text))
                elif isinstance(v, Ext):
                    texts += [(p, t) for p, t in index.npm_files.items() if p.startswith(f"node_modules/{v.lib}/")]
                for path, text in texts:
                    for n, line in enumerate(text.split("\n"), start=1):
                        if ".renderer.rules" in line and "=" in line:
                            return use_site, f"{path}:{n}"
        return None
