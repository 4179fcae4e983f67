"""Tool surface shared by every backend.

Browsing tools are read-only over three namespaces: ``source/`` (the
package's first-party files), ``npm/`` (its ``node_modules`` tree) and
``builtin/`` (stub catalogs of runtime APIs).  Proposal tools only append
to the per-run state; the pipeline reads that state when the run ends.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional

import jsonschema

from ..cwe import CweContext, data_lines
from ..index import EmptyQuery, ProgramIndex
from ..specs.model import EndpointLocation
from .types import CLASSIFICATIONS, EndpointProposal, FpCandidate, TpMetadata, Transcript

MAX_FP_BATCH = 5

_LOCATION = {
    "type": "object",
    "properties": {
        "file_path": {"type": "string"},
        "line": {"type": "integer", "minimum": 1},
        "column": {"type": "integer", "minimum": 1},
        "snippet": {"type": "string", "minLength": 1},
    },
    "required": ["file_path", "line", "column", "snippet"],
    "additionalProperties": False,
}
_CONFIDENCE = {"type": "integer", "minimum": 1, "maximum": 5}


def _tool(name: str, description: str, properties: dict, required: list[str]) -> dict:
    return {
        "name": name,
        "description": description,
        "parameters": {"type": "object", "properties": properties, "required": required, "additionalProperties": False},
    }


TRAVERSAL_TOOLS = [
    _tool(
        "view_src",
        "Return numbered source lines of an indexed file (namespaced path such as source/lib/a.js).",
        {"file_path": {"type": "string"}, "start_line": {"type": "integer", "minimum": 1}, "end_line": {"type": "integer", "minimum": 1}},
        ["file_path"],
    ),
    _tool("view_dir", "Return the file tree under a namespaced directory.", {"path": {"type": "string"}}, []),
    _tool(
        "find_string",
        "Find occurrences of a literal string across all indexed files, paginated.",
        {
            "search": {"type": "string", "minLength": 1},
            "max_results": {"type": "integer", "minimum": 1},
            "start_index": {"type": "integer", "minimum": 0},
        },
        ["search"],
    ),
]

SOURCE_SINK_TOOLS = [
    _tool(
        "propose_source",
        "Propose a location where untrusted input enters the package.",
        {"location": _LOCATION, "description": {"type": "string"}, "confidence": _CONFIDENCE},
        ["location", "description", "confidence"],
    ),
    _tool(
        "propose_sink",
        "Propose a location where a dangerous operation consumes data.",
        {"location": _LOCATION, "description": {"type": "string"}, "confidence": _CONFIDENCE},
        ["location", "description", "confidence"],
    ),
    _tool(
        "view_proposed_sources_sinks",
        "List the sources and sinks proposed so far in this run.",
        {"verbose": {"type": "boolean"}, "item_type": {"type": "string", "enum": ["all", "source", "sink"]}},
        [],
    ),
    _tool(
        "complete_discovery",
        "Finish discovery and summarize the search strategy.",
        {"justification": {"type": "string"}, "summary": {"type": "string"}, "confidence": _CONFIDENCE},
        ["justification", "summary", "confidence"],
    ),
]

CALLGRAPH_TOOLS = [
    _tool(
        "search_functions",
        "Search the function index by name and/or file path (case-insensitive substring match).",
        {"function_name": {"type": "string"}, "file_path": {"type": "string"}},
        [],
    ),
    _tool(
        "propose_fp",
        f"Propose up to {MAX_FP_BATCH} first-party callees, each with a trace from the call site to the definition.",
        {
            "candidates": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "properties": {
                        "function_index": {"type": "integer", "minimum": 0},
                        "trace_steps": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                        "confidence": _CONFIDENCE,
                    },
                    "required": ["function_index", "trace_steps", "confidence"],
                    "additionalProperties": False,
                },
            }
        },
        ["candidates"],
    ),
    _tool(
        "propose_tp",
        "Mark the call as targeting a third-party library.",
        {
            "library_name": {"type": "string", "minLength": 1},
            "metadata": {
                "type": "object",
                "properties": {
                    "library_type": {"type": "string"},
                    "module_path": {"type": "string"},
                    "import_statement": {"type": "string"},
                },
                "required": ["module_path", "import_statement"],
            },
            "confidence": _CONFIDENCE,
            "reasoning": {"type": "string"},
        },
        ["library_name", "metadata", "confidence", "reasoning"],
    ),
    _tool(
        "mark_target_not_indexed",
        "Record a target found in source that is missing from the function index.",
        {
            "target_file": {"type": "string"},
            "target_line": {"type": "integer", "minimum": 1},
            "target_name": {"type": "string"},
            "explanation": {"type": "string"},
        },
        ["target_file", "target_line", "target_name", "explanation"],
    ),
    _tool("view_proposed_callees", "List the callees proposed so far in this run.", {"verbose": {"type": "boolean"}}, []),
    _tool(
        "complete_resolution",
        "Finish the task as resolved or unresolvable.",
        {"status": {"type": "string", "enum": ["resolved", "unresolvable"]}, "summary": {"type": "string"}},
        ["status", "summary"],
    ),
]

FLOWSUMMARY_TOOLS = [
    _tool(
        "classify_edge",
        "Classify the third-party edge as propagates-taint, sanitizes-taint or unknown, with a trace through the library.",
        {
            "flow_trace": {
                "type": "object",
                "properties": {
                    "classification": {"type": "string", "enum": ["propagates-taint", "sanitizes-taint", "unknown"]},
                    "confidence": _CONFIDENCE,
                    "steps": {"type": "array", "items": {"type": "string"}},
                    "sanitization_points": {"type": "array", "items": {"type": "string"}},
                },
                "required": ["classification", "confidence", "steps"],
                "additionalProperties": False,
            }
        },
        ["flow_trace"],
    ),
]

ROLE_TOOLS = {
    "source_sink": TRAVERSAL_TOOLS + SOURCE_SINK_TOOLS,
    "callgraph": TRAVERSAL_TOOLS + CALLGRAPH_TOOLS,
    "flowsummary": TRAVERSAL_TOOLS + FLOWSUMMARY_TOOLS,
}
COMPLETION_TOOLS = {"source_sink": "complete_discovery", "callgraph": "complete_resolution", "flowsummary": "classify_edge"}
CLASS_NAMES = {"propagates-taint": "propagates", "sanitizes-taint": "sanitizes", "unknown": "unknown"}


class ToolError(ValueError):
    """Bad tool arguments; the message goes back to the caller."""


def tool_schemas(role: str) -> list[dict]:
    return copy.deepcopy(ROLE_TOOLS[role])


@dataclass
class RunState:
    sources: list[EndpointProposal] = field(default_factory=list)
    sinks: list[EndpointProposal] = field(default_factory=list)
    fp: list[FpCandidate] = field(default_factory=list)
    tp: Optional[TpMetadata] = None
    tp_confidence: int = 0
    not_indexed: list[dict] = field(default_factory=list)
    completed: Optional[str] = None  # resolved unresolvable done or a classification
    summary: str = ""
    confidence: int = 0
    steps: tuple[str, ...] = ()


class Toolbelt:
    def __init__(
        self,
        index: ProgramIndex,
        role: str,
        transcript: Transcript,
        cwe: Optional[CweContext] = None,
    ) -> None:
        if role not in ROLE_TOOLS:
            raise ValueError(f"unknown role {role!r}")
        self.index = index
        self.role = role
        self.transcript = transcript
        self.cwe = cwe
        self.state = RunState()
        self._schemas = {t["name"]: t for t in ROLE_TOOLS[role]}
        self._files = self._namespaces()

    # namespaces -----------------------------------------------------------------

    def _namespaces(self) -> dict[str, str]:
        files = {f"source/{p}": f.text for p, f in self.index.files.items()}
        for p, text in self.index.npm_files.items():
            rel = p.split("node_modules/", 1)[1] if "node_modules/" in p else p
            files[f"npm/{rel}"] = text
        files["builtin/apis.txt"] = "\n".join(data_lines("builtin_apis.txt")) + "\n"
        files["builtin/modules.txt"] = "\n".join(data_lines("builtin_modules.txt")) + "\n"
        return dict(sorted(files.items()))

    def _resolve_path(self, path: str) -> str:
        if path in self._files:
            return path
        if f"source/{path}" in self._files:
            return f"source/{path}"
        raise ToolError(f"no such file: {path}; paths start with source/, npm/ or builtin/")

    # dispatch -------------------------------------------------------------------------

    @property
    def completed(self) -> bool:
        return self.state.completed is not None

    def dispatch(self, name: str, arguments: dict) -> object:
        """Validate and run one tool call, recording it in the transcript.
        Raises ToolError for unknown tools or malformed arguments."""
        schema = self._schemas.get(name)
        if schema is None:
            err = f"unknown tool {name!r} for role {self.role}"
            self.transcript.record(name, arguments, {"error": err})
            raise ToolError(err)
        try:
            jsonschema.validate(arguments, schema["parameters"])
        except jsonschema.ValidationError as exc:
            err = f"invalid arguments for {name}: {exc.message}"
            self.transcript.record(name, arguments, {"error": err})
            raise ToolError(err) from None
        try:
            result = getattr(self, f"_t_{name}")(**arguments)
        except ToolError as exc:
            result = {"error": str(exc)}
        return self.transcript.record(name, arguments, result)

    def call(self, name: str, **arguments) -> object:
        return self.dispatch(name, arguments)

    # traversal ----------------------------------------------------------------------------

    def _t_view_src(self, file_path: str, start_line: int = 1, end_line: Optional[int] = None) -> dict:
        path = self._resolve_path(file_path)
        lines = self._files[path].split("\n")
        end = len(lines) if end_line is None else min(end_line, len(lines))
        body = [f"{n:5d} | {lines[n - 1]}" for n in range(start_line, end + 1)]
        return {"file_path": path, "lines": body}

    def _t_view_dir(self, path: str = "") -> dict:
        prefix = path.rstrip("/") + "/" if path else ""
        entries = [p for p in self._files if p.startswith(prefix)]
        if path and not entries:
            raise ToolError(f"no such directory: {path}")
        return {"path": path or "/", "files": entries}

    def _t_find_string(self, search: str, max_results: int = 20, start_index: int = 0) -> dict:
        hits = []
        for path, text in self._files.items():
            for n, line in enumerate(text.split("\n"), start=1):
                if search in line:
                    hits.append(f"{path}:{n}: {line.strip()}")
        page = hits[start_index : start_index + max_results]
        return {"total": len(hits), "start_index": start_index, "results": page}

    # source / sink ---------------------------------------------------------------------------

    def _endpoint(self, role: str, location: dict, description: str, confidence: int) -> dict:
        path = location["file_path"]
        if path.startswith("source/"):
            path = path[len("source/") :]
        elif path.startswith(("npm/", "builtin/")):
            raise ToolError("sources and sinks must lie in the package's own files (source/)")
        loc = EndpointLocation(path, location["line"], location["column"], location["snippet"])
        prop = EndpointProposal(role, loc, confidence, description)
        bucket = self.state.sources if role == "source" else self.state.sinks
        if any(p.key() == prop.key() for p in bucket):
            return {"status": "duplicate", "key": prop.key()}
        bucket.append(prop)
        return {"status": "recorded", "key": prop.key()}

    def _t_propose_source(self, location: dict, description: str, confidence: int) -> dict:
        return self._endpoint("source", location, description, confidence)

    def _t_propose_sink(self, location: dict, description: str, confidence: int) -> dict:
        return self._endpoint("sink", location, description, confidence)

    def _t_view_proposed_sources_sinks(self, verbose: bool = False, item_type: str = "all") -> dict:
        out = {}
        for kind, bucket in (("source", self.state.sources), ("sink", self.state.sinks)):
            if item_type in ("all", kind):
                out[kind + "s"] = [
                    {"key": p.key(), "confidence": p.confidence, **({"description": p.reason} if verbose else {})}
                    for p in bucket
                ]
        return out

    def _t_complete_discovery(self, justification: str, summary: str, confidence: int) -> dict:
        self.state.completed = "done"
        self.state.summary = summary
        self.state.confidence = confidence
        return {"status": "complete", "sources": len(self.state.sources), "sinks": len(self.state.sinks)}

    # call graph ---------------------------------------------------------------------------------

    def _t_search_functions(self, function_name: Optional[str] = None, file_path: Optional[str] = None) -> dict:
        if file_path and file_path.startswith("source/"):
            file_path = file_path[len("source/") :]
        try:
            hits = self.index.lookup_functions(function_name or None, file_path or None)
        except EmptyQuery as exc:
            raise ToolError(str(exc)) from None
        return {
            "functions": [
                {"function_index": f.index, "name": f.name, "file_path": f"source/{f.file}", "span": list(f.span)}
                for f in hits
            ]
        }

    def _t_propose_fp(self, candidates: list[dict]) -> dict:
        if len(candidates) > MAX_FP_BATCH:
            raise ToolError(f"propose at most {MAX_FP_BATCH} candidates per call")
        n = len(self.index.functions)
        missing = [c["function_index"] for c in candidates if c["function_index"] >= n]
        if missing:
            raise ToolError(
                f"function indices {missing} are not in the function index; use search_functions, "
                "or mark_target_not_indexed if the target exists in source but is missing from the index"
            )
        accepted = []
        for c in candidates:
            cand = FpCandidate(c["function_index"], tuple(c["trace_steps"]), c["confidence"])
            if all(existing.function_index != cand.function_index for existing in self.state.fp):
                self.state.fp.append(cand)
                accepted.append(cand.function_index)
        return {"accepted": accepted, "total": len(self.state.fp)}

    def _t_propose_tp(self, library_name: str, metadata: dict, confidence: int, reasoning: str) -> dict:
        self.state.tp = TpMetadata(library_name, metadata["module_path"], metadata["import_statement"])
        self.state.tp_confidence = confidence
        return {"status": "recorded", "library": library_name}

    def _t_mark_target_not_indexed(self, target_file: str, target_line: int, target_name: str, explanation: str) -> dict:
        entry = {"target_file": target_file, "target_line": target_line, "target_name": target_name, "explanation": explanation}
        self.state.not_indexed.append(entry)
        return {"status": "recorded"}

    def _t_view_proposed_callees(self, verbose: bool = False) -> dict:
        out = {"first_party": [c.function_index for c in self.state.fp]}
        if verbose:
            out["traces"] = {str(c.function_index): list(c.trace) for c in self.state.fp}
        if self.state.tp is not None:
            out["third_party"] = self.state.tp.library
        return out

    def _t_complete_resolution(self, status: str, summary: str) -> dict:
        if status == "resolved" and not self.state.fp and self.state.tp is None:
            raise ToolError("nothing proposed; propose callees first or complete as unresolvable")
        self.state.completed = status
        self.state.summary = summary
        return {"status": status}

    # flow summary --------------------------------------------------------------------------------

    def _t_classify_edge(self, flow_trace: dict) -> dict:
        cls = CLASS_NAMES[flow_trace["classification"]]
        assert cls in CLASSIFICATIONS
        self.state.completed = cls
        self.state.confidence = flow_trace["confidence"]
        self.state.steps = tuple(flow_trace["steps"])
        return {"status": "recorded", "classification": cls}
