"""Program registries: FlowNodes, functions, invocations and module imports."""

from .boundary import classify_boundary
from .program import (
    DEFAULT_TEST_DIRS,
    DEFAULT_TEST_FILES,
    FLOW_KINDS,
    EmptyQuery,
    FlowNode,
    FunctionEntry,
    InvocationEntry,
    ProgramIndex,
    RequireSite,
    TestDirRule,
    build_program_index,
    discover_files,
    flow_kind,
    index_from_sources,
    snippet_label,
)
from .scopes import Binding, Scope, ScopeResolver

__all__ = [
    "DEFAULT_TEST_DIRS",
    "DEFAULT_TEST_FILES",
    "FLOW_KINDS",
    "Binding",
    "EmptyQuery",
    "FlowNode",
    "FunctionEntry",
    "InvocationEntry",
    "ProgramIndex",
    "RequireSite",
    "Scope",
    "ScopeResolver",
    "TestDirRule",
    "build_program_index",
    "classify_boundary",
    "discover_files",
    "flow_kind",
    "index_from_sources",
    "snippet_label",
]
