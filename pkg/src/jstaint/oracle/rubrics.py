"""Prompt text for the remote backend, one template per role.

The confidence scales are written for this tool; each level names the
evidence it needs so that scores stay comparable between runs.
"""

from __future__ import annotations

CALLGRAPH_RUBRIC = """Confidence scale for proposed callees:
5 - the trace reaches the definition with no guesswork: every step is a plain assignment, property lookup or import you have read.
4 - the call is dynamic, but several independent observations point at the same targets.
3 - one step of the trace is inferred rather than read.
2 - more than one step is inferred.
1 - the target is a plausible guess.
When in doubt pick the lower score and say which step is uncertain."""

SOURCE_SINK_RUBRIC = """Confidence scale for sources and sinks:
5 - a caller outside the package fully controls the value (or the operation is directly exploitable) and no check stands in the way.
4 - control or exploitability is clear, but a partial check or an unusual precondition exists.
3 - plausible, with at least one assumption about how the package is used.
2 - weak evidence.
1 - speculative.
Justify each score from code you have viewed; never score from names alone."""

FLOWSUMMARY_RUBRIC = """Confidence scale for edge classifications:
5 - you read the library code on the traced path (or its own reference documentation) and it settles the question.
4 - you read most of the path; the rest follows from clear naming and structure.
3 - the classification rests partly on inference about library behaviour.
2 - mostly inference.
1 - guess.
Classify as unknown rather than guessing between propagates-taint and sanitizes-taint."""

SYSTEM = {
    "source_sink": (
        "You look for taint sources and sinks in a JavaScript package for one weakness class. "
        "Browse with view_dir, view_src and find_string; record findings with propose_source and propose_sink; "
        "finish with complete_discovery.\n\n" + SOURCE_SINK_RUBRIC
    ),
    "callgraph": (
        "You resolve one call site whose callee static analysis could not determine. "
        "Trace the callee expression back to function definitions and propose them with propose_fp "
        "(at most 5 per call, function indices come from search_functions), or mark a third-party target with propose_tp. "
        "Finish with complete_resolution; report unresolvable instead of guessing.\n\n" + CALLGRAPH_RUBRIC
    ),
    "flowsummary": (
        "You decide whether a call into a third-party library carries tainted data from its arguments "
        "to its result for one weakness class. Read the library under npm/ and any plugins registered on it, "
        "then call classify_edge once with the full trace.\n\n" + FLOWSUMMARY_RUBRIC
    ),
}


def user_prompt(role: str, **fields) -> str:
    lines = [f"{k.replace('_', ' ')}: {v}" for k, v in fields.items() if v not in (None, "")]
    return "\n".join(lines)
