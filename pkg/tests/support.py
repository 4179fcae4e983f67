"""Shared helpers for the pipeline-level tests."""

from __future__ import annotations

from hypothesis import strategies as st

from jstaint.cwe import load_cwe
from jstaint.engine import best_match, load_annotations, run_query
from jstaint.fixtures import bundled_fixture
from jstaint.oracle import DeterministicBackend, Oracle
from jstaint.specs import SENTINEL_SPAN, CallEdgeFact, EndpointLocation, SinkFact, SourceFact, SpanLocation, validate_facts
from jstaint.ticr import run_ticr


def annotation_of(name):
    (ann,) = load_annotations(bundled_fixture(name) / "annotation.json")
    return ann


def annotated_specs(index, ann, edges=()):
    """Validated specs whose only source and sink are the annotated ones."""
    return validate_facts([SourceFact(1, ann.source, 5)], [SinkFact(1, ann.sink, 5)], list(edges), index)


def deterministic_oracle(cwe="79", **kwargs):
    return Oracle(DeterministicBackend(), cwe=load_cwe(cwe), **kwargs)


def ticr_detects(index, ann, ruleset, directions=("forward", "backward"), limit=2):
    """Run TICR from the annotated endpoints, then query; the grading of the
    best alert against the annotation."""
    specs = annotated_specs(index, ann)
    state = run_ticr(index, specs, deterministic_oracle(ann.cwe), directions=directions, access_path_limit=limit)
    after = annotated_specs(index, ann, state.resolved_edges)
    result = run_query(index, ann.cwe, ruleset, after, access_path_limit=limit)
    return best_match(result.active, ann, index), state


# -- random valid fact sets ---------------------------------------------------------

TEXT = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"), min_size=1, max_size=20)
FILES = st.sampled_from(["a.js", "lib/b,c.js", 'q"uote.js', "dir with space/x.js"])
POS = st.integers(1, 500)


@st.composite
def endpoint_facts(draw, cls):
    ids = draw(st.lists(st.integers(1, 10_000), unique=True, max_size=6))
    return [
        cls(i, EndpointLocation(draw(FILES), draw(POS), draw(POS), draw(TEXT)), draw(st.integers(1, 5)))
        for i in ids
    ]


@st.composite
def spans(draw):
    sl, sc = draw(POS), draw(POS)
    el = sl + draw(st.integers(0, 5))
    ec = draw(st.integers(sc if el == sl else 1, 600))
    return SpanLocation(draw(FILES), sl, sc, el, ec)


@st.composite
def edge_facts(draw):
    ids = draw(st.lists(st.integers(1, 10_000), unique=True, max_size=6))
    out = []
    for i in ids:
        kind = draw(st.sampled_from(["first", "third"]))
        target = draw(spans()) if kind == "first" else draw(st.one_of(spans(), st.just(SENTINEL_SPAN)))
        out.append(
            CallEdgeFact(i, draw(spans()), target, kind, draw(st.integers(1, 5)), draw(st.sampled_from(["active", "ignored"])))
        )
    return out


# -- acceptance bookkeeping ---------------------------------------------------------

CRITERIA: dict[int, tuple[bool, str]] = {}


class criterion:
    """Records PASS or FAIL for one acceptance criterion and prints the line;
    failures re-raise so pytest reports them too."""

    def __init__(self, number: int) -> None:
        self.number = number
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def __enter__(self) -> "criterion":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        ok = exc_type is None
        detail = "; ".join(self.details)
        if not ok:
            detail = f"{detail}; {exc_type.__name__}: {exc}".lstrip("; ")
        CRITERIA[self.number] = (ok, detail)
        print(f"criterion {self.number}: {'PASS' if ok else 'FAIL'} {detail}")
        return False
