from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jstaint.fixtures import bundled_fixtures, bundled_fixture
from jstaint.frontend import LexError, ParseError, SourceFile, parse_expression, parse_source, tokenize
from jstaint.frontend.ast import call_args, call_callee, fn_params, fn_name


def kinds(text):
    return [(t.kind, t.value) for t in tokenize(SourceFile("a.js", text))]


def test_smallest_statement_tokens():
    assert kinds("const x = 1;") == [
        ("keyword", "const"), ("ident", "x"), ("punct", "="), ("num", "1"), ("punct", ";"), ("eof", ""),
    ]


def test_template_has_one_slot():
    toks = tokenize(SourceFile("a.js", "`a${b}c`"))
    assert [t.kind for t in toks[:-1]] == ["template_head", "ident", "template_tail"]
    assert toks[0].value == "a" and toks[2].value == "c"


def test_illegal_character_reports_position():
    with pytest.raises(LexError) as exc:
        tokenize(SourceFile("a.js", "\u0000"))
    assert (exc.value.line, exc.value.col) == (1, 1)


def test_tokens_and_gaps_reproduce_input():
    text = "let a = `x${b + 1}y`; /* c */ f(a, 'q'); // tail\n"
    toks = tokenize(SourceFile("a.js", text))
    rebuilt, pos = [], 0
    for t in toks:
        gap = text[pos : t.start]
        assert gap.strip() == "" or gap.strip().startswith(("//", "/*"))
        rebuilt.append(gap + t.text)
        pos = t.end
    assert "".join(rebuilt) + text[pos:] == text


def test_function_declaration_shape():
    prog = parse_source("function f(x){return x}")
    (fn,) = prog.children
    assert fn.kind == "FunctionDecl"
    assert fn_name(fn).value == "f"
    assert [p.snippet for p in fn_params(fn)] == ["x"]
    ret = fn.children[-1].children[0]
    assert ret.kind == "Return" and ret.children[0].kind == "Ident"


def test_iife_wraps_named_function_expression():
    prog = parse_source("(function(){ return function mrk(input){} })();")
    call = prog.children[0].children[0]
    assert call.kind == "Call"
    outer = call_callee(call)
    while outer.kind == "Paren":
        outer = outer.children[0]
    assert outer.kind == "FunctionExpr"
    inner = outer.children[-1].children[0].children[0]
    assert inner.kind == "FunctionExpr" and fn_name(inner).value == "mrk"


def test_computed_member_call_shape():
    call = parse_expression("obj[key](a)")
    assert call.kind == "Call"
    assert call_callee(call).kind == "ComputedMember"
    assert [a.snippet for a in call_args(call)] == ["a"]
    assert parse_expression(call.snippet).shape() == call.shape()


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as exc:
        parse_source("let = ;", "x.js")
    assert (exc.value.line, exc.value.col) == (1, 5)
    assert "identifier" in exc.value.expected


def test_semicolons_required():
    with pytest.raises(ParseError):
        parse_source("a = 1\nb = 2;")


def _fixture_files():
    for name in bundled_fixtures():
        for path in sorted(bundled_fixture(name).rglob("*.js")):
            if "node_modules" not in path.parts:
                yield pytest.param(path, id=f"{name}/{path.name}")


@pytest.mark.parametrize("path", list(_fixture_files()))
def test_fixture_round_trip_and_spans(path):
    text = path.read_text(encoding="utf-8")
    prog = parse_source(text, path.name)
    src = SourceFile(path.name, text)
    last = (0, 0)
    for node in prog.walk():
        sl, sc, el, ec = node.span
        assert (sl, sc) >= last
        last = (sl, sc)
        assert node.snippet == text[node.start : node.end]
        assert src.offset(sl, sc) == node.start
        assert src.slice(node.span) == node.snippet
        for child in node.children:
            assert (sl, sc) <= child.span[:2] and child.span[2:] <= (el, ec)
        if node.kind in ("Call", "Member", "ComputedMember", "Binary", "Template", "Object", "Arrow"):
            assert parse_expression(node.snippet).shape() == node.shape()


IDENT = st.sampled_from(["a", "b", "obj", "key", "fn"])


def _expr():
    leaf = st.one_of(IDENT, st.integers(0, 99).map(str), st.sampled_from(['"s"', "'t'"]))

    def extend(inner):
        return st.one_of(
            st.tuples(inner, IDENT).map(lambda t: f"({t[0]}).{t[1]}" if t[0].isdigit() else f"{t[0]}.{t[1]}"),
            st.tuples(inner, inner).map(lambda t: f"{t[0]}[{t[1]}]"),
            st.tuples(inner, st.lists(inner, max_size=3)).map(lambda t: f"{t[0]}({', '.join(t[1])})"),
            st.tuples(inner, st.sampled_from(["+", "===", "!==", "<"]), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
            inner.map(lambda e: f"`x${{{e}}}y`"),
        )

    return st.recursive(leaf, extend, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(_expr())
def test_generated_expressions_round_trip(text):
    node = parse_expression(text)
    assert node.snippet == text
    for sub in node.walk():
        assert parse_expression(sub.snippet).shape() == sub.shape()
