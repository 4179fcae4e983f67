"""Recursive-descent parser for MiniJS.

Grammar summary (no ASI; a missing ``;`` is tolerated only before ``}`` or
end of input)::

    stmt  := var-decl | function-decl | if | while | for | for-of | for-in
           | return | break | continue | block | ";" | expr ";"
    expr  := assignment with arrows, ?:, ||, &&, equality, relational,
             additive, multiplicative, unary, postfix, call/member, primary

Every node records character offsets, an inclusive 1-based span and the
verbatim snippet of its source range.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .ast import FUNCTION_KINDS, Node
from .lexer import Token, tokenize
from .source import SourceFile

ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")
BINARY_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("==", "!=", "===", "!=="),
    ("<", ">", "<=", ">=", "instanceof", "in"),
    ("+", "-"),
    ("*", "/", "%"),
]


class ParseError(Exception):
    def __init__(self, message: str, expected: Iterable[str], line: int, col: int, path: str = "") -> None:
        self.expected = tuple(sorted(set(expected)))
        self.line = line
        self.col = col
        self.path = path
        where = f"{path}:{line}:{col}" if path else f"{line}:{col}"
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}: {message}{exp}")


class Parser:
    def __init__(self, file: SourceFile, tokens: list[Token]) -> None:
        self.file = file
        self.toks = tokens
        self.i = 0
        self.no_in = False  # inside a for-in/for-of head

    # token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, expected: Iterable[str], tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        line, col = self.file.position(tok.start)
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"unexpected {found}", expected, line, col, self.file.path)

    def expect(self, value: str) -> Token:
        tok = self.tok
        if (tok.kind == "punct" or tok.kind == "keyword") and tok.value == value:
            return self.advance()
        raise self.fail([value])

    def accept(self, value: str) -> Optional[Token]:
        tok = self.tok
        if (tok.kind == "punct" or tok.kind == "keyword") and tok.value == value:
            return self.advance()
        return None

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.fail(["identifier"])
        return self.advance()

    def end_statement(self) -> int:
        if self.tok.is_punct(";"):
            return self.advance().end
        if self.tok.is_punct("}") or self.tok.kind == "eof":
            return self.toks[self.i - 1].end
        raise self.fail([";"])

    def node(self, kind: str, start: int, end: int, children: list[Node], value: Optional[str] = None) -> Node:
        n = Node(kind, children, start, end, self.file.span(start, end), self.file.text[start:end], value)
        for child in children:
            child.parent = n
        return n

    def leaf(self, kind: str, tok: Token, value: Optional[str] = None) -> Node:
        return self.node(kind, tok.start, tok.end, [], tok.value if value is None else value)

    # statements ----------------------------------------------------------

    def program(self) -> Node:
        body = []
        while self.tok.kind != "eof":
            body.append(self.statement())
        return self.node("Program", 0, len(self.file.text), body)

    def statement(self) -> Node:
        tok = self.tok
        if tok.kind == "keyword":
            kw = tok.value
            if kw in ("var", "let", "const"):
                decl = self.var_decl()
                end = self.end_statement()
                decl.end = end
                return self._refresh(decl)
            if kw == "function":
                return self.function("FunctionDecl")
            if kw == "return":
                self.advance()
                children = []
                if not (self.tok.is_punct(";", "}") or self.tok.kind == "eof"):
                    children.append(self.expression())
                end = self.end_statement()
                return self.node("Return", tok.start, end, children)
            if kw == "if":
                return self.if_statement()
            if kw == "while":
                self.advance()
                self.expect("(")
                test = self.expression()
                self.expect(")")
                body = self.statement()
                return self.node("While", tok.start, body.end, [test, body])
            if kw == "for":
                return self.for_statement()
            if kw in ("break", "continue"):
                self.advance()
                end = self.end_statement()
                return self.node(kw.capitalize(), tok.start, end, [])
        if tok.is_punct("{"):
            return self.block()
        if tok.is_punct(";"):
            self.advance()
            return self.node("Empty", tok.start, tok.end, [])
        expr = self.expression()
        end = self.end_statement()
        return self.node("ExprStmt", expr.start, end, [expr])

    def _refresh(self, n: Node) -> Node:
        n.span = self.file.span(n.start, n.end)
        n.snippet = self.file.text[n.start : n.end]
        return n

    def block(self) -> Node:
        open_ = self.expect("{")
        body = []
        while not self.tok.is_punct("}"):
            if self.tok.kind == "eof":
                raise self.fail(["}"])
            body.append(self.statement())
        close = self.advance()
        return self.node("Block", open_.start, close.end, body)

    def var_decl(self) -> Node:
        kw = self.advance()
        decls = [self.declarator()]
        while self.accept(","):
            decls.append(self.declarator())
        return self.node("VarDecl", kw.start, decls[-1].end, decls, kw.value)

    def declarator(self) -> Node:
        name = self.ident()
        binding = self.leaf("BindingIdent", name)
        children = [binding]
        if self.accept("="):
            children.append(self.assignment())
        return self.node("Declarator", name.start, children[-1].end, children, name.value)

    def if_statement(self) -> Node:
        kw = self.advance()
        self.expect("(")
        test = self.expression()
        self.expect(")")
        cons = self.statement()
        children = [test, cons]
        if self.accept("else"):
            children.append(self.statement())
        return self.node("If", kw.start, children[-1].end, children)

    def for_statement(self) -> Node:
        kw = self.advance()
        self.expect("(")
        # for-of / for-in with a single declared or plain identifier
        if self.tok.is_keyword("var", "let", "const") and self.peek().kind == "ident" and (
            self.peek(2).value in ("of", "in") and self.peek(2).kind in ("ident", "keyword")
        ):
            decl_kw = self.advance()
            name = self.advance()
            binding = self.leaf("BindingIdent", name)
            declarator = self.node("Declarator", name.start, name.end, [binding], name.value)
            head = self.node("VarDecl", decl_kw.start, name.end, [declarator], decl_kw.value)
            return self._for_each(kw, head)
        if self.tok.kind == "ident" and self.peek().value in ("of", "in") and self.peek().kind in ("ident", "keyword"):
            head = self.leaf("Ident", self.advance())
            return self._for_each(kw, head)
        init = self._empty_at(self.tok)
        if not self.tok.is_punct(";"):
            if self.tok.is_keyword("var", "let", "const"):
                init = self.var_decl()
            else:
                init = self.expression()
        self.expect(";")
        test = self._empty_at(self.tok) if self.tok.is_punct(";") else self.expression()
        self.expect(";")
        update = self._empty_at(self.tok) if self.tok.is_punct(")") else self.expression()
        self.expect(")")
        body = self.statement()
        return self.node("For", kw.start, body.end, [init, test, update, body])

    def _empty_at(self, tok: Token) -> Node:
        return self.node("Empty", tok.start, tok.start, [])

    def _for_each(self, kw: Token, head: Node) -> Node:
        which = self.advance().value
        iterable = self.expression()
        self.expect(")")
        body = self.statement()
        kind = "ForOf" if which == "of" else "ForIn"
        return self.node(kind, kw.start, body.end, [head, iterable, body])

    def function(self, kind: str) -> Node:
        kw = self.expect("function")
        children = []
        name = None
        if self.tok.kind == "ident":
            tok = self.advance()
            name = tok.value
            children.append(self.leaf("BindingIdent", tok))
        elif kind == "FunctionDecl":
            raise self.fail(["identifier"])
        children.append(self.params())
        body = self.block()
        children.append(body)
        return self.node(kind, kw.start, body.end, children, name)

    def params(self) -> Node:
        open_ = self.expect("(")
        params = []
        while not self.tok.is_punct(")"):
            params.append(self.leaf("Param", self.ident()))
            if not self.tok.is_punct(")"):
                self.expect(",")
        close = self.advance()
        return self.node("Params", open_.start, close.end, params)

    # expressions ---------------------------------------------------------

    def expression(self) -> Node:
        return self.assignment()

    def _arrow_ahead(self) -> bool:
        if self.tok.kind == "ident" and self.peek().is_punct("=>"):
            return True
        if not self.tok.is_punct("("):
            return False
        depth = 0
        j = self.i
        while j < len(self.toks):
            t = self.toks[j]
            if t.is_punct("(", "[", "{"):
                depth += 1
            elif t.is_punct(")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return self.toks[j + 1].is_punct("=>") if j + 1 < len(self.toks) else False
            elif t.kind == "eof":
                return False
            j += 1
        return False

    def arrow(self) -> Node:
        start = self.tok
        if start.kind == "ident":
            param = self.leaf("Param", self.advance())
            params = self.node("Params", start.start, start.end, [param])
        else:
            params = self.params()
        self.expect("=>")
        body = self.block() if self.tok.is_punct("{") else self.assignment()
        return self.node("Arrow", start.start, body.end, [params, body])

    def assignment(self) -> Node:
        if self._arrow_ahead():
            return self.arrow()
        left = self.conditional()
        if self.tok.kind == "punct" and self.tok.value in ASSIGN_OPS:
            op = self.tok
            if left.kind not in ("Ident", "Member", "ComputedMember"):
                raise self.fail(["assignable target"], op)
            self.advance()
            right = self.assignment()
            return self.node("Assign", left.start, right.end, [left, right], op.value)
        return left

    def conditional(self) -> Node:
        test = self.binary(0)
        if self.accept("?"):
            saved, self.no_in = self.no_in, False
            cons = self.assignment()
            self.no_in = saved
            self.expect(":")
            alt = self.assignment()
            return self.node("Conditional", test.start, alt.end, [test, cons, alt])
        return test

    def binary(self, level: int) -> Node:
        if level == len(BINARY_PRECEDENCE):
            return self.unary()
        left = self.binary(level + 1)
        ops = BINARY_PRECEDENCE[level]
        while self.tok.kind in ("punct", "keyword") and self.tok.value in ops:
            if self.no_in and self.tok.value == "in":
                break
            op = self.advance().value
            right = self.binary(level + 1)
            left = self.node("Binary", left.start, right.end, [left, right], op)
        return left

    def unary(self) -> Node:
        tok = self.tok
        if tok.is_punct("!", "-", "+") or tok.is_keyword("typeof", "void", "delete"):
            self.advance()
            arg = self.unary()
            return self.node("Unary", tok.start, arg.end, [arg], tok.value)
        if tok.is_punct("++", "--"):
            self.advance()
            arg = self.unary()
            return self.node("Update", tok.start, arg.end, [arg], tok.value + "prefix")
        expr = self.postfix()
        if self.tok.is_punct("++", "--"):
            op = self.advance()
            return self.node("Update", expr.start, op.end, [expr], op.value)
        return expr

    def postfix(self) -> Node:
        if self.tok.is_keyword("new"):
            expr = self.new_expression()
        else:
            expr = self.primary()
        return self.call_tail(expr, allow_call=True)

    def new_expression(self) -> Node:
        kw = self.advance()
        if self.tok.is_keyword("new"):
            callee = self.new_expression()
        else:
            callee = self.call_tail(self.primary(), allow_call=False)
        args, end = [], callee.end
        if self.tok.is_punct("("):
            args, end = self.arguments()
        return self.node("New", kw.start, end, [callee, *args])

    def call_tail(self, expr: Node, allow_call: bool) -> Node:
        while True:
            if self.tok.is_punct("."):
                self.advance()
                name = self.tok
                if name.kind not in ("ident", "keyword"):
                    raise self.fail(["property name"])
                self.advance()
                expr = self.node("Member", expr.start, name.end, [expr], name.value)
            elif self.tok.is_punct("["):
                self.advance()
                saved, self.no_in = self.no_in, False
                key = self.expression()
                self.no_in = saved
                close = self.expect("]")
                expr = self.node("ComputedMember", expr.start, close.end, [expr, key])
            elif allow_call and self.tok.is_punct("("):
                args, end = self.arguments()
                expr = self.node("Call", expr.start, end, [expr, *args])
            else:
                return expr

    def arguments(self) -> tuple[list[Node], int]:
        self.expect("(")
        saved, self.no_in = self.no_in, False
        args = []
        while not self.tok.is_punct(")"):
            args.append(self.assignment())
            if not self.tok.is_punct(")"):
                self.expect(",")
        self.no_in = saved
        close = self.advance()
        return args, close.end

    def primary(self) -> Node:
        tok = self.tok
        kind = tok.kind
        if kind == "ident":
            return self.leaf("Ident", self.advance())
        if kind == "num":
            return self.leaf("Num", self.advance())
        if kind == "str":
            return self.leaf("Str", self.advance())
        if kind in ("template_full", "template_head"):
            return self.template()
        if kind == "keyword":
            if tok.value in ("true", "false"):
                return self.leaf("Bool", self.advance())
            if tok.value == "null":
                return self.leaf("Null", self.advance())
            if tok.value == "this":
                return self.leaf("This", self.advance())
            if tok.value == "function":
                return self.function("FunctionExpr")
        if tok.is_punct("("):
            self.advance()
            saved, self.no_in = self.no_in, False
            inner = self.expression()
            self.no_in = saved
            close = self.expect(")")
            return self.node("Paren", tok.start, close.end, [inner])
        if tok.is_punct("["):
            return self.array()
        if tok.is_punct("{"):
            return self.object()
        raise self.fail(["expression"])

    def template(self) -> Node:
        first = self.advance()
        raw = [first.value]
        parts: list[Node] = []
        end = first.end
        if first.kind == "template_head":
            while True:
                saved, self.no_in = self.no_in, False
                parts.append(self.expression())
                self.no_in = saved
                piece = self.tok
                if piece.kind not in ("template_middle", "template_tail"):
                    raise self.fail(["}"])
                self.advance()
                raw.append(piece.value)
                end = piece.end
                if piece.kind == "template_tail":
                    break
        return self.node("Template", first.start, end, parts, "${}".join(raw))

    def array(self) -> Node:
        open_ = self.advance()
        elems = []
        while not self.tok.is_punct("]"):
            elems.append(self.assignment())
            if not self.tok.is_punct("]"):
                self.expect(",")
        close = self.advance()
        return self.node("Array", open_.start, close.end, elems)

    def object(self) -> Node:
        open_ = self.advance()
        props = []
        while not self.tok.is_punct("}"):
            props.append(self.property())
            if not self.tok.is_punct("}"):
                self.expect(",")
        close = self.advance()
        return self.node("Object", open_.start, close.end, props)

    def property(self) -> Node:
        tok = self.tok
        if tok.is_punct("["):
            self.advance()
            key = self.assignment()
            self.expect("]")
            self.expect(":")
            value = self.assignment()
            return self.node("ComputedProp", tok.start, value.end, [key, value])
        if tok.kind not in ("ident", "keyword", "str", "num"):
            raise self.fail(["property name", "["])
        self.advance()
        name = tok.value
        if self.tok.is_punct(":"):
            self.advance()
            value = self.assignment()
        elif self.tok.is_punct("("):
            # method shorthand
            params = self.params()
            body = self.block()
            value = self.node("FunctionExpr", tok.start, body.end, [params, body])
        elif tok.kind == "ident" and self.tok.is_punct(",", "}"):
            value = self.leaf("Ident", tok)
        else:
            raise self.fail([":", "(", ",", "}"])
        return self.node("Prop", tok.start, value.end, [value], name)


def parse(tokens: list[Token], file: SourceFile) -> Node:
    """Parse a token stream from :func:`tokenize` into a ``Program`` node."""
    return Parser(file, tokens).program()


def parse_file(file: SourceFile) -> Node:
    return parse(tokenize(file), file)


def parse_source(text: str, path: str = "<input>") -> Node:
    return parse_file(SourceFile(path, text))


def parse_expression(text: str, path: str = "<expr>") -> Node:
    """Parse a lone expression (used by the round-trip checks)."""
    file = SourceFile(path, text)
    p = Parser(file, tokenize(file))
    expr = p.expression()
    if p.tok.kind != "eof":
        raise p.fail(["end of input"])
    return expr


def is_function(node: Node) -> bool:
    return node.kind in FUNCTION_KINDS
