"""Hand-written tokenizer for MiniJS.

Template literals are split into head/middle/tail pieces around each
``${ ... }`` slot so the parser sees the interpolated expressions as
ordinary tokens.  A brace stack tells a closing ``}`` of an interpolation
apart from a block or object brace.
"""

from __future__ import annotations

from dataclasses import dataclass

from .source import SourceFile

KEYWORDS = frozenset(
    """var let const function return if else while for new true false null
    this typeof void delete instanceof in break continue""".split()
)

# longest first
PUNCTUATORS = (
    "===", "!==", "...",
    "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "{", "}", "(", ")", "[", "]", ";", ",", ".", ":", "?",
    "=", "<", ">", "+", "-", "*", "/", "%", "!",
)

_SIMPLE_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v", "0": "\0"}


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int, path: str = "") -> None:
        super().__init__(f"{path}:{line}:{col}: {message}" if path else f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.path = path


@dataclass(frozen=True)
class Token:
    kind: str  # ident keyword num str punct template_full template_head template_middle template_tail eof
    value: str
    start: int
    end: int  # exclusive offset
    text: str  # verbatim source slice

    def is_punct(self, *values: str) -> bool:
        return self.kind == "punct" and self.value in values

    def is_keyword(self, *values: str) -> bool:
        return self.kind == "keyword" and self.value in values


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


class Lexer:
    def __init__(self, file: SourceFile) -> None:
        self.file = file
        self.text = file.text
        self.pos = 0
        self.braces: list[str] = []  # "{" or "${"

    def error(self, message: str, offset: int) -> LexError:
        line, col = self.file.position(offset)
        return LexError(message, line, col, self.file.path)

    def tokens(self) -> list[Token]:
        out = []
        while True:
            tok = self.next()
            out.append(tok)
            if tok.kind == "eof":
                return out

    def _skip_trivia(self) -> None:
        text, n = self.text, len(self.text)
        while self.pos < n:
            ch = text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif text.startswith("//", self.pos):
                nl = text.find("\n", self.pos)
                self.pos = n if nl < 0 else nl
            elif text.startswith("/*", self.pos):
                close = text.find("*/", self.pos + 2)
                if close < 0:
                    raise self.error("unterminated comment", self.pos)
                self.pos = close + 2
            else:
                return

    def _make(self, kind: str, value: str, start: int) -> Token:
        return Token(kind, value, start, self.pos, self.text[start : self.pos])

    def next(self) -> Token:
        self._skip_trivia()
        text = self.text
        start = self.pos
        if start >= len(text):
            return Token("eof", "", start, start, "")
        ch = text[start]
        if _is_ident_start(ch):
            self.pos += 1
            while self.pos < len(text) and _is_ident_part(text[self.pos]):
                self.pos += 1
            word = text[start : self.pos]
            return self._make("keyword" if word in KEYWORDS else "ident", word, start)
        if ch.isdigit() or (ch == "." and start + 1 < len(text) and text[start + 1].isdigit()):
            return self._number(start)
        if ch in "'\"":
            return self._string(start, ch)
        if ch == "`":
            self.pos += 1
            return self._template(start, "template_full", "template_head")
        if ch == "}" and self.braces and self.braces[-1] == "${":
            self.braces.pop()
            self.pos += 1
            return self._template(start, "template_tail", "template_middle")
        for punct in PUNCTUATORS:
            if text.startswith(punct, start):
                self.pos += len(punct)
                if punct == "{":
                    self.braces.append("{")
                elif punct == "}" and self.braces:
                    self.braces.pop()
                return self._make("punct", punct, start)
        raise self.error(f"illegal character {ch!r}", start)

    def _number(self, start: int) -> Token:
        text = self.text
        if text.startswith(("0x", "0X"), start):
            self.pos = start + 2
            while self.pos < len(text) and text[self.pos] in "0123456789abcdefABCDEF":
                self.pos += 1
        else:
            while self.pos < len(text) and text[self.pos].isdigit():
                self.pos += 1
            if self.pos < len(text) and text[self.pos] == ".":
                self.pos += 1
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            if self.pos < len(text) and text[self.pos] in "eE":
                self.pos += 1
                if self.pos < len(text) and text[self.pos] in "+-":
                    self.pos += 1
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
        return self._make("num", text[start : self.pos], start)

    def _escape(self, out: list[str]) -> None:
        text = self.text
        if self.pos + 1 >= len(text):
            raise self.error("unterminated escape", self.pos)
        esc = text[self.pos + 1]
        if esc == "u" and self.pos + 5 < len(text):
            out.append(chr(int(text[self.pos + 2 : self.pos + 6], 16)))
            self.pos += 6
            return
        out.append(_SIMPLE_ESCAPES.get(esc, esc))
        self.pos += 2

    def _string(self, start: int, quote: str) -> Token:
        text = self.text
        self.pos = start + 1
        out: list[str] = []
        while True:
            if self.pos >= len(text) or text[self.pos] == "\n":
                raise self.error("unterminated string literal", start)
            ch = text[self.pos]
            if ch == quote:
                self.pos += 1
                return self._make("str", "".join(out), start)
            if ch == "\\":
                self._escape(out)
            else:
                out.append(ch)
                self.pos += 1

    def _template(self, start: int, closed_kind: str, open_kind: str) -> Token:
        # self.pos sits just past the opening "`" or "}"
        text = self.text
        out: list[str] = []
        while True:
            if self.pos >= len(text):
                raise self.error("unterminated template literal", start)
            ch = text[self.pos]
            if ch == "`":
                self.pos += 1
                return self._make(closed_kind, "".join(out), start)
            if text.startswith("${", self.pos):
                self.pos += 2
                self.braces.append("${")
                return self._make(open_kind, "".join(out), start)
            if ch == "\\":
                self._escape(out)
            else:
                out.append(ch)
                self.pos += 1


def tokenize(file: SourceFile) -> list[Token]:
    """Tokenize ``file``; the final token is always ``eof``."""
    return Lexer(file).tokens()
