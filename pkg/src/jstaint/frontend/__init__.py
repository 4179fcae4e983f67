"""MiniJS front end: source files, tokenizer, parser and AST."""

from .ast import Node
from .lexer import LexError, Token, tokenize
from .parser import ParseError, parse, parse_expression, parse_file, parse_source
from .source import SourceFile, Span, normalize_path

__all__ = [
    "LexError",
    "Node",
    "ParseError",
    "SourceFile",
    "Span",
    "Token",
    "normalize_path",
    "parse",
    "parse_expression",
    "parse_file",
    "parse_source",
    "tokenize",
]
