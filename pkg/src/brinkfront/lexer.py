"""Lexer for the run-configuration language.

A configuration is line oriented: every physical line is scanned on its
own and the lines are joined by NEWLINE tokens, so the parser can tell
where an assignment ends.  Values are numbers (with sign and exponent),
double-quoted strings, ``true``/``false``, bare words and ``[...]`` lists.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Iterator, List


class TokenType(Enum):
    NUMBER = auto()
    STRING = auto()
    BOOL = auto()
    KEY = auto()       # dotted name, also a bare-word value
    ASSIGN = auto()
    MINUS = auto()
    PLUS = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    COMMA = auto()
    NEWLINE = auto()
    EOF = auto()


@dataclass
class Token:
    type: TokenType
    value: object
    line: int
    column: int = field(default=1, compare=False)

    def __repr__(self) -> str:
        return f"Token({self.type.name}, {self.value!r}, line={self.line})"


class LexError(Exception):
    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(message)
        self.line = line
        self.column = column


_NAME = r"[A-Za-z_][A-Za-z0-9_]*"

_RULES: list[tuple[str, TokenType | None]] = [
    (r"\s+", None),
    (r"#.*", None),
    (r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?", TokenType.NUMBER),
    (r'"[^"]*"', TokenType.STRING),
    (rf"{_NAME}(?:\.{_NAME})*(?![.\w])", TokenType.KEY),
    (r"=", TokenType.ASSIGN),
    (r"-", TokenType.MINUS),
    (r"\+", TokenType.PLUS),
    (r"\[", TokenType.LBRACKET),
    (r"\]", TokenType.RBRACKET),
    (r",", TokenType.COMMA),
]

_SCANNER = re.compile("|".join(f"({pattern})" for pattern, _ in _RULES))

_LITERALS = {"true": True, "false": False}


def _convert(kind: TokenType, raw: str) -> tuple[TokenType, object]:
    if kind is TokenType.NUMBER:
        return kind, float(raw) if re.search(r"[.eE]", raw) else int(raw)
    if kind is TokenType.STRING:
        return kind, raw[1:-1]
    if kind is TokenType.KEY and raw in _LITERALS:
        return TokenType.BOOL, _LITERALS[raw]
    return kind, raw


def _scan_line(text: str, line: int) -> Iterator[Token]:
    pos = 0
    while pos < len(text):
        m = _SCANNER.match(text, pos)
        if m is None:
            raise LexError(
                f"Unexpected character {text[pos]!r} at line {line}, column {pos + 1}",
                line,
                pos + 1,
            )
        kind = _RULES[m.lastindex - 1][1]
        if kind is not None:
            kind, value = _convert(kind, m.group())
            yield Token(kind, value, line, pos + 1)
        pos = m.end()


def tokenize(source: str) -> List[Token]:
    """Token list for *source*, ending with an EOF token."""
    tokens: List[Token] = []
    lines = source.split("\n")
    for number, text in enumerate(lines, start=1):
        tokens.extend(_scan_line(text, number))
        if number < len(lines):
            tokens.append(Token(TokenType.NEWLINE, "\n", number, len(text) + 1))
    tokens.append(Token(TokenType.EOF, None, len(lines)))
    return tokens
