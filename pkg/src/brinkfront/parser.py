"""Parser for the run-configuration language.

Grammar:
    config      = (assignment | NEWLINE)* EOF
    assignment  = KEY "=" value (NEWLINE | EOF)
    value       = number | STRING | BOOL | KEY | list
    number      = ("-" | "+")? NUMBER
    list        = "[" NEWLINE* (value (NEWLINE* "," NEWLINE* value)*)? NEWLINE* "]"

A bare KEY on the right-hand side is a string, so
``radial.gradient_closure = one_sided`` needs no quotes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Union

from .lexer import Token, TokenType, tokenize


@dataclass(frozen=True)
class NumberLit:
    value: Union[int, float]
    line: int


@dataclass(frozen=True)
class StringLit:
    value: str
    line: int


@dataclass(frozen=True)
class BoolLit:
    value: bool
    line: int


@dataclass(frozen=True)
class ListLit:
    elements: List["Value"]
    line: int


Value = Union[NumberLit, StringLit, BoolLit, ListLit]


@dataclass(frozen=True)
class Assignment:
    key: str
    value: Value
    line: int


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(message)
        self.line = line
        self.column = column


def _describe(tok: Token) -> str:
    if tok.type is TokenType.EOF:
        return "end of input"
    if tok.type is TokenType.NEWLINE:
        return "end of line"
    return f"{tok.type.name} {tok.value!r}"


class Parser:
    def __init__(self, tokens: List[Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    @property
    def _current(self) -> Token:
        return self._tokens[self._pos]

    def _take(self) -> Token:
        tok = self._current
        if tok.type is not TokenType.EOF:
            self._pos += 1
        return tok

    def _fail(self, expected: str) -> ParseError:
        tok = self._current
        return ParseError(
            f"Expected {expected}, found {_describe(tok)} at line {tok.line}",
            tok.line,
            tok.column,
        )

    def _require(self, tt: TokenType, expected: str) -> Token:
        if self._current.type is not tt:
            raise self._fail(expected)
        return self._take()

    def _blank_lines(self) -> None:
        while self._current.type is TokenType.NEWLINE:
            self._take()

    def parse(self) -> List[Assignment]:
        out: List[Assignment] = []
        self._blank_lines()
        while self._current.type is not TokenType.EOF:
            out.append(self._assignment())
            if self._current.type is not TokenType.EOF:
                self._require(TokenType.NEWLINE, "end of line after the value")
            self._blank_lines()
        return out

    def _assignment(self) -> Assignment:
        key = self._require(TokenType.KEY, "a configuration key")
        self._require(TokenType.ASSIGN, f"'=' after {key.value!r}")
        return Assignment(key.value, self._value(), key.line)

    def _value(self) -> Value:
        tok = self._current
        kind = tok.type
        if kind in (TokenType.MINUS, TokenType.PLUS):
            self._take()
            number = self._require(TokenType.NUMBER, f"a number after {tok.value!r}")
            return NumberLit(-number.value if kind is TokenType.MINUS else number.value, tok.line)
        if kind is TokenType.NUMBER:
            return NumberLit(self._take().value, tok.line)
        if kind in (TokenType.STRING, TokenType.KEY):
            return StringLit(self._take().value, tok.line)
        if kind is TokenType.BOOL:
            return BoolLit(self._take().value, tok.line)
        if kind is TokenType.LBRACKET:
            return self._list()
        raise self._fail("a value")

    def _list(self) -> ListLit:
        opening = self._take()
        elements: List[Value] = []
        self._blank_lines()
        while self._current.type is not TokenType.RBRACKET:
            if elements:
                self._require(TokenType.COMMA, "',' or ']'")
                self._blank_lines()
            elements.append(self._value())
            self._blank_lines()
            if self._current.type is TokenType.EOF:
                raise self._fail("']'")
        self._take()
        return ListLit(elements, opening.line)


def to_python(value: Value) -> object:
    """Plain Python value of a parsed literal."""
    if isinstance(value, ListLit):
        return [to_python(el) for el in value.elements]
    return value.value


def parse(source: str) -> List[Assignment]:
    """Tokenize and parse *source*, returning its assignments in order."""
    return Parser(tokenize(source)).parse()
