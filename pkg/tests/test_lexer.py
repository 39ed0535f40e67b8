"""Tests for the configuration lexer."""

import pytest
from src.brinkfront.lexer import LexError, Token, TokenType, tokenize


def _types(source: str):
    return [t.type for t in tokenize(source) if t.type != TokenType.EOF]


def _values(source: str):
    return [(t.type, t.value) for t in tokenize(source) if t.type != TokenType.EOF]


class TestNumbers:
    def test_integer(self):
        assert tokenize("960")[0] == Token(TokenType.NUMBER, 960, 1)

    def test_float(self):
        assert tokenize("0.2")[0] == Token(TokenType.NUMBER, 0.2, 1)

    def test_exponent(self):
        assert tokenize("1e-3")[0].value == pytest.approx(1e-3)
        assert tokenize("2.5E+2")[0].value == pytest.approx(250.0)

    def test_exponent_is_float(self):
        assert isinstance(tokenize("1e2")[0].value, float)

    def test_leading_dot(self):
        assert tokenize(".5")[0].value == 0.5

    def test_sign_is_separate(self):
        assert _types("-3") == [TokenType.MINUS, TokenType.NUMBER]
        assert _types("+3") == [TokenType.PLUS, TokenType.NUMBER]


class TestStrings:
    def test_simple(self):
        assert tokenize('"out"')[0] == Token(TokenType.STRING, "out", 1)

    def test_empty(self):
        assert tokenize('""')[0].value == ""

    def test_with_spaces(self):
        assert tokenize('"runs/case a"')[0].value == "runs/case a"

    def test_unterminated(self):
        with pytest.raises(LexError):
            tokenize('"open')


class TestBools:
    def test_true(self):
        assert tokenize("true")[0] == Token(TokenType.BOOL, True, 1)

    def test_false(self):
        assert tokenize("false")[0] == Token(TokenType.BOOL, False, 1)

    def test_prefix_is_a_key(self):
        assert tokenize("trueish")[0].type == TokenType.KEY


class TestKeys:
    def test_dotted(self):
        assert tokenize("model.c_nu")[0] == Token(TokenType.KEY, "model.c_nu", 1)

    def test_plain(self):
        assert tokenize("verbatim")[0].value == "verbatim"

    def test_trailing_dot_is_an_error(self):
        with pytest.raises(LexError):
            tokenize("model.")


class TestDelimiters:
    def test_assignment(self):
        assert _types("model.c_z = 0.02") == [TokenType.KEY, TokenType.ASSIGN, TokenType.NUMBER]

    def test_list(self):
        assert _types("[1, 2]") == [
            TokenType.LBRACKET,
            TokenType.NUMBER,
            TokenType.COMMA,
            TokenType.NUMBER,
            TokenType.RBRACKET,
        ]


class TestLayout:
    def test_comments_skipped(self):
        assert _values("grid.n = 40  # coarse") == [
            (TokenType.KEY, "grid.n"),
            (TokenType.ASSIGN, "="),
            (TokenType.NUMBER, 40),
        ]

    def test_comment_line(self):
        assert _types("# only a comment") == []

    def test_line_numbers(self):
        tokens = tokenize("a = 1\n\nb = 2")
        b = [t for t in tokens if t.value == "b"][0]
        assert b.line == 3

    def test_newline_tokens(self):
        assert _types("a = 1\nb = 2").count(TokenType.NEWLINE) == 1

    def test_ends_with_eof(self):
        assert tokenize("")[-1].type == TokenType.EOF

    def test_unexpected_character(self):
        with pytest.raises(LexError) as exc:
            tokenize("a = 1\nb = @")
        assert exc.value.line == 2
        assert exc.value.column == 5
