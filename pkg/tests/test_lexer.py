# tests/test_lexer.py
import pytest

from app.services.errors import LexError
from app.services.lexer import tokenize


def kinds(source):
    return [t.kind for t in tokenize(source)]


def test_primes_fold_into_identifier_order():
    tokens = tokenize("theta'' = x'")
    assert tokens[0].kind == "Ident" and tokens[0].value == "theta" and tokens[0].order == 2
    assert tokens[2].order == 1


def test_longest_operator_wins():
    assert kinds("a := b <= c == d") == ["Ident", "ColonEq", "Ident", "LtEq", "Ident", "EqEq", "Ident"]


def test_comments_and_whitespace_are_dropped():
    assert kinds("x // trailing ' comment\n  y") == ["Ident", "Ident"]


def test_numbers_with_exponent():
    tokens = tokenize("2.98e-6 10 0.5")
    assert [t.value for t in tokens] == [2.98e-6, 10.0, 0.5]


def test_keywords_are_recognised():
    assert tokenize("class private end")[0].kind == "Keyword"


def test_positions_are_one_based():
    tokens = tokenize("a\n  b")
    assert (tokens[1].line, tokens[1].col) == (2, 3)


def test_illegal_character_reports_position():
    with pytest.raises(LexError) as info:
        tokenize("x = 1;\ny = @")
    assert (info.value.line, info.value.col) == (2, 5)
    assert "'@'" in str(info.value)


def test_primed_keyword_is_rejected():
    with pytest.raises(LexError):
        tokenize("end'")
