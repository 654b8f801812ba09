from __future__ import annotations

import pytest

from wreathkit.errors import AlphabetMismatchError, PermError, WordError
from wreathkit.perms import (
    Perm,
    all_perms,
    all_words,
    format_word,
    is_even,
    parse_word,
    perm_apply,
    perm_compose,
    perm_cycles,
    perm_extend,
    perm_format,
    perm_inverse,
    perm_parse,
    perm_power,
    perm_shift,
    perm_sign,
    word_rank,
    word_unrank,
)


def test_parse_cycle_notation():
    """Циклы с пробелами и компактная запись дают одну перестановку."""

    assert perm_parse("(2 3)", 3).images == (1, 3, 2)
    assert perm_parse("(23)", 3) == perm_parse("(2 3)", 3)
    assert perm_parse("(1 2 3) (4 5)", 5).images == (2, 3, 1, 5, 4)
    assert perm_parse("()", 4).is_identity()


@pytest.mark.parametrize("text", ["(1 4)", "(1 1)", "(1 2) x", "", "(a b)"])
def test_parse_rejects_bad_input(text):
    with pytest.raises(PermError):
        perm_parse(text, 3)


def test_compose_is_left_to_right():
    """(p·q)(x) = q(p(x)): сначала действует левый множитель."""

    p = perm_parse("(1 2)", 3)
    q = perm_parse("(2 3)", 3)
    product = perm_compose(p, q)
    assert product(1) == 3
    assert product == perm_parse("(1 3 2)", 3)
    assert p * q == product


def test_compose_degree_mismatch():
    with pytest.raises(AlphabetMismatchError):
        perm_compose(Perm.identity(2), Perm.identity(3))


def test_inverse_and_power():
    cycle = perm_parse("(1 2 3)", 3)
    assert perm_compose(cycle, perm_inverse(cycle)).is_identity()
    assert perm_power(cycle, 3).is_identity()
    assert perm_power(cycle, -1) == perm_inverse(cycle)
    assert ~cycle == perm_parse("(1 3 2)", 3)


def test_sign_and_parity():
    assert perm_sign(perm_parse("(1 2)", 3)) == -1
    assert perm_sign(perm_parse("(1 2 3)", 3)) == 1
    assert is_even(Perm.identity(3))
    assert not is_even(perm_parse("(1 3)", 3))


def test_cycles_and_format_are_canonical():
    p = perm_parse("(3 1 2)", 3)
    assert perm_cycles(p) == [(1, 2, 3)]
    assert perm_format(p) == "(1 2 3)"
    assert perm_format(Perm.identity(3)) == "()"
    assert str(perm_parse("(4 5) (1 2)", 5)) == "(1 2) (4 5)"


def test_apply_out_of_range():
    with pytest.raises(PermError):
        perm_apply(Perm.identity(3), 4)


def test_shift_and_extend():
    """Сдвиг букв k ↦ k + 1 оставляет новую букву 1 на месте."""

    swap = perm_parse("(1 2)", 2)
    assert perm_shift(swap) == perm_parse("(2 3)", 3)
    assert perm_extend(swap, 3) == perm_parse("(1 2)", 3)
    with pytest.raises(PermError):
        perm_extend(perm_parse("(1 2)", 3), 2)


def test_all_perms_order():
    perms = all_perms(3)
    assert len(perms) == 6
    assert perms[0].is_identity()
    assert len(set(perms)) == 6


def test_words():
    assert parse_word("231") == (2, 3, 1)
    assert parse_word("") == ()
    assert parse_word("-") == ()
    assert format_word(()) == "∅"
    assert format_word((2, 3, 1)) == "231"
    with pytest.raises(WordError):
        parse_word("24", 3)
    with pytest.raises(WordError):
        parse_word("2a")


def test_block_letters():
    """Ранг слова — буква блочного алфавита X^l."""

    assert word_rank((1, 1), 2) == 1
    assert word_rank((2, 2, 2), 2) == 8
    assert word_unrank(8, 2, 3) == (2, 2, 2)
    for word in all_words(3, 2):
        assert word_unrank(word_rank(word, 3), 3, 2) == word
