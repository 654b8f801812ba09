from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

from wreathkit.errors import AlphabetMismatchError, PermError, WordError

# Слово над алфавитом {1..d}: вершина дерева и аргумент действия.
Word = tuple[int, ...]

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True, slots=True)
class Perm:
    """
    Перестановка букв {1..d}; корневое действие автоморфизма.

    :ivar images: Таблица образов, images[x - 1] — образ буквы x.
    """

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        degree = len(self.images)
        if degree < 1:
            raise PermError("Степень перестановки должна быть не меньше 1.")
        if sorted(self.images) != list(range(1, degree + 1)):
            raise PermError(f"Таблица {self.images} не задаёт биекцию на {{1..{degree}}}.")

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, degree: int) -> Perm:
        """
        Возвращает тождественную перестановку.

        :param degree: Размер алфавита.
        :return: Perm.
        """

        return cls(tuple(range(1, degree + 1)))

    def is_identity(self) -> bool:
        return all(image == letter for letter, image in enumerate(self.images, start=1))

    def __call__(self, letter: int) -> int:
        return perm_apply(self, letter)

    def __mul__(self, other: Perm) -> Perm:
        return perm_compose(self, other)

    def __invert__(self) -> Perm:
        return perm_inverse(self)

    def __str__(self) -> str:
        return perm_format(self)

    def __repr__(self) -> str:
        return f"Perm({perm_format(self)!r}, d={self.degree})"


def _cycle_letters(body: str, degree: int) -> list[int]:
    chunks = body.split()
    if len(chunks) == 1 and degree <= 9 and chunks[0].isdigit() and len(chunks[0]) > 1:
        # Компактная запись "(23)" при однозначных буквах.
        chunks = list(chunks[0])
    letters: list[int] = []
    for chunk in chunks:
        if not chunk.isdigit():
            raise PermError(f"Ожидалась буква-число, получено {chunk!r}.")
        letters.append(int(chunk))
    return letters


def perm_parse(text: str, degree: int) -> Perm:
    """
    Разбирает перестановку в цикловой записи.

    :param text: Непересекающиеся циклы, например "(2 3)" или "(1 2 3) (4 5)"; "()" — тождество.
    :param degree: Размер алфавита.
    :return: Perm с указанными циклами.
    :raises PermError: Буква вне алфавита, повтор буквы, мусор вне скобок.
    """

    if degree < 1:
        raise PermError("Степень перестановки должна быть не меньше 1.")
    stripped = text.strip()
    if not stripped:
        raise PermError("Пустая запись перестановки.")
    leftover = _CYCLE_RE.sub("", stripped)
    if leftover.strip():
        raise PermError(f"Лишние символы вне циклов: {leftover.strip()!r}.")

    images = list(range(1, degree + 1))
    seen: set[int] = set()
    for match in _CYCLE_RE.finditer(stripped):
        letters = _cycle_letters(match.group(1), degree)
        for letter in letters:
            if not 1 <= letter <= degree:
                raise PermError(f"Буква {letter} вне алфавита {{1..{degree}}}.")
            if letter in seen:
                raise PermError(f"Буква {letter} повторяется в записи {text!r}.")
            seen.add(letter)
        for index, letter in enumerate(letters):
            images[letter - 1] = letters[(index + 1) % len(letters)]
    return Perm(tuple(images))


def perm_cycles(p: Perm) -> list[tuple[int, ...]]:
    """
    Возвращает нетривиальные циклы в каноническом порядке.

    :param p: Перестановка.
    :return: Циклы, каждый начинается с наименьшей буквы, упорядочены по ней.
    """

    seen: set[int] = set()
    cycles: list[tuple[int, ...]] = []
    for start in range(1, p.degree + 1):
        if start in seen or p.images[start - 1] == start:
            continue
        cycle = [start]
        seen.add(start)
        current = p.images[start - 1]
        while current != start:
            cycle.append(current)
            seen.add(current)
            current = p.images[current - 1]
        cycles.append(tuple(cycle))
    return cycles


def perm_format(p: Perm) -> str:
    """Печатает перестановку в канонической цикловой записи; тождество — "()"."""

    cycles = perm_cycles(p)
    if not cycles:
        return "()"
    return " ".join("(" + " ".join(str(letter) for letter in cycle) + ")" for cycle in cycles)


def perm_compose(p: Perm, q: Perm) -> Perm:
    """
    Композиция слева направо: сначала действует p, затем q, (p·q)(x) = q(p(x)).

    :param p: Левый множитель.
    :param q: Правый множитель.
    :return: Произведение p·q.
    :raises AlphabetMismatchError: Если степени различны.
    """

    if p.degree != q.degree:
        raise AlphabetMismatchError(
            f"Степени перестановок различаются: {p.degree} и {q.degree}."
        )
    return Perm(tuple(q.images[image - 1] for image in p.images))


def perm_compose_all(perms: Iterable[Perm], degree: int) -> Perm:
    """Произведение цепочки перестановок слева направо (пустая цепочка — тождество)."""

    result = Perm.identity(degree)
    for p in perms:
        result = perm_compose(result, p)
    return result


def perm_inverse(p: Perm) -> Perm:
    images = [0] * p.degree
    for letter, image in enumerate(p.images, start=1):
        images[image - 1] = letter
    return Perm(tuple(images))


def perm_apply(p: Perm, letter: int) -> int:
    """
    Возвращает образ буквы.

    :param p: Перестановка.
    :param letter: Буква из {1..d}.
    :return: p(letter).
    :raises PermError: Буква вне алфавита.
    """

    if not 1 <= letter <= p.degree:
        raise PermError(f"Буква {letter} вне алфавита {{1..{p.degree}}}.")
    return p.images[letter - 1]


def perm_power(p: Perm, k: int) -> Perm:
    base = p if k >= 0 else perm_inverse(p)
    result = Perm.identity(p.degree)
    for _ in range(abs(k)):
        result = perm_compose(result, base)
    return result


def perm_sign(p: Perm) -> int:
    """Знак перестановки: +1 для чётных, -1 для нечётных."""

    transpositions = sum(len(cycle) - 1 for cycle in perm_cycles(p))
    return -1 if transpositions % 2 else 1


def is_even(p: Perm) -> bool:
    return perm_sign(p) == 1


def perm_shift(p: Perm, shift: int = 1) -> Perm:
    """
    Сдвигает буквы k ↦ k + shift; новые буквы 1..shift неподвижны.

    :param p: Перестановка степени d.
    :param shift: Величина сдвига.
    :return: Перестановка степени d + shift.
    """

    head = tuple(range(1, shift + 1))
    return Perm(head + tuple(image + shift for image in p.images))


def perm_extend(p: Perm, degree: int) -> Perm:
    """Продолжает перестановку на больший алфавит, оставляя новые буквы на месте."""

    if degree < p.degree:
        raise PermError(f"Нельзя продолжить перестановку степени {p.degree} до {degree}.")
    return Perm(p.images + tuple(range(p.degree + 1, degree + 1)))


def all_perms(degree: int) -> list[Perm]:
    """Все перестановки S_d в лексикографическом порядке таблиц образов (тождество первое)."""

    return [Perm(images) for images in itertools.permutations(range(1, degree + 1))]


def parse_word(text: str, degree: int | None = None) -> Word:
    """
    Разбирает слово, записанное цифрами ("231"); пустая строка или "-" — пустое слово.

    :param text: Запись слова.
    :param degree: Размер алфавита для проверки (необязательно).
    :return: Кортеж букв.
    :raises WordError: Не цифра или буква вне алфавита.
    """

    stripped = text.strip()
    if stripped in {"", "-", "∅"}:
        return ()
    if not stripped.isdigit():
        raise WordError(f"Слово {text!r} должно состоять из цифр.")
    word = tuple(int(char) for char in stripped)
    if degree is not None:
        validate_word(word, degree)
    return word


def validate_word(word: Sequence[int], degree: int) -> None:
    for letter in word:
        if not 1 <= letter <= degree:
            raise WordError(f"Буква {letter} вне алфавита {{1..{degree}}}.")


def format_word(word: Sequence[int]) -> str:
    if not word:
        return "∅"
    if all(letter <= 9 for letter in word):
        return "".join(str(letter) for letter in word)
    return ".".join(str(letter) for letter in word)


def all_words(degree: int, length: int) -> Iterator[Word]:
    """Все слова длины length в лексикографическом порядке."""

    return itertools.product(range(1, degree + 1), repeat=length)


def word_rank(word: Sequence[int], degree: int) -> int:
    """
    Лексикографический ранг слова среди X^|word| плюс один — буква блочного алфавита.

    :param word: Слово.
    :param degree: Размер исходного алфавита.
    :return: Буква из {1..d^|word|}.
    """

    rank = 0
    for letter in word:
        rank = rank * degree + (letter - 1)
    return rank + 1


def word_unrank(letter: int, degree: int, length: int) -> Word:
    """Обратное к word_rank: блочная буква -> слово длины length."""

    rank = letter - 1
    word = [0] * length
    for position in range(length - 1, -1, -1):
        rank, digit = divmod(rank, degree)
        word[position] = digit + 1
    return tuple(word)
