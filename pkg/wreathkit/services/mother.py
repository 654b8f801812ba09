from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

from loguru import logger

from wreathkit.config import settings
from wreathkit.errors import ConventionError, MachineSpecError, PermError, WreathkitError
from wreathkit.machine import (
    Element,
    canonicalize,
    compose,
    compose_all,
    conjugate,
    equal,
    from_sections,
    identity,
    inverse,
    is_identity,
    restrict,
    rootwise,
)
from wreathkit.models import SearchOutcome
from wreathkit.perms import (
    Perm,
    Word,
    all_perms,
    is_even,
    perm_compose,
    perm_compose_all,
    perm_extend,
    perm_format,
    perm_inverse,
    perm_parse,
    perm_shift,
    validate_word,
)

A3 = tuple(perm_parse(text, 3) for text in ("()", "(1 2 3)", "(1 3 2)"))


@dataclass(frozen=True)
class MotherGen:
    """
    Образующая материнской группы G_d.

    :ivar degree: Размер алфавита d.
    :ivar sigma: Для корневой образующей — перестановка из S_d; для B-типа — из S_{d-1}.
    :ivar parts: Для B-типа — перестановки b_1..b_{d-1} из S_d; None для корневой.
    """
    degree: int
    sigma: Perm
    parts: tuple[Perm, ...] | None = None

    @property
    def is_rootwise(self) -> bool:
        return self.parts is None

    @property
    def label(self) -> str:
        if self.parts is None:
            return perm_format(self.sigma)
        inner = ", ".join(perm_format(p) for p in self.parts)
        return f"b[{inner}; {perm_format(self.sigma)}]"

    @property
    def element(self) -> Element:
        if self.parts is None:
            return rootwise(self.sigma)
        return b_gen(self.degree, self.parts, self.sigma)


@dataclass(frozen=True)
class WreathDecomp:
    """
    Разложение g = (g|_1, …, g|_d)σ.

    :ivar sections: Сечения первого уровня.
    :ivar root: Корневая перестановка.
    """
    sections: tuple[Element, ...]
    root: Perm

    def assemble(self) -> Element:
        return from_sections(self.sections, self.root)


@dataclass(frozen=True)
class SpecialElements:
    c: Element
    t: Element
    c_tilde: Element


@dataclass(frozen=True)
class Eq7Solution:
    """Решение уравнения на (σ1, σ1′, σ2′, a) в S_3."""

    sigma1: Perm
    sigma1_p: Perm
    sigma2_p: Perm
    a: Perm


@dataclass(frozen=True)
class Eq7Tuple:
    """
    Полный набор восьми перестановок для сборки прообраза.

    Индексы: p — штрих, pp — два штриха, ppp — три штриха.
    """

    sigma1: Perm
    sigma2: Perm
    sigma1_p: Perm
    sigma2_p: Perm
    sigma1_pp: Perm
    sigma2_pp: Perm
    sigma1_ppp: Perm
    sigma2_ppp: Perm

    def pairs(self) -> list[tuple[Perm, Perm]]:
        return [
            (self.sigma1, self.sigma2),
            (self.sigma1_p, self.sigma2_p),
            (self.sigma1_pp, self.sigma2_pp),
            (self.sigma1_ppp, self.sigma2_ppp),
        ]


@dataclass(frozen=True)
class Eq7Result:
    """
    :ivar omega: Правая часть из A_3.
    :ivar solutions: Все решения перебором по S_3⁴ в порядке перечисления.
    :ivar representative: Выбранное решение (σ1 = 1, σ2′ = a = (12), σ1′ — первая транспозиция).
    :ivar full: Восстановленный полный набор для representative.
    """
    omega: Perm
    solutions: tuple[Eq7Solution, ...]
    representative: Eq7Solution
    full: Eq7Tuple


@dataclass(frozen=True)
class PreimageResult:
    """
    Результат поиска h ∈ Stab(1) с заданным сечением.

    :ivar outcome: FOUND, NOT_FOUND (радиус исчерпан) или BUDGET_EXHAUSTED.
    :ivar element: Найденный h (если FOUND).
    :ivar word: Метки образующих, произведение которых равно h.
    :ivar radius: Радиус, до которого шёл перебор.
    :ivar visited: Число различных элементов в шаре.
    """
    outcome: SearchOutcome
    element: Element | None
    word: tuple[str, ...]
    radius: int
    visited: int

    @property
    def found(self) -> bool:
        return self.outcome == SearchOutcome.FOUND


def b_gen(degree: int, b_parts: Sequence[Perm], sigma: Perm) -> Element:
    """
    Образующая B-типа (b_1, …, b_{d-1}, b)σ, где σ ∈ S_{d-1} неподвижна на d.

    :param degree: Размер алфавита d.
    :param b_parts: d-1 перестановок степени d (корневые сечения).
    :param sigma: Перестановка степени d-1.
    :return: Канонический Element.
    :raises MachineSpecError: Неверная арность или степени.
    """

    if len(b_parts) != degree - 1:
        raise MachineSpecError(f"Нужно {degree - 1} сечений b_i, получено {len(b_parts)}.")
    if sigma.degree != degree - 1:
        raise MachineSpecError(f"σ должна иметь степень {degree - 1}, получено {sigma.degree}.")
    for part in b_parts:
        if part.degree != degree:
            raise MachineSpecError(f"b_i должна иметь степень {degree}, получено {part.degree}.")

    # Состояние 0 — сама образующая, 1..d-1 — корневые b_i, последнее — тождество.
    trivial = degree
    roots = [perm_extend(sigma, degree), *b_parts, Perm.identity(degree)]
    children = [
        (*range(1, degree), 0),
        *[(trivial,) * degree for _ in b_parts],
        (trivial,) * degree,
    ]
    return canonicalize(Element(degree, tuple(roots), tuple(children)))


def mother_generators(degree: int) -> list[MotherGen]:
    """
    Образующие S_d ∪ B_d без повторов: сначала корневые, затем B_d в порядке произведения.

    :param degree: d ≥ 2.
    :return: Список MotherGen; тождество входит один раз.
    """

    if degree < 2:
        raise WreathkitError("Материнская группа определена для d ≥ 2.")
    generators: list[MotherGen] = []
    seen: set[Element] = set()

    def push(generator: MotherGen) -> None:
        element = generator.element
        if element not in seen:
            seen.add(element)
            generators.append(generator)

    for sigma in all_perms(degree):
        push(MotherGen(degree, sigma))
    for parts in itertools.product(all_perms(degree), repeat=degree - 1):
        for sigma in all_perms(degree - 1):
            push(MotherGen(degree, sigma, tuple(parts)))
    logger.debug("G_{}: {} distinct generators", degree, len(generators))
    return generators


def mother_gens(degree: int) -> list[Element]:
    return [generator.element for generator in mother_generators(degree)]


def embed_up(g: Element) -> Element:
    """
    Вложение G_d в G_{d+1}: буквы k ↦ k+1, новая буква 1 неподвижна с тождественным сечением.

    :param g: Элемент над d.
    :return: Элемент над d+1.
    """

    trivial = len(g.roots)
    roots = [perm_shift(root, 1) for root in g.roots]
    roots.append(Perm.identity(g.degree + 1))
    children = [(trivial, *row) for row in g.children]
    children.append((trivial,) * (g.degree + 1))
    return canonicalize(Element(g.degree + 1, tuple(roots), tuple(children), g.initial))


def _r(text: str) -> Element:
    return rootwise(perm_parse(text, 3))


@lru_cache(maxsize=1)
def special_elems() -> SpecialElements:
    """
    Элементы c = (1, (23), c), t = (23)c(23)c и c̃ = (12)c(12) группы G_3.

    :return: SpecialElements.
    """

    c = b_gen(3, [Perm.identity(3), perm_parse("(2 3)", 3)], Perm.identity(2))
    s23 = _r("(2 3)")
    s12 = _r("(1 2)")
    t = compose_all([s23, c, s23, c], 3)
    c_tilde = compose_all([s12, c, s12], 3)
    return SpecialElements(c=c, t=t, c_tilde=c_tilde)


@lru_cache(maxsize=4096)
def _elem_tv(word: Word) -> Element:
    t = special_elems().t
    if not word:
        return t
    one = identity(3)
    parts = [one, one, one]
    parts[word[0] - 1] = _elem_tv(word[1:])
    return from_sections(parts, Perm.identity(3))


def elem_tv(word: Sequence[int]) -> Element:
    """
    Образующая t_v: t_∅ = t, t_{xv} — элемент с сечением t_v на букве x и тождеством на остальных.

    :param word: Слово над {1, 2, 3}.
    :return: Канонический Element.
    """

    validate_word(word, 3)
    return _elem_tv(tuple(word))


def psi(g: Element) -> WreathDecomp:
    """
    Рекурсия сплетения g ↦ (g|_1, …, g|_d)σ.

    :param g: Элемент.
    :return: WreathDecomp.
    """

    return WreathDecomp(
        sections=tuple(restrict(g, (letter,)) for letter in range(1, g.degree + 1)),
        root=g.root,
    )


def _in_a3(omega: Perm) -> None:
    if omega.degree != 3 or not is_even(omega):
        raise PermError(f"Перестановка {perm_format(omega)} не принадлежит A_3.")


def _eq7_lhs(solution: Eq7Solution) -> Perm:
    s1p, s2p, a = solution.sigma1_p, solution.sigma2_p, solution.a
    return perm_compose(
        perm_compose_all([s2p, a, perm_inverse(s2p)], 3),
        perm_compose_all([s1p, perm_inverse(a), perm_inverse(s1p)], 3),
    )


def _full_tuple(solution: Eq7Solution) -> Eq7Tuple:
    s1, s1p, s2p, a = solution.sigma1, solution.sigma1_p, solution.sigma2_p, solution.a
    s1pp, s2pp = a, Perm.identity(3)
    s2 = perm_compose_all([s1, s1p, a, perm_inverse(s1p)], 3)
    s1ppp = perm_compose_all([perm_inverse(s1pp), perm_inverse(s1p), perm_inverse(s1)], 3)
    s2ppp = perm_compose_all([perm_inverse(s2pp), perm_inverse(s2p), perm_inverse(s2)], 3)
    return Eq7Tuple(s1, s2, s1p, s2p, s1pp, s2pp, s1ppp, s2ppp)


def _check_tuple(full: Eq7Tuple, omega: Perm) -> None:
    one = Perm.identity(3)
    checks = [
        perm_compose_all([full.sigma1, full.sigma2_p, full.sigma1_pp, full.sigma2_ppp], 3) == omega,
        perm_compose_all([full.sigma2, full.sigma1_p, full.sigma2_pp, full.sigma1_ppp], 3) == one,
        perm_compose_all([full.sigma1, full.sigma1_p, full.sigma1_pp, full.sigma1_ppp], 3) == one,
        perm_compose_all([full.sigma2, full.sigma2_p, full.sigma2_pp, full.sigma2_ppp], 3) == one,
    ]
    if not all(checks):
        raise ConventionError(f"Набор для ω = {perm_format(omega)} не удовлетворяет системе.")


def solve_eq7(omega: Perm) -> Eq7Result:
    """
    Решает (σ2′ a σ2′⁻¹)·(σ1′ a⁻¹ σ1′⁻¹) = σ1⁻¹ ω σ1 перебором по S_3⁴.

    Полный набор восстанавливается выбором σ2″ = 1, σ1″ = a и двумя
    соотношениями на тройные штрихи; все четыре исходных уравнения проверяются.

    :param omega: Элемент A_3.
    :return: Eq7Result.
    :raises PermError: omega не из A_3.
    """

    _in_a3(omega)
    perms = all_perms(3)
    solutions = tuple(
        Eq7Solution(s1, s1p, s2p, a)
        for s1, s2p, s1p, a in itertools.product(perms, repeat=4)
        if _eq7_lhs(Eq7Solution(s1, s1p, s2p, a))
        == perm_compose_all([perm_inverse(s1), omega, s1], 3)
    )

    one = Perm.identity(3)
    swap = perm_parse("(1 2)", 3)
    representative = next(
        (
            s for s in solutions
            if s.sigma1 == one and s.sigma2_p == swap and s.a == swap
            and len([x for x in range(1, 4) if s.sigma1_p(x) != x]) == 2
        ),
        solutions[0],
    )
    full = _full_tuple(representative)
    _check_tuple(full, omega)
    logger.debug("ω = {}: {} solutions", perm_format(omega), len(solutions))
    return Eq7Result(omega, solutions, representative, full)


def psi_preimage_A3(omega: Perm) -> Element:  # noqa: N802
    """
    Собирает g ∈ Stab(1) с psi(g) = (ω, 1, 1) из восьми множителей b(σ_i, σ_i′)·(12).

    :param omega: Элемент A_3.
    :return: Проверенный элемент.
    :raises ConventionError: Собранный элемент не прошёл проверку.
    """

    full = solve_eq7(omega).full
    swap = _r("(1 2)")
    one2 = Perm.identity(2)
    factors: list[Element] = []
    for first, second in full.pairs():
        factors.append(b_gen(3, [first, second], one2))
        factors.append(swap)
    g = compose_all(factors, 3)

    decomp = psi(g)
    expected = (rootwise(omega), identity(3), identity(3))
    if not decomp.root.is_identity() or decomp.sections != expected:
        raise ConventionError(
            f"Прообраз для ω = {perm_format(omega)} не лежит в Stab(1) с сечениями (ω, 1, 1)."
        )
    return g


def default_stab1_generators() -> list[tuple[str, Element]]:
    return [
        (generator.label, generator.element)
        for generator in mother_generators(3)
        if not is_identity(generator.element)
    ]


def stab1_preimage(
    target: Element,
    coord: int,
    radius: int,
    generators: Sequence[tuple[str, Element]] | None = None,
    budget: int | None = None,
) -> PreimageResult:
    """
    Ищет h ∈ Stab(1) с psi(h)[coord] = target перебором слов по возрастанию длины.

    Элементы шара дедуплицируются по канонической форме; среди слов одной
    длины выигрывает лексикографически меньшее по индексам образующих.

    :param target: Элемент G_3.
    :param coord: Координата 1..3.
    :param radius: Наибольшая длина слова, ≥ 1.
    :param generators: Помеченные образующие; по умолчанию нетождественные образующие G_3.
    :param budget: Предел числа хранимых элементов (по умолчанию из настроек).
    :return: PreimageResult.
    """

    if not 1 <= coord <= 3:
        raise WreathkitError(f"Координата {coord} вне диапазона 1..3.")
    if radius < 1:
        raise WreathkitError("Радиус должен быть не меньше 1.")
    gens = list(generators) if generators is not None else default_stab1_generators()
    limit = budget if budget is not None else settings.search_budget

    def hit(element: Element) -> bool:
        return element.root.is_identity() and equal(restrict(element, (coord,)), target)

    start = identity(3)
    words: dict[Element, tuple[str, ...]] = {start: ()}
    if hit(start):
        return PreimageResult(SearchOutcome.FOUND, start, (), 0, 1)
    frontier = [start]
    for length in range(1, radius + 1):
        next_frontier: list[Element] = []
        for element in frontier:
            for label, generator in gens:
                product = compose(element, generator)
                if product in words:
                    continue
                words[product] = (*words[element], label)
                if hit(product):
                    logger.debug("Stab(1) witness of length {} found", length)
                    return PreimageResult(
                        SearchOutcome.FOUND, product, words[product], length, len(words)
                    )
                if len(words) >= limit:
                    logger.warning("Stab(1) search stopped at budget {}", limit)
                    return PreimageResult(
                        SearchOutcome.BUDGET_EXHAUSTED, None, (), length, len(words)
                    )
                next_frontier.append(product)
        frontier = next_frontier
    return PreimageResult(SearchOutcome.NOT_FOUND, None, (), radius, len(words))


def kernel_transport(h: Element) -> Element:
    """
    По h ∈ Stab(1) с psi(h)[3] = x строит h·(t·c̃·t⁻¹·c̃)·h⁻¹ с psi = (1, 1, x·t·x⁻¹).

    :param h: Элемент стабилизатора первого уровня.
    :return: Проверенный элемент.
    :raises WreathkitError: h не из Stab(1).
    :raises ConventionError: Сечения не совпали.
    """

    if not h.root.is_identity():
        raise WreathkitError("Элемент не лежит в Stab(1).")
    special = special_elems()
    kernel = compose_all([special.t, special.c_tilde, inverse(special.t), special.c_tilde], 3)
    result = compose_all([h, kernel, inverse(h)], 3)
    x = restrict(h, (3,))
    expected = (identity(3), identity(3), compose_all([x, special.t, inverse(x)], 3))
    decomp = psi(result)
    if not decomp.root.is_identity() or decomp.sections != expected:
        raise ConventionError("Перенос через Stab(1) дал неожиданные сечения.")
    return result


def coordinate_swap(g: Element, i: int, j: int) -> Element:
    """
    Переносит носитель элемента (1, …, x, …, 1) с координаты i на j сопряжением транспозицией (i j).

    :param g: Элемент с тривиальным корнем и единственным нетривиальным сечением на i.
    :param i: Исходная координата.
    :param j: Целевая координата.
    :return: Элемент с тем же сечением на координате j.
    """

    decomp = psi(g)
    trivial = identity(g.degree)
    support = [x for x, section in enumerate(decomp.sections, start=1) if section != trivial]
    if not decomp.root.is_identity() or support not in ([], [i]):
        raise WreathkitError(f"Элемент не сосредоточен на координате {i}.")
    if i == j:
        return g
    swap = rootwise(perm_parse(f"({i} {j})", g.degree))
    result = conjugate(g, swap)
    if restrict(result, (j,)) != decomp.sections[i - 1]:
        raise ConventionError("Сопряжение транспозицией не перенесло сечение.")
    return result
