from __future__ import annotations

import csv
import heapq
import io
import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum

from loguru import logger

from wreathkit.config import settings
from wreathkit.errors import BudgetExceeded, WreathkitError
from wreathkit.machine import Element, compose, identity, inverse, is_identity
from wreathkit.models import SearchOutcome
from wreathkit.perms import Word, all_words, format_word
from wreathkit.services.mother import elem_tv, mother_generators


class WeightMode(StrEnum):
    DEPTH = "depth"  # вес t_v^{±1} равен |v|
    PROPER = "proper"  # |v| + 1: шары конечного радиуса конечны


@dataclass(frozen=True)
class WeightedGen:
    label: str
    element: Element
    weight: int


@dataclass(frozen=True)
class WeightedGenSet:
    """
    Взвешенный порождающий набор, замкнутый относительно обращения.

    :ivar generators: Образующие с метками и весами.
    :ivar mode: Режим весов для семейства t_v; None — единичные веса.
    """
    generators: tuple[WeightedGen, ...]
    mode: WeightMode | None = None

    def __post_init__(self) -> None:
        if not self.generators:
            raise WreathkitError("Порождающий набор пуст.")
        degrees = {gen.element.degree for gen in self.generators}
        if len(degrees) != 1:
            raise WreathkitError(f"Образующие над разными алфавитами: {sorted(degrees)}.")
        weights: dict[Element, int] = {}
        for gen in self.generators:
            if gen.weight < 0:
                raise WreathkitError(f"Отрицательный вес у {gen.label}.")
            weights.setdefault(gen.element, gen.weight)
        for gen in self.generators:
            if weights.get(inverse(gen.element)) != gen.weight:
                raise WreathkitError(
                    f"Набор не замкнут относительно обращения: {gen.label}⁻¹ отсутствует "
                    "или имеет другой вес."
                )

    @property
    def degree(self) -> int:
        return self.generators[0].element.degree


@dataclass
class GrowthTable:
    """
    Размеры шаров |B(r)|.

    :ivar sizes: sizes[r] — число элементов длины ≤ r.
    :ivar frontiers: Элементы сферы радиуса r (если сохранялись).
    """
    sizes: list[int] = field(default_factory=list)
    frontiers: list[list[Element]] | None = None

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["radius", "ball_size"])
        for radius, size in enumerate(self.sizes):
            writer.writerow([radius, size])
        return buffer.getvalue()


@dataclass(frozen=True)
class LengthResult:
    outcome: SearchOutcome
    length: int | None = None
    word: tuple[str, ...] = ()


class CosetStatus(StrEnum):
    SEPARATED = "separated"
    IN_SUBGROUP = "in-subgroup"
    WITNESS = "witness"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class CosetEntry:
    word: Word
    status: CosetStatus
    witness: tuple[str, ...] = ()
    explored: int = 0


@dataclass
class Exploration:
    weights: dict[Element, int]
    words: dict[Element, tuple[str, ...]]
    complete: bool
    target_hit: Element | None = None


def mother_generator_set(degree: int) -> WeightedGenSet:
    """Нетождественные образующие S_d ∪ B_d с единичными весами."""

    return WeightedGenSet(
        tuple(
            WeightedGen(gen.label, gen.element, 1)
            for gen in mother_generators(degree)
            if not is_identity(gen.element)
        )
    )


def tv_generators(
    max_depth: int,
    mode: WeightMode = WeightMode.DEPTH,
    min_depth: int = 0,
) -> WeightedGenSet:
    """
    Образующие t_v^{±1} для min_depth ≤ |v| ≤ max_depth.

    :param max_depth: Наибольшая длина слова.
    :param mode: DEPTH — вес |v|, PROPER — |v| + 1.
    :param min_depth: Наименьшая длина слова.
    :return: WeightedGenSet.
    """

    extra = 1 if mode == WeightMode.PROPER else 0
    gens: list[WeightedGen] = []
    for length in range(min_depth, max_depth + 1):
        for word in all_words(3, length):
            element = elem_tv(word)
            name = f"t_{format_word(word)}" if word else "t"
            gens.append(WeightedGen(name, element, length + extra))
            gens.append(WeightedGen(f"{name}^-1", inverse(element), length + extra))
    return WeightedGenSet(tuple(gens), mode)


def weighted_search(
    gens: WeightedGenSet,
    max_weight: int | None,
    *,
    budget: int,
    factor_cap: int,
    target: Element | None = None,
) -> Exploration:
    """
    Дейкстра по весу, затем по числу множителей веса 0; дедупликация по канонической форме.

    Множителей веса 0 в одном произведении не больше factor_cap.
    """

    start = identity(gens.degree)
    best: dict[Element, tuple[int, int]] = {start: (0, 0)}
    words: dict[Element, tuple[str, ...]] = {start: ()}
    settled: dict[Element, int] = {}
    counter = itertools.count()
    heap: list[tuple[int, int, int, Element]] = [(0, 0, next(counter), start)]

    while heap:
        weight, zeros, _, element = heapq.heappop(heap)
        if element in settled or best[element] != (weight, zeros):
            continue
        settled[element] = weight
        if target is not None and element == target:
            return Exploration(settled, words, complete=False, target_hit=element)
        for gen in gens.generators:
            new_weight = weight + gen.weight
            new_zeros = zeros + (gen.weight == 0)
            if max_weight is not None and new_weight > max_weight:
                continue
            if new_zeros > factor_cap:
                continue
            product = compose(element, gen.element)
            if product in settled:
                continue
            previous = best.get(product)
            if previous is not None and previous <= (new_weight, new_zeros):
                continue
            best[product] = (new_weight, new_zeros)
            words[product] = (*words[element], gen.label)
            heapq.heappush(heap, (new_weight, new_zeros, next(counter), product))
            if len(best) > budget:
                logger.warning("weighted search stopped at budget {}", budget)
                raise BudgetExceeded(
                    f"Перебор превысил бюджет в {budget} элементов.",
                    partial=Exploration(settled, words, complete=False),
                )
    return Exploration(settled, words, complete=True)


def ball_growth(
    gens: WeightedGenSet,
    radius: int,
    budget: int | None = None,
    keep_frontiers: bool = False,
) -> GrowthTable:
    """
    Точные размеры шаров |B(r)| для r = 0..radius.

    :param gens: Взвешенный порождающий набор.
    :param radius: Наибольший радиус R ≥ 0.
    :param budget: Предел числа хранимых элементов.
    :param keep_frontiers: Сохранять ли элементы сфер.
    :return: GrowthTable.
    :raises BudgetExceeded: С частичной таблицей для полностью посчитанных радиусов.
    """

    if radius < 0:
        raise WreathkitError("Радиус должен быть неотрицательным.")
    limit = budget if budget is not None else settings.search_budget
    try:
        exploration = weighted_search(gens, radius, budget=limit, factor_cap=settings.factor_cap)
    except BudgetExceeded as exc:
        partial: Exploration = exc.partial
        done = max(partial.weights.values(), default=0)
        # Радиус done мог быть досчитан не полностью.
        table = _table(partial.weights, done - 1, keep_frontiers)
        raise BudgetExceeded(str(exc), partial=table) from exc
    table = _table(exploration.weights, radius, keep_frontiers)
    logger.debug("ball sizes: {}", table.sizes)
    return table


def _table(weights: dict[Element, int], radius: int, keep_frontiers: bool) -> GrowthTable:
    spheres: list[list[Element]] = [[] for _ in range(max(radius, -1) + 1)]
    for element, weight in weights.items():
        if weight <= radius:
            spheres[weight].append(element)
    sizes = list(itertools.accumulate(len(sphere) for sphere in spheres))
    return GrowthTable(sizes=sizes, frontiers=spheres if keep_frontiers else None)


def t_length(
    g: Element,
    max_gen_depth: int,
    mode: WeightMode = WeightMode.DEPTH,
    max_weight: int | None = None,
    budget: int | None = None,
) -> LengthResult:
    """
    Точная длина g относительно образующих t_v^{±1}, |v| ≤ max_gen_depth.

    :param g: Элемент G_3.
    :param max_gen_depth: Усечение порождающего набора.
    :param mode: Режим весов.
    :param max_weight: Предел веса перебора (None — до исчерпания бюджета).
    :param budget: Предел числа хранимых элементов.
    :return: LengthResult с FOUND, NOT_FOUND или BUDGET_EXHAUSTED.
    """

    gens = tv_generators(max_gen_depth, mode)
    limit = budget if budget is not None else settings.search_budget
    try:
        exploration = weighted_search(
            gens, max_weight, budget=limit, factor_cap=settings.factor_cap, target=g
        )
    except BudgetExceeded:
        return LengthResult(SearchOutcome.BUDGET_EXHAUSTED)
    if exploration.target_hit is None:
        return LengthResult(SearchOutcome.NOT_FOUND)
    return LengthResult(
        SearchOutcome.FOUND,
        exploration.weights[exploration.target_hit],
        exploration.words[exploration.target_hit],
    )


def coset_separation_check(
    n: int,
    samples: Sequence[Word] | None = None,
    budget: int | None = None,
) -> list[CosetEntry]:
    """
    Проверяет, что ни одно произведение веса ≤ n (веса |v|) не равно t_w при |w| > n.

    :param n: Уровень T_n.
    :param samples: Слова w; по умолчанию все слова длины n + 1.
    :param budget: Предел числа хранимых элементов.
    :return: Записи по каждому слову.
    """

    words = list(samples) if samples is not None else list(all_words(3, n + 1))
    limit = budget if budget is not None else settings.search_budget
    gens = tv_generators(n, WeightMode.DEPTH)
    try:
        exploration = weighted_search(gens, n, budget=limit, factor_cap=settings.factor_cap)
    except BudgetExceeded as exc:
        partial: Exploration = exc.partial
        exploration = partial

    entries: list[CosetEntry] = []
    for word in words:
        if len(word) <= n:
            entries.append(CosetEntry(tuple(word), CosetStatus.IN_SUBGROUP))
            continue
        target = elem_tv(word)
        explored = len(exploration.weights)
        if target in exploration.weights:
            entries.append(
                CosetEntry(tuple(word), CosetStatus.WITNESS, exploration.words[target], explored)
            )
        elif exploration.complete:
            entries.append(CosetEntry(tuple(word), CosetStatus.SEPARATED, (), explored))
        else:
            entries.append(CosetEntry(tuple(word), CosetStatus.BUDGET_EXHAUSTED, (), explored))
    return entries
