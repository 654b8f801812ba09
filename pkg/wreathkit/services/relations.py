from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

from loguru import logger

from wreathkit.config import settings
from wreathkit.errors import BudgetExceeded, NoSingleGeneratorImage, WreathkitError
from wreathkit.machine import (
    Element,
    compose,
    compose_all,
    equal,
    inverse,
    is_identity,
    power,
    sections,
)
from wreathkit.models import SearchOutcome
from wreathkit.perms import Word, all_words, format_word, validate_word
from wreathkit.services.metrics import Exploration, WeightMode, tv_generators, weighted_search
from wreathkit.services.mother import elem_tv, special_elems

# Пункт "1" (в v есть буква 1) противоречит машинной проверке, например при v = 231.
DISCREPANCY_CLAUSES = frozenset({"1"})


@dataclass(frozen=True, order=True)
class FormalGenerator:
    """
    Символ t_v^{±1}.

    :ivar word: Слово v над {1, 2, 3}.
    :ivar exponent: +1 или -1.
    """
    word: Word
    exponent: int = 1

    def __post_init__(self) -> None:
        validate_word(self.word, 3)
        if self.exponent not in (1, -1):
            raise WreathkitError(f"Показатель образующей должен быть ±1, получено {self.exponent}.")

    @property
    def element(self) -> Element:
        base = elem_tv(self.word)
        return base if self.exponent == 1 else inverse(base)

    @property
    def label(self) -> str:
        name = f"t_{format_word(self.word)}" if self.word else "t"
        return name if self.exponent == 1 else f"{name}^-1"


@dataclass(frozen=True)
class Relation:
    """
    Проверенное машиной соотношение t^e·t_v·t^{-e} = t_{v′}^ε.

    :ivar v: Исходное слово.
    :ivar v_prime: Слово образа.
    :ivar sign: ε = ±1.
    :ivar exponent: Показатель сопрягающей степени t.
    :ivar matched_clauses: Пункты таблицы соотношений, под которые подходит v (через запятую).
    :ivar agrees_with_table: Совпали ли все предсказания пунктов с машинным ответом.
    """
    v: Word
    v_prime: Word
    sign: int
    exponent: int = 1
    matched_clauses: str | None = None
    agrees_with_table: bool | None = None


@dataclass(frozen=True)
class Prediction:
    clause: str
    v_prime: Word
    sign: int


@dataclass
class ClauseTally:
    checked: int = 0
    passed: int = 0
    failed: int = 0

    def record(self, ok: bool) -> None:
        self.checked += 1
        if ok:
            self.passed += 1
        else:
            self.failed += 1


@dataclass(frozen=True)
class AuditFailure:
    """
    Пара (w₁, v), для которой пункт предсказал неверный ответ.

    :ivar discrepancy: True — расхождение с формулировкой пункта "1", а не ошибка вычислений.
    """
    w1: Word
    v: Word
    clause: str
    predicted: tuple[Word, int]
    ground_truth: tuple[Word, int]
    discrepancy: bool


@dataclass(frozen=True)
class Conflict:
    v: Word
    predictions: tuple[Prediction, ...]


@dataclass
class AuditReport:
    """
    Итог машинной проверки таблицы соотношений.

    :ivar tallies: Итоги по пунктам ("incomparable", "1", "2a", …).
    :ivar failures: Непрошедшие пары, отсортированные по (|w₁|, w₁, |v|, v).
    :ivar conflicts: Слова v, для которых пункты предсказывают разное.
    :ivar non_generator: Пары, где сопряжённый не имеет вида t_{v′}^{±1} той же длины.
    :ivar incomparable_failures: Несравнимые пары (w₁, w₂), для которых t_{w₁}, t_{w₂} не коммутируют.
    """
    tallies: dict[str, ClauseTally] = field(default_factory=dict)
    failures: list[AuditFailure] = field(default_factory=list)
    conflicts: list[Conflict] = field(default_factory=list)
    non_generator: list[tuple[Word, Word]] = field(default_factory=list)
    incomparable_failures: list[tuple[Word, Word]] = field(default_factory=list)

    @property
    def verification_failures(self) -> list[AuditFailure]:
        return [failure for failure in self.failures if not failure.discrepancy]

    @property
    def ok(self) -> bool:
        return not (self.verification_failures or self.non_generator or self.incomparable_failures)


@dataclass(frozen=True)
class ProbeResult:
    outcome: SearchOutcome
    k: int | None = None
    explored: int = 0


def hat(letter: int) -> int:
    """Перестановка букв 2 ↔ 3; буква 1 неподвижна."""

    return {2: 3, 3: 2}.get(letter, letter)


def _as_generator(element: Element) -> tuple[Word, int]:
    t = special_elems().t
    t_inv = inverse(t)
    prefix: list[int] = []
    current = element
    for _ in range(element.state_count + 1):
        if current == t:
            return tuple(prefix), 1
        if current == t_inv:
            return tuple(prefix), -1
        parts = sections(current)
        support = [x for x, part in enumerate(parts, start=1) if not is_identity(part)]
        if not current.root.is_identity() or len(support) != 1:
            break
        prefix.append(support[0])
        current = parts[support[0] - 1]
    raise NoSingleGeneratorImage("Элемент не является образующей t_v^{±1}.")


def conj_by_t(v: Sequence[int], e: int = 1) -> tuple[Word, int]:
    """
    Вычисляет t^e·t_v·t^{-e} и раскладывает результат как t_{v′}^ε.

    :param v: Слово над {1, 2, 3}.
    :param e: Показатель сопрягающей степени t.
    :return: (v′, ε).
    :raises NoSingleGeneratorImage: Результат не является образующей t_{v′}^{±1}.
    """

    validate_word(v, 3)
    t_e = power(special_elems().t, e)
    conjugated = compose_all([t_e, elem_tv(v), inverse(t_e)], 3)
    v_prime, sign = _as_generator(conjugated)
    image = elem_tv(v_prime)
    if not equal(conjugated, image if sign == 1 else inverse(image)):
        raise NoSingleGeneratorImage(f"Разложение для v = {format_word(v)} не подтвердилось.")
    return v_prime, sign


def clause_predictions(v: Sequence[int]) -> list[Prediction]:
    """
    Все пункты таблицы соотношений, под шаблон которых подходит v, и их предсказания.

    Пункт "1" — в v есть буква 1; "2a" — |v| = 1; "2b" — |v| = 2 (оба без буквы 1);
    "2c-i" … "2c-viii" — |v| ≥ 3, в позициях a и v̄ допускается 1 с соглашением 1̂ = 1.

    :param v: Непустое слово.
    :return: Предсказания (пункт, v′, ε).
    """

    word = tuple(v)
    predictions: list[Prediction] = []
    if 1 in word:
        predictions.append(Prediction("1", word, 1))
    if len(word) == 1 and 1 not in word:
        predictions.append(Prediction("2a", word, 1))
    elif len(word) == 2 and 1 not in word:
        predictions.append(Prediction("2b", (word[0], hat(word[1])), -1))
    elif len(word) >= 3:
        head, rest = word[:2], word[2:]
        if head == (2, 3):
            predictions.append(Prediction("2c-i", (2, 2, hat(rest[0]), *rest[1:]), 1))
        elif head == (3, 2):
            predictions.append(Prediction("2c-ii", (3, 3, hat(rest[0]), *rest[1:]), 1))
        elif head in {(2, 2), (3, 3)}:
            predictions.extend(_spine_clauses(head, rest))
    return predictions


def _spine_clauses(head: Word, rest: Word) -> list[Prediction]:
    threes = next((i for i, letter in enumerate(rest) if letter != 3), len(rest))
    tail = rest[threes:]
    swapped = (2, 3) if head == (2, 2) else (3, 2)
    names = {
        (2, 2): ("2c-iii", "2c-v", "2c-vii"),
        (3, 3): ("2c-iv", "2c-vi", "2c-viii"),
    }[head]
    run = (3,) * threes
    if not tail:
        return [Prediction(names[0], (*swapped, *run), -1)]
    if tail[0] != 2:
        return []
    if len(tail) == 1:
        return [Prediction(names[1], (*swapped, *run, 2), -1)]
    return [Prediction(names[2], (*swapped, *run, 2, hat(tail[1]), *tail[2:]), 1)]


def relation_for(v: Sequence[int], e: int = 1) -> Relation:
    """
    Машинное соотношение для t^e·t_v·t^{-e} с пометкой подходящих пунктов таблицы (только e = 1).

    :param v: Слово над {1, 2, 3}.
    :param e: Показатель сопрягающей степени t.
    :return: Relation.
    """

    word = tuple(v)
    v_prime, sign = conj_by_t(word, e)
    if e != 1 or not word:
        return Relation(word, v_prime, sign, e)
    predictions = clause_predictions(word)
    if not predictions:
        return Relation(word, v_prime, sign, e)
    return Relation(
        word,
        v_prime,
        sign,
        e,
        matched_clauses=",".join(p.clause for p in predictions),
        agrees_with_table=all((p.v_prime, p.sign) == (v_prime, sign) for p in predictions),
    )


def _words(min_len: int, max_len: int, letters: Sequence[int]) -> Iterator[Word]:
    for length in range(min_len, max_len + 1):
        yield from itertools.product(letters, repeat=length)


def _is_prefix(u: Word, w: Word) -> bool:
    return w[: len(u)] == u


def commute(g: Element, h: Element) -> bool:
    return equal(compose(g, h), compose(h, g))


def audit_incomparable(max_len: int, report: AuditReport | None = None) -> AuditReport:
    """
    Проверяет, что t_{w₁} и t_{w₂} коммутируют для всех несравнимых w₁, w₂ длины ≤ max_len.

    :param max_len: Наибольшая длина слов.
    :param report: Отчёт, в который дописывать итоги.
    :return: AuditReport.
    """

    report = report if report is not None else AuditReport()
    tally = report.tallies.setdefault("incomparable", ClauseTally())
    words = list(_words(0, max_len, (1, 2, 3)))
    for w1, w2 in itertools.combinations(words, 2):
        if _is_prefix(w1, w2) or _is_prefix(w2, w1):
            continue
        ok = commute(elem_tv(w1), elem_tv(w2))
        tally.record(ok)
        if not ok:
            report.incomparable_failures.append((w1, w2))
    return report


def audit_prop41(
    max_prefix_len: int,
    max_suffix_len: int,
    letters: Sequence[int] = (1, 2, 3),
    incomparable_len: int | None = 3,
) -> AuditReport:
    """
    Машинно проверяет каждый пункт таблицы соотношений на всех парах (w₁, w₁v) в пределах границ.

    Обе стороны t_{w₁}·t_{w₁v}·t_{w₁}⁻¹ и предсказанная t_{w₁v′}^ε вычисляются автоматами.
    Ошибки пункта "1" помечаются как расхождение с формулировкой, остальные — как ошибки проверки.

    :param max_prefix_len: Наибольшая длина w₁ (пустое слово включено).
    :param max_suffix_len: Наибольшая длина v, ≥ 1.
    :param letters: Алфавит суффиксов v.
    :param incomparable_len: Длина слов для проверки несравнимых пар; None — пропустить.
    :return: AuditReport.
    """

    if max_prefix_len < 0 or max_suffix_len < 1:
        raise WreathkitError("Границы перебора: |w₁| ≥ 0, |v| ≥ 1.")
    report = AuditReport()
    suffixes = list(_words(1, max_suffix_len, letters))

    for v in suffixes:
        predictions = clause_predictions(v)
        if len({(p.v_prime, p.sign) for p in predictions}) > 1:
            report.conflicts.append(Conflict(v, tuple(predictions)))

    for w1 in _words(0, max_prefix_len, (1, 2, 3)):
        base = elem_tv(w1)
        base_inv = inverse(base)
        for v in suffixes:
            conjugated = compose_all([base, elem_tv((*w1, *v)), base_inv], 3)
            try:
                image, sign = _as_generator(conjugated)
            except NoSingleGeneratorImage:
                report.non_generator.append((w1, v))
                continue
            if not _is_prefix(w1, image) or len(image) != len(w1) + len(v):
                report.non_generator.append((w1, v))
                continue
            truth = (image[len(w1):], sign)
            for prediction in clause_predictions(v):
                expected = FormalGenerator((*w1, *prediction.v_prime), prediction.sign).element
                ok = equal(conjugated, expected)
                report.tallies.setdefault(prediction.clause, ClauseTally()).record(ok)
                if not ok:
                    report.failures.append(
                        AuditFailure(
                            w1,
                            v,
                            prediction.clause,
                            (prediction.v_prime, prediction.sign),
                            truth,
                            discrepancy=prediction.clause in DISCREPANCY_CLAUSES,
                        )
                    )

    if incomparable_len is not None:
        audit_incomparable(incomparable_len, report)
    logger.info(
        "audit: {} clause failures ({} discrepancies), {} conflicts",
        len(report.failures),
        len(report.failures) - len(report.verification_failures),
        len(report.conflicts),
    )
    return report


def jmap(i: int, g: FormalGenerator) -> FormalGenerator:
    """Вложение j_i: t_v^{±1} ↦ t_{iv}^{±1}."""

    if i not in (1, 2, 3):
        raise WreathkitError(f"Индекс вложения {i} вне диапазона 1..3.")
    return FormalGenerator((i, *g.word), g.exponent)


def normality_witness(v: Sequence[int]) -> Relation:
    """
    Соотношение t⁻¹·t_v·t = t_{v′}^ε при |v′| = |v|.

    :param v: Непустое слово.
    :return: Relation с exponent = -1.
    """

    word = tuple(v)
    if not word:
        raise WreathkitError("Слово должно быть непустым.")
    v_prime, sign = conj_by_t(word, -1)
    if len(v_prime) != len(word):
        raise NoSingleGeneratorImage(f"Длина образа {format_word(v_prime)} отличается от |v|.")
    return Relation(word, v_prime, sign, -1)


def conj_map(k: int, e: int = 1) -> dict[Word, tuple[Word, int]]:
    """Отображение v ↦ (v′, ε) на {1,2,3}^k, индуцированное сопряжением t^e."""

    return {word: conj_by_t(word, e) for word in all_words(3, k)}


def is_conj_bijection(k: int) -> bool:
    images = conj_map(k)
    targets = {v_prime for v_prime, _ in images.values()}
    return all(len(v_prime) == k for v_prime in targets) and len(targets) == len(images)


def conj_closure_check(n: int, kmax_len: int) -> bool:
    """
    Проверяет, что сопряжение t^{±1} переводит t_v с |v| ≤ n в t_{v′}^{±1} с |v′| = |v|.

    :param n: Наибольшая длина слова.
    :param kmax_len: Допустимая длина образов, n ≤ kmax_len.
    :return: True, если подгруппа замкнута.
    """

    if n > kmax_len:
        raise WreathkitError(f"Нужно n ≤ kmax_len, получено {n} > {kmax_len}.")
    for word in _words(0, n, (1, 2, 3)):
        for e in (1, -1):
            try:
                v_prime, _ = conj_by_t(word, e)
            except NoSingleGeneratorImage:
                return False
            if len(v_prime) != len(word) or len(v_prime) > kmax_len:
                return False
    return True


def quotient_probe(
    n: int,
    kmax: int,
    search_weight: int,
    include_t: bool = False,
    budget: int | None = None,
) -> ProbeResult:
    """
    Ищет наименьшее k ≤ kmax, при котором t^k попадает в перечисленную часть ⟨t_v : 1 ≤ |v| ≤ n⟩.

    Перебор идёт с весами |v| + 1 до веса search_weight; это свидетельство, а не вердикт.

    :param n: Наибольшая длина слов образующих, ≥ 1.
    :param kmax: Наибольшая проверяемая степень; 0 даёт тривиальное k = 0.
    :param search_weight: Предел веса перебора.
    :param include_t: Добавить ли саму t в порождающие (проверка здравого смысла).
    :param budget: Предел числа хранимых элементов.
    :return: ProbeResult.
    """

    if kmax < 0:
        raise WreathkitError("kmax должен быть неотрицательным.")
    if kmax == 0:
        return ProbeResult(SearchOutcome.FOUND, 0)
    if n < 1:
        raise WreathkitError("n должно быть не меньше 1.")
    gens = tv_generators(n, WeightMode.PROPER, min_depth=0 if include_t else 1)
    limit = budget if budget is not None else settings.search_budget
    try:
        exploration = weighted_search(
            gens, search_weight, budget=limit, factor_cap=settings.factor_cap
        )
    except BudgetExceeded as exc:
        partial: Exploration = exc.partial
        exploration = partial

    t = special_elems().t
    for k in range(1, kmax + 1):
        if power(t, k) in exploration.weights:
            return ProbeResult(SearchOutcome.FOUND, k, len(exploration.weights))
    outcome = SearchOutcome.NOT_FOUND if exploration.complete else SearchOutcome.BUDGET_EXHAUSTED
    return ProbeResult(outcome, None, len(exploration.weights))
