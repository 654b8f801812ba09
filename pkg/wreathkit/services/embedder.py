from __future__ import annotations

import math
from enum import StrEnum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from loguru import logger

from wreathkit.errors import (
    CertificateFailure,
    ConventionError,
    NotDirectedError,
    PermError,
    UnboundedGeneratorError,
    WreathkitError,
)
from wreathkit.machine import (
    Element,
    canonicalize,
    compose_all,
    equal,
    from_spec,
    inverse,
    restrict,
    rootwise,
    states_of,
    to_spec,
)
from wreathkit.perms import Perm, perm_cycles, perm_format, perm_parse, perm_power, word_rank, word_unrank
from wreathkit.services.sidki import Classification, Kind, classify


class EmbedPath(StrEnum):
    ALIGNED = "aligned"  # общая неподвижная буква хребта, δ не строится
    DELTA = "delta"  # o′ = 1, сопряжение δ и нормализация β


@dataclass
class EmbedAnalysis:
    """
    Первый шаг компилятора вложения.

    :ivar states: Q — все состояния образующих.
    :ivar finitary: F — финитарные элементы Q.
    :ivar m: Наименьший уровень, больший всех глубин в Q.
    :ivar l: НОК периодов направленных состояний (1, если их нет).
    :ivar classifications: Классификация каждого состояния Q.
    """
    states: list[Element]
    finitary: list[Element]
    m: int
    l: int  # noqa: E741
    classifications: dict[Element, Classification] = field(default_factory=dict)


@dataclass(frozen=True)
class FormCertificate:
    """
    Проверка формы образующей материнской группы.

    :ivar passed: Форма подтверждена.
    :ivar coordinate: Буква, на которой нарушена форма (None — корень или финитарный случай).
    :ivar reason: Описание.
    """
    passed: bool
    coordinate: int | None = None
    reason: str = ""


@dataclass(frozen=True)
class GeneratorCertificate:
    label: str
    kind: str
    source: Element | None
    output: Element
    certificate: FormCertificate


@dataclass
class EmbedReport:
    """
    Результат компилятора: образующие в форме материнской группы над X″.

    :ivar degree: Исходный алфавит d.
    :ivar analysis: EmbedAnalysis.
    :ivar restricted: R — сечения уровня m.
    :ivar intermediate_alphabet: |X′| = d^l.
    :ivar m_prime: Степень второго укрупнения.
    :ivar final_alphabet: |X″| = |X′|^{m′}.
    :ivar o_prime: Выделенная буква X′.
    :ivar zeta: Транзитивный цикл на X′ (None, если сопряжение δ не понадобилось).
    :ivar o_double_prime: Буква X″, равная блоку (o′, …, o′).
    :ivar path: Каким путём получены образующие: ALIGNED или DELTA.
    :ivar certificates: Проверки по каждой выходной образующей.
    :ivar reassembly: Для направленных: α^δ = ζ_z⁻¹·β·ζ_{σ(z)} подтверждено.
    :ivar failures: Непрошедшие самопроверки нестрогого прогона.
    """
    degree: int
    analysis: EmbedAnalysis
    restricted: list[Element]
    intermediate_alphabet: int
    m_prime: int
    final_alphabet: int
    o_prime: int
    zeta: Perm | None
    o_double_prime: int
    path: EmbedPath
    certificates: list[GeneratorCertificate] = field(default_factory=list)
    reassembly: list[bool] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def aligned(self) -> bool:
        return self.path == EmbedPath.ALIGNED

    @property
    def ok(self) -> bool:
        return (
            not self.failures
            and all(c.certificate.passed for c in self.certificates)
            and all(self.reassembly)
        )

    @property
    def target(self) -> str:
        return f"G_{self.final_alphabet} ≀ {self.degree}^{self.analysis.m}"

    def to_payload(self) -> dict[str, Any]:
        """Сериализуемое представление; каждая выходная образующая — спецификация автомата."""

        return {
            "degree": self.degree,
            "m": self.analysis.m,
            "l": self.analysis.l,
            "states": len(self.analysis.states),
            "finitary": len(self.analysis.finitary),
            "restricted": len(self.restricted),
            "intermediate_alphabet": self.intermediate_alphabet,
            "m_prime": self.m_prime,
            "final_alphabet": self.final_alphabet,
            "o_prime": self.o_prime,
            "zeta": perm_format(self.zeta) if self.zeta is not None else None,
            "o_double_prime": self.o_double_prime,
            "path": str(self.path),
            "aligned": self.aligned,
            "failures": self.failures,
            "target": self.target,
            "reassembly": self.reassembly,
            "certificates": [
                {
                    "label": cert.label,
                    "kind": cert.kind,
                    "passed": cert.certificate.passed,
                    "coordinate": cert.certificate.coordinate,
                    "reason": cert.certificate.reason,
                    "automaton": to_spec(cert.output),
                }
                for cert in self.certificates
            ],
        }


def _depth(classification: Classification) -> int:
    if classification.kind in {Kind.IDENTITY, Kind.FINITARY}:
        return classification.finitary_depth or 0
    return classification.bounded_depth or 0


def _unique(elements: Sequence[Element]) -> list[Element]:
    return list(dict.fromkeys(elements))


def analyze(gens: Sequence[Element]) -> EmbedAnalysis:
    """
    Собирает Q, F и наименьшие допустимые m и l.

    :param gens: Ограниченные автоматные образующие над одним алфавитом.
    :return: EmbedAnalysis.
    :raises UnboundedGeneratorError: Среди состояний есть неограниченный элемент.
    """

    if not gens:
        raise WreathkitError("Нужна хотя бы одна образующая.")
    states = _unique([state for g in gens for state in states_of(g)])
    classifications: dict[Element, Classification] = {}
    for state in states:
        verdict = classify(state)
        if not verdict.is_bounded:
            raise UnboundedGeneratorError(
                f"Состояние с {state.state_count} состояниями не ограничено.", state
            )
        classifications[state] = verdict

    finitary = [s for s in states if classifications[s].kind in {Kind.IDENTITY, Kind.FINITARY}]
    m = max(_depth(verdict) for verdict in classifications.values()) + 1
    periods = [v.period for v in classifications.values() if v.period is not None]
    l = math.lcm(*periods) if periods else 1  # noqa: E741
    logger.debug("analysis: |Q|={}, |F|={}, m={}, l={}", len(states), len(finitary), m, l)
    return EmbedAnalysis(states, finitary, m, l, classifications)


def restricted_set(gens: Sequence[Element], m: int) -> list[Element]:
    """
    R = {q|_w : q ∈ Q, w ∈ X^m} без повторов.

    :param gens: Образующие.
    :param m: Уровень.
    :return: Список канонических элементов.
    """

    level = _unique([state for g in gens for state in states_of(g)])
    for _ in range(m):
        level = _unique(
            [restrict(element, (x,)) for element in level for x in range(1, element.degree + 1)]
        )
    return level


def block_power(g: Element, l: int) -> Element:  # noqa: E741
    """
    Тот же автоморфизм над алфавитом X^l: корень — действие на уровне l, дети — сечения в блоках.

    :param g: Элемент над d.
    :param l: Длина блока, ≥ 1.
    :return: Элемент над d^l.
    """

    if l < 1:
        raise WreathkitError("Длина блока должна быть не меньше 1.")
    if l == 1:
        return canonicalize(g)
    form = canonicalize(g)
    degree = form.degree
    size = degree**l
    blocks = [word_unrank(letter, degree, l) for letter in range(1, size + 1)]
    roots: list[Perm] = []
    children: list[tuple[int, ...]] = []
    for state in range(len(form.roots)):
        images: list[int] = []
        row: list[int] = []
        for block in blocks:
            current = state
            image: list[int] = []
            for letter in block:
                image.append(form.roots[current].images[letter - 1])
                current = form.children[current][letter - 1]
            images.append(word_rank(image, degree))
            row.append(current)
        roots.append(Perm(tuple(images)))
        children.append(tuple(row))
    return canonicalize(Element(size, tuple(roots), tuple(children), form.initial))


def _zeta_index(zeta: Perm, o_prime: int) -> dict[int, int]:
    index: dict[int, int] = {}
    letter = o_prime
    for i in range(zeta.degree):
        index[letter] = i
        letter = zeta(letter)
    return index


def _check_transitive(zeta: Perm) -> None:
    cycles = perm_cycles(zeta)
    if len(cycles) != 1 or len(cycles[0]) != zeta.degree:
        raise PermError(f"Цикл ζ = {perm_format(zeta)} не транзитивен.")


def default_zeta(size: int) -> Perm:
    """Цикл (1 2 … N): блок ранга i переходит в блок ранга i + 1."""

    return Perm(tuple(range(2, size + 1)) + (1,)) if size > 1 else Perm.identity(1)


def build_delta(size: int, o_prime: int, zeta: Perm) -> Element:
    """
    Автомат δ с состояниями δ·ζ^{-j}: корень ζ^{-j}, ребёнок по букве x = ζ^i(o′) — состояние i.

    :param size: |X′|.
    :param o_prime: Выделенная буква.
    :param zeta: Транзитивный цикл степени |X′|.
    :return: Канонический δ.
    :raises PermError: ζ не транзитивен или степень не совпадает.
    """

    if zeta.degree != size:
        raise PermError(f"Степень ζ {zeta.degree} не равна |X′| = {size}.")
    if not 1 <= o_prime <= size:
        raise PermError(f"Буква o′ = {o_prime} вне алфавита {{1..{size}}}.")
    _check_transitive(zeta)
    index = _zeta_index(zeta, o_prime)
    row = tuple(index[x] for x in range(1, size + 1))
    roots = tuple(perm_power(zeta, -j) for j in range(size))
    return canonicalize(Element(size, roots, tuple(row for _ in range(size))))


def delta_conjugate(alpha: Element, delta: Element) -> Element:
    """α^δ = δ⁻¹·α·δ."""

    return compose_all([inverse(delta), alpha, delta], alpha.degree)


def _zeta_x(zeta: Perm, index: Mapping[int, int], x: int) -> Element:
    return rootwise(perm_power(zeta, index[x]))


def normalize_directed(alpha: Element, delta: Element, zeta: Perm, o_prime: int) -> Element:
    """
    β = ζ_z·α^δ·ζ_{σ(z)}⁻¹, где z — буква хребта направленного α периода 1.

    :param alpha: Направленный элемент периода 1.
    :param delta: Автомат δ.
    :param zeta: Цикл, по которому построен δ.
    :param o_prime: Выделенная буква.
    :return: β с β|_{o′} = β и корнем, фиксирующим o′.
    :raises NotDirectedError: α не направлен с периодом 1.
    """

    verdict = classify(alpha)
    if verdict.kind != Kind.DIRECTED or verdict.period != 1 or verdict.spine is None:
        raise NotDirectedError("Элемент не является направленным с периодом 1.")
    z = verdict.spine[0]
    index = _zeta_index(zeta, o_prime)
    beta = compose_all(
        [
            _zeta_x(zeta, index, z),
            delta_conjugate(alpha, delta),
            inverse(_zeta_x(zeta, index, alpha.root(z))),
        ],
        alpha.degree,
    )
    if beta.root(o_prime) != o_prime or not equal(restrict(beta, (o_prime,)), beta):
        raise ConventionError("β не фиксирует o′ или не совпадает со своим сечением в o′.")
    return beta


def mother_form_check(g: Element, o: int) -> FormCertificate:
    """
    Проверяет форму образующей материнской группы.

    Финитарный элемент проходит при глубине ≤ 1. Иначе корень фиксирует o,
    g|_o = g, а остальные сечения финитарны глубины ≤ 1.

    :param g: Элемент.
    :param o: Выделенная буква.
    :return: FormCertificate.
    """

    verdict = classify(g)
    if verdict.kind in {Kind.IDENTITY, Kind.FINITARY}:
        depth = verdict.finitary_depth or 0
        if depth <= 1:
            return FormCertificate(True, reason="корневая перестановка")
        return FormCertificate(False, reason=f"финитарная глубина {depth} > 1")
    if g.root(o) != o:
        return FormCertificate(False, reason=f"корень не фиксирует букву {o}")
    if not equal(restrict(g, (o,)), g):
        return FormCertificate(False, coordinate=o, reason=f"сечение в {o} не равно элементу")
    for x in range(1, g.degree + 1):
        if x == o:
            continue
        section = classify(restrict(g, (x,)))
        if section.kind not in {Kind.IDENTITY, Kind.FINITARY} or (section.finitary_depth or 0) > 1:
            return FormCertificate(
                False, coordinate=x, reason=f"сечение в {x} не финитарно глубины ≤ 1"
            )
    return FormCertificate(True, reason="образующая B-типа")


def _common_spine_letter(directed: Sequence[Element]) -> int | None:
    candidates: set[int] | None = None
    for alpha in directed:
        letters = {
            x for x in range(1, alpha.degree + 1)
            if alpha.root(x) == x and equal(restrict(alpha, (x,)), alpha)
        }
        candidates = letters if candidates is None else candidates & letters
    if not candidates:
        return None
    return min(candidates)


def _finitary_depth(g: Element) -> int:
    verdict = classify(g)
    if verdict.kind not in {Kind.IDENTITY, Kind.FINITARY}:
        raise ConventionError("Ожидался финитарный элемент.")
    return verdict.finitary_depth or 0


def _companion_depth(beta: Element, o: int) -> int:
    return max(
        (_finitary_depth(restrict(beta, (x,))) for x in range(1, beta.degree + 1) if x != o),
        default=0,
    )


def embed_pipeline(
    gens: Sequence[Element],
    labels: Sequence[str] | None = None,
    strict: bool = True,
    align: bool = True,
) -> EmbedReport:
    """
    Компилятор вложения ограниченной автоматной группы в G_{|X″|} ≀ d^m.

    Шаги: анализ, сечения уровня m, укрупнение X′ = X^l, сопряжение δ и нормализация
    направленных элементов (если у них нет общей неподвижной буквы хребта), второе
    укрупнение X″ = X′^{m′} и проверка формы каждой выходной образующей.

    :param gens: Ограниченные автоматные образующие.
    :param labels: Метки для отчёта (необязательно).
    :param strict: Бросать исключение при первой непрошедшей проверке;
        иначе проверка записывается в отчёт.
    :param align: Искать общую букву хребта; False — всегда путь через δ с o′ = 1.
    :return: EmbedReport.
    :raises CertificateFailure: strict и форма образующей не подтвердилась.
    :raises ConventionError: strict и не прошла самопроверка нормализации или сборки.
    """

    degree = gens[0].degree if gens else 0
    analysis = analyze(gens)
    restricted = restricted_set(gens, analysis.m)
    powered = [block_power(alpha, analysis.l) for alpha in restricted]
    size = degree**analysis.l
    names = [f"R{i}" for i in range(len(restricted))]
    if labels is not None:
        named = dict(zip(gens, labels, strict=False))
        names = [named.get(alpha, name) for alpha, name in zip(restricted, names, strict=True)]

    directed = [alpha for alpha in powered if classify(alpha).kind == Kind.DIRECTED]
    common: int | None = None
    if align:
        common = _common_spine_letter(directed) if directed else 1
    outputs: list[tuple[str, str, Element | None, Element]] = []
    reassembly: list[bool] = []
    failures: list[str] = []
    zeta: Perm | None = None

    def fail(error: WreathkitError) -> None:
        if strict:
            raise error
        logger.warning("embedding self-check failed: {}", error)
        failures.append(str(error))

    if common is not None:
        o_prime = common
        for name, source, alpha in zip(names, restricted, powered, strict=True):
            kind = "directed" if alpha in directed else "finitary"
            outputs.append((name, kind, source, alpha))
        logger.debug("directed elements aligned on letter {}", o_prime)
    else:
        o_prime = 1
        zeta = default_zeta(size)
        delta = build_delta(size, o_prime, zeta)
        index = _zeta_index(zeta, o_prime)
        for name, source, alpha in zip(names, restricted, powered, strict=True):
            if alpha not in directed:
                outputs.append((name, "finitary", source, delta_conjugate(alpha, delta)))
                continue
            try:
                beta = normalize_directed(alpha, delta, zeta, o_prime)
            except ConventionError as exc:
                fail(ConventionError(f"Образующая {name}: {exc}"))
                continue
            z = classify(alpha).spine[0]  # type: ignore[index]
            rebuilt = compose_all(
                [inverse(_zeta_x(zeta, index, z)), beta, _zeta_x(zeta, index, alpha.root(z))],
                size,
            )
            reassembly.append(equal(rebuilt, delta_conjugate(alpha, delta)))
            outputs.append((name, "directed", source, beta))
        outputs.append(("zeta", "zeta", None, rootwise(zeta)))

    depths = [1]
    for name, kind, _, element in outputs:
        try:
            if kind == "directed":
                depths.append(_companion_depth(element, o_prime))
            else:
                depths.append(_finitary_depth(element))
        except ConventionError as exc:
            fail(ConventionError(f"Образующая {name}: {exc}"))
    m_prime = max(depths)
    final_alphabet = size**m_prime
    o_double_prime = word_rank((o_prime,) * m_prime, size)

    report = EmbedReport(
        degree=degree,
        analysis=analysis,
        restricted=restricted,
        intermediate_alphabet=size,
        m_prime=m_prime,
        final_alphabet=final_alphabet,
        o_prime=o_prime,
        zeta=zeta,
        o_double_prime=o_double_prime,
        path=EmbedPath.DELTA if zeta is not None else EmbedPath.ALIGNED,
        reassembly=reassembly,
        failures=failures,
    )
    for name, kind, source, element in outputs:
        final = block_power(element, m_prime)
        certificate = mother_form_check(final, o_double_prime)
        report.certificates.append(GeneratorCertificate(name, kind, source, final, certificate))
        if not certificate.passed:
            logger.warning("certificate failed for {}: {}", name, certificate.reason)
            if strict:
                raise CertificateFailure(
                    f"Образующая {name}: {certificate.reason}.", name, certificate.coordinate
                )
    if not all(reassembly):
        fail(ConventionError("Сборка α^δ из β не подтвердилась."))
    logger.info("embedding target {} via {} path", report.target, report.path)
    return report


def recheck_report(payload: Mapping[str, Any]) -> list[str]:
    """
    Повторно проверяет сертификаты по сериализованному отчёту.

    :param payload: Результат EmbedReport.to_payload().
    :return: Список описаний непрошедших проверок (пустой — всё подтверждено).
    """

    problems: list[str] = []
    degree = int(payload["degree"])
    intermediate = int(payload["intermediate_alphabet"])
    final = int(payload["final_alphabet"])
    if intermediate != degree ** int(payload["l"]):
        problems.append("|X′| ≠ d^l")
    if final != intermediate ** int(payload["m_prime"]):
        problems.append("|X″| ≠ |X′|^{m′}")
    o = int(payload["o_double_prime"])
    for entry in payload["certificates"]:
        element = from_spec(entry["automaton"], final)
        certificate = mother_form_check(element, o)
        if not certificate.passed:
            problems.append(f"{entry['label']}: {certificate.reason}")
    if payload.get("zeta") is not None:
        zeta = perm_parse(str(payload["zeta"]), intermediate)
        try:
            _check_transitive(zeta)
        except PermError as exc:
            problems.append(str(exc))
    if not all(payload.get("reassembly", [])):
        problems.append("сборка α^δ не подтверждена")
    problems.extend(str(failure) for failure in payload.get("failures", []))
    return problems
