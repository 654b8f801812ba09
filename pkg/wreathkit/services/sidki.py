from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum

import networkx as nx
from loguru import logger

from wreathkit.machine import Element, canonicalize
from wreathkit.perms import Word


class Kind(StrEnum):
    IDENTITY = "Identity"
    FINITARY = "Finitary"
    DIRECTED = "Directed"
    BOUNDED_OTHER = "BoundedOther"
    UNBOUNDED = "Unbounded"


BOUNDED_KINDS = frozenset({Kind.IDENTITY, Kind.FINITARY, Kind.DIRECTED, Kind.BOUNDED_OTHER})


@dataclass(frozen=True)
class Classification:
    """
    Вердикт структурной теории ограниченных автоморфизмов.

    :ivar kind: Тип элемента.
    :ivar finitary_depth: Наименьший уровень, где все сечения тривиальны (только Finitary/Identity).
    :ivar period: Длина цикла (только Directed).
    :ivar spine: Слово вдоль цикла, g|_spine = g (только Directed).
    :ivar bounded_depth: Наименьшее m, при котором нефинитарные сечения уровня m направлены.
    :ivar max_activity: Равномерная оценка активности (ограниченные типы).
    """
    kind: Kind
    finitary_depth: int | None = None
    period: int | None = None
    spine: Word | None = None
    bounded_depth: int | None = None
    max_activity: int | None = None

    @property
    def is_bounded(self) -> bool:
        return self.kind in BOUNDED_KINDS


@dataclass
class _Analysis:
    form: Element
    graph: nx.MultiDiGraph
    trivial: set[int]
    finitary: set[int]
    cyclic_components: list[frozenset[int]]
    bounded: bool


def _trivial_states(form: Element) -> set[int]:
    nontrivial = {s for s in range(len(form.roots)) if not form.roots[s].is_identity()}
    changed = True
    while changed:
        changed = False
        for state, row in enumerate(form.children):
            if state not in nontrivial and any(child in nontrivial for child in row):
                nontrivial.add(state)
                changed = True
    return set(range(len(form.roots))) - nontrivial


def state_graph(g: Element) -> nx.MultiDiGraph:
    """
    Граф нетождественных состояний: ребро s -> s|_x с ключом-буквой x.

    :param g: Элемент.
    :return: MultiDiGraph над индексами канонической таблицы.
    """

    form = canonicalize(g)
    trivial = _trivial_states(form)
    graph = nx.MultiDiGraph()
    for state in range(len(form.roots)):
        if state in trivial:
            continue
        graph.add_node(state)
        for letter, child in enumerate(form.children[state], start=1):
            if child not in trivial:
                graph.add_edge(state, child, key=letter, letter=letter)
    return graph


def _is_cyclic(graph: nx.MultiDiGraph, component: frozenset[int]) -> bool:
    if len(component) > 1:
        return True
    (node,) = component
    return graph.has_edge(node, node)


def _analyse(g: Element) -> _Analysis:
    form = canonicalize(g)
    trivial = _trivial_states(form)
    graph = state_graph(form)

    cyclic = [
        frozenset(c) for c in nx.strongly_connected_components(graph)
        if _is_cyclic(graph, frozenset(c))
    ]
    on_cycles = set().union(*cyclic) if cyclic else set()
    reaches_cycle = set(on_cycles)
    for node in on_cycles:
        reaches_cycle |= nx.ancestors(graph, node)
    finitary = (set(graph.nodes) - reaches_cycle) | trivial

    bounded = True
    for component in cyclic:
        internal = graph.subgraph(component).number_of_edges()
        if internal != len(component):
            bounded = False
            break
        below: set[int] = set()
        for node in component:
            below |= nx.descendants(graph, node)
        if (below - component) & on_cycles:
            bounded = False
            break
    return _Analysis(form, graph, trivial, finitary, cyclic, bounded)


def activity_profile(g: Element, n_max: int) -> list[int]:
    """
    Активности на уровнях 0..n_max: число w ∈ X^n с g|_w ≠ 1.

    :param g: Элемент.
    :param n_max: Последний уровень.
    :return: Список длины n_max + 1.
    """

    form = canonicalize(g)
    trivial = _trivial_states(form)
    counts = [0 if state in trivial else 1 for state in range(len(form.roots))]
    profile = [counts[form.initial]]
    for _ in range(n_max):
        counts = [sum(counts[child] for child in row) for row in form.children]
        profile.append(counts[form.initial])
    return profile


def activity(g: Element, n: int) -> int:
    """
    Число вершин уровня n с нетривиальным сечением.

    :param g: Элемент.
    :param n: Уровень, n ≥ 0.
    :return: #{w ∈ X^n : g|_w ≠ 1}.
    """

    if n < 0:
        raise ValueError("Уровень должен быть неотрицательным.")
    return activity_profile(g, n)[n]


def _finitary_depth(analysis: _Analysis, state: int) -> int:
    if state in analysis.trivial:
        return 0
    below = nx.descendants(analysis.graph, state) | {state}
    return 1 + nx.dag_longest_path_length(nx.DiGraph(analysis.graph.subgraph(below)))


def _directed_spine(analysis: _Analysis, state: int) -> Word | None:
    component = next((c for c in analysis.cyclic_components if state in c), None)
    if component is None:
        return None
    if analysis.graph.subgraph(component).number_of_edges() != len(component):
        return None
    for node in component:
        for _, child in analysis.graph.out_edges(node):
            if child not in component and child not in analysis.finitary:
                return None
    spine: list[int] = []
    current = state
    while True:
        step = next(
            (letter, child)
            for _, child, letter in analysis.graph.out_edges(current, keys=True)
            if child in component
        )
        spine.append(step[0])
        current = step[1]
        if current == state:
            return tuple(spine)


def _bounded_depth(analysis: _Analysis) -> int:
    form = analysis.form
    level = {form.initial}
    for depth in range(len(form.roots) + 1):
        if all(
            state in analysis.finitary or _directed_spine(analysis, state) is not None
            for state in level
        ):
            return depth
        level = {child for state in level for child in form.children[state]}
    raise AssertionError("bounded element without a directed level")


def classify(g: Element) -> Classification:
    """
    Классифицирует автоматный автоморфизм по графу состояний.

    Конечный тип — граф ацикличен; направленный — g на простом цикле, выходы
    с которого финитарны; ограниченный — каждая нетривиальная компонента
    сильной связности есть простой цикл и никакой путь не соединяет два цикла.

    :param g: Элемент.
    :return: Classification.
    """

    analysis = _analyse(g)
    form = analysis.form
    start = form.initial
    states = len(form.roots)

    if start in analysis.trivial:
        return Classification(Kind.IDENTITY, finitary_depth=0, max_activity=0)
    if start in analysis.finitary:
        depth = _finitary_depth(analysis, start)
        profile = activity_profile(form, depth)
        return Classification(Kind.FINITARY, finitary_depth=depth, max_activity=max(profile))
    if not analysis.bounded:
        logger.debug("unbounded element with {} states", states)
        return Classification(Kind.UNBOUNDED)

    lengths = [len(component) for component in analysis.cyclic_components]
    horizon = max(2 * states, states + math.lcm(*lengths))
    max_activity = max(activity_profile(form, horizon))

    spine = _directed_spine(analysis, start)
    if spine is not None:
        return Classification(
            Kind.DIRECTED,
            period=len(spine),
            spine=spine,
            bounded_depth=0,
            max_activity=max_activity,
        )
    return Classification(
        Kind.BOUNDED_OTHER,
        bounded_depth=_bounded_depth(analysis),
        max_activity=max_activity,
    )


def is_finitary(g: Element) -> bool:
    return classify(g).kind in {Kind.IDENTITY, Kind.FINITARY}


def is_directed(g: Element) -> bool:
    return classify(g).kind == Kind.DIRECTED


def is_bounded(g: Element) -> bool:
    return classify(g).is_bounded
