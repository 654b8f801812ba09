from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

from wreathkit.errors import AlphabetMismatchError, MachineSpecError, WordError
from wreathkit.perms import Perm, Word, perm_compose, perm_format, perm_inverse, perm_parse
from wreathkit.services import intern_state

# Зарезервированные имена тождественного состояния в рекурсиях.
IDENTITY_NAMES = frozenset({"_", "1"})

# Описание состояния: корневая перестановка и d имён детей.
StateSpec = tuple[Perm, Sequence[str]]

ElementKey = tuple[int, tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]


@dataclass(frozen=True, eq=False)
class Element:
    """
    Автоматный автоморфизм d-регулярного дерева: таблица состояний и начальное состояние.

    Состояние i задаётся корнем roots[i] и детьми children[i][x - 1] для буквы x.
    Равенство и хэш идут через канонический ключ, поэтому два элемента равны
    ровно тогда, когда задают один и тот же автоморфизм.

    :ivar degree: Размер алфавита d.
    :ivar roots: Корневые перестановки состояний.
    :ivar children: Для каждого состояния индексы детей по буквам 1..d.
    :ivar initial: Индекс начального состояния.
    :ivar canonical: Таблица минимальна и занумерована обходом в ширину.
    """

    degree: int
    roots: tuple[Perm, ...]
    children: tuple[tuple[int, ...], ...]
    initial: int = 0
    canonical: bool = False

    @cached_property
    def key(self) -> ElementKey:
        form = self if self.canonical else canonicalize(self)
        return (
            form.degree,
            tuple(root.images for root in form.roots),
            form.children,
        )

    @property
    def root(self) -> Perm:
        return self.roots[self.initial]

    @property
    def state_count(self) -> int:
        form = self if self.canonical else canonicalize(self)
        return len(form.roots)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __mul__(self, other: Element) -> Element:
        return compose(self, other)

    def __invert__(self) -> Element:
        return inverse(self)

    def __pow__(self, k: int) -> Element:
        return power(self, k)

    def __repr__(self) -> str:
        return (
            f"Element(d={self.degree}, states={self.state_count}, "
            f"root={perm_format(self.root)!r})"
        )


def _check_same_degree(g: Element, h: Element) -> None:
    if g.degree != h.degree:
        raise AlphabetMismatchError(f"Алфавиты различаются: {g.degree} и {h.degree}.")


def _reachable(g: Element) -> list[int]:
    order = [g.initial]
    seen = {g.initial}
    queue = deque(order)
    while queue:
        state = queue.popleft()
        for child in g.children[state]:
            if child not in seen:
                seen.add(child)
                order.append(child)
                queue.append(child)
    return order


def canonicalize(g: Element) -> Element:
    """
    Минимизирует автомат и нумерует состояния обходом в ширину от начального.

    Начальное разбиение — по корневой перестановке, затем классы дробятся по
    классам детей до стабилизации. Результат интернируется.

    :param g: Элемент.
    :return: Канонический Element.
    """

    if g.canonical:
        return g
    states = _reachable(g)

    block = {state: g.roots[state].images for state in states}
    classes = _renumber(block, states)
    while True:
        signature = {
            state: (classes[state], tuple(classes[child] for child in g.children[state]))
            for state in states
        }
        refined = _renumber(signature, states)
        if len(set(refined.values())) == len(set(classes.values())):
            break
        classes = refined

    representative: dict[int, int] = {}
    for state in states:
        representative.setdefault(classes[state], state)

    number: dict[int, int] = {classes[g.initial]: 0}
    order = [classes[g.initial]]
    queue = deque(order)
    while queue:
        cls = queue.popleft()
        for child in g.children[representative[cls]]:
            child_cls = classes[child]
            if child_cls not in number:
                number[child_cls] = len(order)
                order.append(child_cls)
                queue.append(child_cls)

    roots = tuple(g.roots[representative[cls]] for cls in order)
    children = tuple(
        tuple(number[classes[child]] for child in g.children[representative[cls]])
        for cls in order
    )
    form = Element(g.degree, roots, children, 0, canonical=True)
    return intern_state.intern(form)


def _renumber(labels: Mapping[int, Any], states: Sequence[int]) -> dict[int, int]:
    ids: dict[Any, int] = {}
    return {state: ids.setdefault(labels[state], len(ids)) for state in states}


def _restate(g: Element, state: int) -> Element:
    return canonicalize(Element(g.degree, g.roots, g.children, state))


def identity(degree: int) -> Element:
    """Тождественный автоморфизм — общий экземпляр на каждый размер алфавита."""

    if degree < 1:
        raise MachineSpecError("Размер алфавита должен быть не меньше 1.")
    form = Element(degree, (Perm.identity(degree),), ((0,) * degree,), 0, canonical=True)
    return intern_state.intern(form)


def rootwise(sigma: Perm) -> Element:
    """
    Корневой автоморфизм (1, …, 1)σ.

    :param sigma: Перестановка степени d.
    :return: Element, переставляющий только первый уровень.
    """

    degree = sigma.degree
    raw = Element(
        degree,
        (sigma, Perm.identity(degree)),
        ((1,) * degree, (1,) * degree),
    )
    return canonicalize(raw)


def build_element(
    spec: Mapping[str, StateSpec],
    initial: str,
    degree: int | None = None,
    canonical: bool = True,
) -> Element:
    """
    Строит элемент по именованной рекурсии (допускаются ссылки на себя).

    :param spec: Имя состояния -> (корень, имена детей); "_" или "1" — тождество.
    :param initial: Имя начального состояния.
    :param degree: Размер алфавита (нужен, если spec пуст).
    :param canonical: Минимизировать ли результат.
    :return: Element.
    :raises MachineSpecError: Висячее имя, неверная арность, разные степени корней.
    """

    names = [name for name in spec if name not in IDENTITY_NAMES]
    if degree is None:
        if not names:
            raise MachineSpecError("Не удалось определить размер алфавита: нет состояний.")
        degree = spec[names[0]][0].degree
    if initial not in spec and initial not in IDENTITY_NAMES:
        raise MachineSpecError(f"Начальное состояние {initial!r} не описано.")

    index = {name: position for position, name in enumerate(names)}
    identity_index = len(names)
    roots: list[Perm] = []
    children: list[tuple[int, ...]] = []
    for name in names:
        root, kids = spec[name]
        if root.degree != degree:
            raise MachineSpecError(
                f"Состояние {name!r}: корень степени {root.degree}, ожидалась {degree}."
            )
        if len(kids) != degree:
            raise MachineSpecError(
                f"Состояние {name!r}: {len(kids)} детей, ожидалось {degree}."
            )
        row: list[int] = []
        for kid in kids:
            if kid in IDENTITY_NAMES:
                row.append(identity_index)
            elif kid in index:
                row.append(index[kid])
            else:
                raise MachineSpecError(f"Состояние {name!r} ссылается на неизвестное {kid!r}.")
        roots.append(root)
        children.append(tuple(row))
    roots.append(Perm.identity(degree))
    children.append((identity_index,) * degree)

    start = identity_index if initial in IDENTITY_NAMES else index[initial]
    raw = Element(degree, tuple(roots), tuple(children), start)
    return canonicalize(raw) if canonical else raw


def act(g: Element, word: Sequence[int]) -> Word:
    """
    Образ вершины: g(xw) = σ(x)·(g|_x)(w).

    :param g: Элемент.
    :param word: Слово над {1..d}.
    :return: Слово той же длины.
    """

    state = g.initial
    image: list[int] = []
    for letter in word:
        if not 1 <= letter <= g.degree:
            raise WordError(f"Буква {letter} вне алфавита {{1..{g.degree}}}.")
        image.append(g.roots[state].images[letter - 1])
        state = g.children[state][letter - 1]
    return tuple(image)


def restrict(g: Element, word: Sequence[int]) -> Element:
    """
    Сечение g|_w.

    :param g: Элемент.
    :param word: Вершина дерева.
    :return: Канонический Element.
    """

    state = g.initial
    for letter in word:
        if not 1 <= letter <= g.degree:
            raise WordError(f"Буква {letter} вне алфавита {{1..{g.degree}}}.")
        state = g.children[state][letter - 1]
    return _restate(g, state)


def compose(g: Element, h: Element) -> Element:
    """
    Произведение g·h: сначала действует g; (g·h)|_x = g|_x · h|_{σ_g(x)}.

    Строится только достижимое замыкание пар состояний.

    :param g: Левый множитель.
    :param h: Правый множитель.
    :return: Канонический Element.
    :raises AlphabetMismatchError: Разные алфавиты.
    """

    _check_same_degree(g, h)
    g, h = canonicalize(g), canonicalize(h)
    if is_identity(g):
        return h
    if is_identity(h):
        return g
    cached = intern_state.cached_product(g.key, h.key)
    if cached is not None:
        return cached

    start = (g.initial, h.initial)
    number = {start: 0}
    pairs = [start]
    roots: list[Perm] = []
    children: list[tuple[int, ...]] = []
    position = 0
    while position < len(pairs):
        left, right = pairs[position]
        position += 1
        sigma = g.roots[left]
        roots.append(perm_compose(sigma, h.roots[right]))
        row: list[int] = []
        for letter in range(1, g.degree + 1):
            pair = (g.children[left][letter - 1], h.children[right][sigma.images[letter - 1] - 1])
            if pair not in number:
                number[pair] = len(pairs)
                pairs.append(pair)
            row.append(number[pair])
        children.append(tuple(row))

    product = canonicalize(Element(g.degree, tuple(roots), tuple(children)))
    return intern_state.store_product(g.key, h.key, product)


def compose_all(chain: Iterable[Element], degree: int) -> Element:
    """Произведение цепочки слева направо; пустая цепочка — тождество."""

    result = identity(degree)
    for element in chain:
        result = compose(result, element)
    return result


def inverse(g: Element) -> Element:
    """
    Обратный элемент: корень σ⁻¹, (g⁻¹)|_x = (g|_{σ⁻¹(x)})⁻¹.

    :param g: Элемент.
    :return: Канонический Element.
    """

    roots = tuple(perm_inverse(root) for root in g.roots)
    children = tuple(
        tuple(g.children[state][roots[state].images[letter - 1] - 1]
              for letter in range(1, g.degree + 1))
        for state in range(len(g.roots))
    )
    return canonicalize(Element(g.degree, roots, children, g.initial))


def power(g: Element, k: int) -> Element:
    """Степень g^k (k может быть отрицательным), быстрым возведением."""

    base = g if k >= 0 else inverse(g)
    result = identity(g.degree)
    exponent = abs(k)
    while exponent:
        if exponent & 1:
            result = compose(result, base)
        exponent >>= 1
        if exponent:
            base = compose(base, base)
    return result


def conjugate(g: Element, h: Element) -> Element:
    """Сопряжение g^h = h⁻¹·g·h."""

    return compose(compose(inverse(h), g), h)


def is_identity(g: Element) -> bool:
    """Истина, если у всех достижимых состояний тривиальный корень."""

    return all(g.roots[state].is_identity() for state in _reachable(g))


def equal(g: Element, h: Element) -> bool:
    """
    Проверяет равенство автоморфизмов через канонические формы.

    :raises AlphabetMismatchError: Разные алфавиты.
    """

    _check_same_degree(g, h)
    return g.key == h.key


def states_of(g: Element) -> list[Element]:
    """
    Множество состояний S(g) — все различные сечения.

    :param g: Элемент.
    :return: Канонические элементы в порядке обхода в ширину (g первый).
    """

    form = canonicalize(g)
    return [_restate(form, state) for state in range(len(form.roots))]


def from_sections(sections: Sequence[Element], root: Perm) -> Element:
    """
    Собирает элемент (g_1, …, g_d)σ из сечений первого уровня.

    :param sections: d элементов над одним алфавитом.
    :param root: Корневая перестановка степени d.
    :return: Канонический Element.
    :raises MachineSpecError: Число сечений не равно d.
    """

    degree = root.degree
    if len(sections) != degree:
        raise MachineSpecError(f"Нужно {degree} сечений, получено {len(sections)}.")
    roots: list[Perm] = [root]
    children: list[tuple[int, ...]] = [()]
    heads: list[int] = []
    for section in sections:
        if section.degree != degree:
            raise AlphabetMismatchError(
                f"Сечение над алфавитом {section.degree}, ожидался {degree}."
            )
        offset = len(roots)
        heads.append(offset + section.initial)
        roots.extend(section.roots)
        children.extend(tuple(child + offset for child in row) for row in section.children)
    children[0] = tuple(heads)
    return canonicalize(Element(degree, tuple(roots), tuple(children)))


def sections(g: Element) -> list[Element]:
    """Сечения первого уровня g|_1, …, g|_d."""

    return [restrict(g, (letter,)) for letter in range(1, g.degree + 1)]


def to_spec(g: Element) -> dict[str, tuple[str, list[str]]]:
    """
    Сериализует канонический автомат: состояния q0, q1, …; тождество — "_".

    :param g: Элемент.
    :return: Словарь имя -> (цикловая запись корня, имена детей); q0 — начальное.
    """

    form = canonicalize(g)
    trivial = {
        state for state in range(len(form.roots))
        if form.roots[state].is_identity() and all(c == state for c in form.children[state])
    }

    def name(state: int) -> str:
        return "_" if state in trivial else f"q{state}"

    if 0 in trivial:
        return {}
    return {
        name(state): (perm_format(form.roots[state]), [name(c) for c in form.children[state]])
        for state in range(len(form.roots))
        if state not in trivial
    }


def from_spec(payload: Mapping[str, tuple[str, Sequence[str]]], degree: int) -> Element:
    """Обратное к to_spec: пустой словарь — тождество."""

    if not payload:
        return identity(degree)
    spec = {
        name: (perm_parse(root, degree), list(kids)) for name, (root, kids) in payload.items()
    }
    return build_element(spec, "q0", degree=degree)
