from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from wreathkit.errors import (
    AlphabetMismatchError,
    AutomatonSyntaxError,
    ExpressionError,
    MachineSpecError,
    PermError,
    WordError,
)
from wreathkit.machine import (
    IDENTITY_NAMES,
    Element,
    build_element,
    compose,
    identity,
    inverse,
    power,
    rootwise,
    to_spec,
)
from wreathkit.perms import Perm, parse_word, perm_format, perm_parse
from wreathkit.services.mother import elem_tv, special_elems

_NAME = r"[A-Za-z][A-Za-z0-9_']*"
_NAME_RE = re.compile(rf"^{_NAME}$")
_ALPHABET_RE = re.compile(r"^alphabet\s+(\d+)\s*$")
_STATE_RE = re.compile(
    rf"^state\s+(?P<name>\S+)\s+perm\s+(?P<perm>(?:\([^()]*\)\s*)+)(?P<kids>.*)$"
)
_ELEMENT_RE = re.compile(r"^element\s+(?P<name>\S+)\s*=\s*(?P<expr>.+)$")
_CHILD_RE = re.compile(r"^(?P<letter>\d+|\*)->(?P<target>\S+)$")

# Встроенные элементы G_3.
BUILTIN_DEGREE = 3


@dataclass
class AutomatonFile:
    """
    Разобранный файл автоматов.

    :ivar alphabet: Размер алфавита.
    :ivar states: Имя -> (корень, имена детей по буквам 1..N).
    :ivar elements: Имя -> исходный текст выражения (привязки element NAME = EXPR).
    :ivar bindings: Вычисленные привязки.
    """
    alphabet: int
    states: dict[str, tuple[Perm, list[str]]] = field(default_factory=dict)
    elements: dict[str, str] = field(default_factory=dict)
    bindings: dict[str, Element] = field(default_factory=dict, compare=False)

    @property
    def names(self) -> list[str]:
        return [*self.states, *self.elements]

    def element(self, name: str) -> Element:
        """
        Элемент по имени состояния или привязки.

        :param name: Имя.
        :return: Element.
        :raises ExpressionError: Имя не определено в файле.
        """

        if name in self.bindings:
            return self.bindings[name]
        if name in self.states:
            return build_element(self.states, name, degree=self.alphabet)
        raise ExpressionError(f"Неизвестное имя {name!r}.", 0)


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _check_name(name: str, taken: Mapping[str, object], line: int) -> None:
    if name in IDENTITY_NAMES or not _NAME_RE.match(name):
        raise AutomatonSyntaxError(f"Недопустимое имя {name!r}.", line)
    if name in taken:
        raise AutomatonSyntaxError(f"Имя {name!r} уже определено.", line)


def _parse_children(kids: str, alphabet: int, line: int, column: int) -> list[str]:
    entries = kids.split()
    if len(entries) == 1 and entries[0].startswith("*"):
        match = _CHILD_RE.match(entries[0])
        if match is None:
            raise AutomatonSyntaxError(f"Некорректный переход {entries[0]!r}.", line, column)
        return [match.group("target")] * alphabet
    children: dict[int, str] = {}
    for entry in entries:
        match = _CHILD_RE.match(entry)
        if match is None or match.group("letter") == "*":
            raise AutomatonSyntaxError(f"Некорректный переход {entry!r}.", line, column)
        letter = int(match.group("letter"))
        if not 1 <= letter <= alphabet or letter in children:
            raise AutomatonSyntaxError(
                f"Буква {letter} вне алфавита или повторяется.", line, column
            )
        children[letter] = match.group("target")
    if len(children) != alphabet:
        raise AutomatonSyntaxError(
            f"Нужно {alphabet} переходов, получено {len(children)}.", line, column
        )
    return [children[letter] for letter in range(1, alphabet + 1)]


def parse_automaton_file(text: str) -> AutomatonFile:
    """
    Разбирает файл автоматов.

    Строки: `alphabet N`, `state NAME perm CYCLES CHILDLIST`, `element NAME = EXPR`;
    `#` начинает комментарий. CHILDLIST — либо `*->T`, либо N записей `i->T`; `_` — тождество.

    :param text: Содержимое файла.
    :return: AutomatonFile.
    :raises AutomatonSyntaxError: С номером строки и столбца.
    """

    parsed: AutomatonFile | None = None
    state_lines: dict[str, int] = {}
    pending: list[tuple[str, str, int]] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        column = len(raw) - len(raw.lstrip()) + 1
        if parsed is None:
            match = _ALPHABET_RE.match(line)
            if match is None:
                raise AutomatonSyntaxError("Файл должен начинаться с `alphabet N`.", number, column)
            alphabet = int(match.group(1))
            if alphabet < 1:
                raise AutomatonSyntaxError("Алфавит должен быть не меньше 1.", number, column)
            parsed = AutomatonFile(alphabet)
            continue

        if line.startswith("state"):
            match = _STATE_RE.match(line)
            if match is None:
                raise AutomatonSyntaxError(
                    "Ожидалось `state NAME perm CYCLES CHILDLIST`.", number, column
                )
            name = match.group("name")
            _check_name(name, {**parsed.states, **parsed.elements}, number)
            try:
                root = perm_parse(match.group("perm"), parsed.alphabet)
            except PermError as exc:
                raise AutomatonSyntaxError(str(exc), number, column + match.start("perm")) from exc
            kids = _parse_children(
                match.group("kids"), parsed.alphabet, number, column + match.start("kids")
            )
            parsed.states[name] = (root, kids)
            state_lines[name] = number
        elif line.startswith("element"):
            match = _ELEMENT_RE.match(line)
            if match is None:
                raise AutomatonSyntaxError("Ожидалось `element NAME = EXPR`.", number, column)
            name = match.group("name")
            _check_name(name, {**parsed.states, **parsed.elements}, number)
            parsed.elements[name] = match.group("expr").strip()
            pending.append((name, match.group("expr"), number))
        elif _ALPHABET_RE.match(line):
            raise AutomatonSyntaxError("Повторное объявление алфавита.", number, column)
        else:
            raise AutomatonSyntaxError(f"Неизвестная директива {line.split()[0]!r}.", number, column)

    if parsed is None:
        raise AutomatonSyntaxError("Пустой файл: нет строки `alphabet N`.", 1)

    for name, (_, kids) in parsed.states.items():
        for kid in kids:
            if kid not in IDENTITY_NAMES and kid not in parsed.states:
                raise AutomatonSyntaxError(
                    f"Состояние {name!r} ссылается на неизвестное {kid!r}.", state_lines[name]
                )
    for name, expr, number in pending:
        try:
            parsed.bindings[name] = parse_expression(expr, parsed)
        except (ExpressionError, AlphabetMismatchError, MachineSpecError) as exc:
            raise AutomatonSyntaxError(str(exc), number) from exc
    return parsed


def print_automaton_file(automaton: AutomatonFile) -> str:
    """Печатает файл так, что parse_automaton_file возвращает равный объект."""

    lines = [f"alphabet {automaton.alphabet}"]
    for name, (root, kids) in automaton.states.items():
        if len(set(kids)) == 1:
            children = f"*->{kids[0]}"
        else:
            children = " ".join(f"{letter}->{kid}" for letter, kid in enumerate(kids, start=1))
        lines.append(f"state {name} perm {perm_format(root)} {children}")
    for name, expr in automaton.elements.items():
        lines.append(f"element {name} = {expr}")
    return "\n".join(lines) + "\n"


def element_file(g: Element, name: str = "g") -> AutomatonFile:
    """
    Файл с одним элементом по его канонической таблице: состояния q0, q1, … и привязка name = q0.

    :param g: Элемент.
    :param name: Имя привязки.
    :return: AutomatonFile.
    """

    spec = to_spec(g)
    automaton = AutomatonFile(g.degree)
    for state, (root, kids) in spec.items():
        if state in IDENTITY_NAMES:
            continue
        automaton.states[state] = (perm_parse(root, g.degree), list(kids))
    automaton.elements[name] = "q0" if spec else "id"
    automaton.bindings[name] = g
    return automaton


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>-?\d+)|(?P<name>[A-Za-z][A-Za-z0-9_']*)|(?P<op>[()^*·])|(?P<bad>\S))"
)


@dataclass
class _Token:
    kind: str
    text: str
    position: int


class _ExpressionParser:
    """Рекурсивный спуск: expr := factor+; factor := atom ('^' int)*; atom := NAME | call | (expr)."""

    def __init__(self, text: str, context: AutomatonFile | None) -> None:
        self.text = text
        self.context = context
        self.degree = context.alphabet if context is not None else BUILTIN_DEGREE
        self.tokens = self._tokenize(text)
        self.index = 0

    def _tokenize(self, text: str) -> list[_Token]:
        tokens: list[_Token] = []
        position = 0
        stripped_end = len(text.rstrip())
        while position < stripped_end:
            match = _TOKEN_RE.match(text, position)
            if match is None:  # pragma: no cover - регулярное выражение принимает любой символ
                raise ExpressionError("Не удалось разобрать выражение.", position)
            kind = match.lastgroup or "bad"
            start = match.start(kind)
            if kind == "bad":
                raise ExpressionError(f"Неожиданный символ {match.group(kind)!r}.", start)
            tokens.append(_Token(kind, match.group(kind), start))
            position = match.end()
        return tokens

    def _peek(self) -> _Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _take(self, text: str | None = None) -> _Token:
        token = self._peek()
        if token is None:
            raise ExpressionError("Неожиданный конец выражения.", len(self.text))
        if text is not None and token.text != text:
            raise ExpressionError(f"Ожидалось {text!r}, получено {token.text!r}.", token.position)
        self.index += 1
        return token

    def parse(self) -> Element:
        if not self.tokens:
            raise ExpressionError("Пустое выражение.", 0)
        result = self._product()
        token = self._peek()
        if token is not None:
            raise ExpressionError(f"Лишний токен {token.text!r}.", token.position)
        return result

    def _product(self) -> Element:
        factors = [self._factor()]
        while True:
            token = self._peek()
            if token is None or token.text == ")":
                break
            if token.text in {"*", "·"}:
                self._take()
            factors.append(self._factor())
        result = factors[0]
        for factor in factors[1:]:
            result = compose(result, factor)
        return result

    def _factor(self) -> Element:
        element = self._atom()
        while (token := self._peek()) is not None and token.text == "^":
            self._take()
            exponent = self._take()
            if exponent.kind != "number":
                raise ExpressionError("После ^ ожидалось целое число.", exponent.position)
            k = int(exponent.text)
            element = inverse(element) if k == -1 else power(element, k)
        return element

    def _atom(self) -> Element:
        token = self._take()
        if token.text == "(":
            inner = self._product()
            self._take(")")
            return inner
        if token.kind != "name":
            raise ExpressionError(f"Неожиданный токен {token.text!r}.", token.position)
        following = self._peek()
        if token.text in {"perm", "tv"} and following is not None and following.text == "(":
            return self._call(token)
        return self._name(token)

    def _raw_argument(self, opening: _Token) -> tuple[str, int]:
        depth = 0
        start = opening.position + 1
        for position in range(opening.position, len(self.text)):
            char = self.text[position]
            if char == "(":
                depth += 1
            elif char == ")":
                depth -= 1
                if depth == 0:
                    while self._peek() is not None and self._peek().position <= position:  # type: ignore[union-attr]
                        self.index += 1
                    return self.text[start:position], start
        raise ExpressionError("Незакрытая скобка.", opening.position)

    def _call(self, token: _Token) -> Element:
        opening = self._take("(")
        body, start = self._raw_argument(opening)
        if token.text == "perm":
            cycles = body.strip()
            text = cycles if cycles.startswith("(") else f"({cycles})"
            try:
                return rootwise(perm_parse(text, self.degree))
            except PermError as exc:
                raise ExpressionError(str(exc), start) from exc
        self._require_builtin_degree(token)
        try:
            return elem_tv(parse_word(body, BUILTIN_DEGREE))
        except WordError as exc:
            raise ExpressionError(str(exc), start) from exc

    def _require_builtin_degree(self, token: _Token) -> None:
        if self.degree != BUILTIN_DEGREE:
            raise AlphabetMismatchError(
                f"Встроенный {token.text!r} задан над алфавитом 3, а контекст — над {self.degree}."
            )

    def _name(self, token: _Token) -> Element:
        name = token.text
        if self.context is not None and (name in self.context.bindings or name in self.context.states):
            return self.context.element(name)
        if name == "id":
            return identity(self.degree)
        builtins = {"c": "c", "t": "t", "ctilde": "c_tilde"}
        if name in builtins:
            self._require_builtin_degree(token)
            return getattr(special_elems(), builtins[name])
        raise ExpressionError(f"Неизвестное имя {name!r}.", token.position)


def parse_expression(text: str, context: AutomatonFile | None = None) -> Element:
    """
    Вычисляет выражение элемента.

    Произведение — соседство множителей (или `*`), применяется слева направо; `^-1`, `^k`,
    скобки; встроенные `perm(...)`, `tv(слово)`, `c`, `t`, `ctilde`, `id`. Имена из файла
    имеют приоритет над встроенными.

    :param text: Выражение.
    :param context: Файл автоматов (необязательно; без него алфавит равен 3).
    :return: Element.
    :raises ExpressionError: Синтаксис или неизвестное имя.
    :raises AlphabetMismatchError: Встроенный элемент G_3 в контексте другого алфавита.
    """

    return _ExpressionParser(text, context).parse()
