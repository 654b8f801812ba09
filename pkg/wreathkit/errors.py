from __future__ import annotations

from typing import Any


class WreathkitError(ValueError):
    """Базовая ошибка инструментария: некорректный ввод или нарушенное предусловие."""


class PermError(WreathkitError):
    """Некорректная перестановка: буква вне алфавита, повтор буквы, не биекция."""


class WordError(WreathkitError):
    """Слово содержит букву вне алфавита."""


class MachineSpecError(WreathkitError):
    """Некорректная рекурсия автомата: висячее имя, неверная арность, не биекция в корне."""


class AlphabetMismatchError(WreathkitError):
    """Операция над элементами (перестановками) с разными алфавитами."""


class AutomatonSyntaxError(WreathkitError):
    """
    Синтаксическая ошибка в файле автомата.

    :ivar line: Номер строки (с 1).
    :ivar column: Номер столбца (с 1).
    """

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"строка {line}, столбец {column}: {message}")
        self.line = line
        self.column = column


class ExpressionError(WreathkitError):
    """
    Ошибка разбора выражения элемента.

    :ivar position: Позиция в тексте выражения (с 0).
    """

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"позиция {position}: {message}")
        self.position = position


class VerificationError(WreathkitError):
    """Машинная проверка не прошла: вход корректен, но утверждение не подтвердилось."""


class NoSingleGeneratorImage(VerificationError):
    """Сопряжённый элемент не имеет вида t_v^{±1}."""


class UnboundedGeneratorError(WreathkitError):
    """
    Среди состояний образующих есть неограниченный автоморфизм.

    :ivar state: Неограниченное состояние.
    """

    def __init__(self, message: str, state: Any) -> None:
        super().__init__(message)
        self.state = state


class NotDirectedError(WreathkitError):
    """Элемент не является направленным с периодом 1."""


class CertificateFailure(VerificationError):
    """
    Не прошла проверка формы образующей материнской группы.

    :ivar generator: Метка образующей.
    :ivar coordinate: Буква, на которой нарушена форма (None — корень).
    """

    def __init__(self, message: str, generator: str, coordinate: int | None) -> None:
        super().__init__(message)
        self.generator = generator
        self.coordinate = coordinate


class ConventionError(VerificationError):
    """Самопроверка конструкции не прошла: признак ошибки в соглашении о композиции."""


class BudgetExceeded(WreathkitError):
    """
    Перебор превысил бюджет узлов.

    :ivar partial: Частичный результат, накопленный до остановки.
    """

    def __init__(self, message: str, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial
