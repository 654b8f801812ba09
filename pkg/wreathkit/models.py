from __future__ import annotations

from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from wreathkit import __version__


class SearchOutcome(StrEnum):
    """Трёхзначный ответ ограниченного перебора."""

    FOUND = "found"
    NOT_FOUND = "not-found"
    BUDGET_EXHAUSTED = "budget-exhausted"


class Failure(BaseModel):
    """
    Непрошедшая машинная проверка.

    :ivar check: Имя проверки.
    :ivar detail: Человекочитаемое описание.
    :ivar data: Структурированные поля (слова, координаты, ожидаемое и полученное).
    """

    model_config = ConfigDict(extra="forbid")

    check: str
    detail: str
    data: dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    """
    JSON-отчёт команды.

    :ivar command: Имя подкоманды.
    :ivar params: Параметры запуска.
    :ivar results: Результаты по одному на проверенный объект.
    :ivar failures: Непрошедшие проверки; непустой список даёт код выхода 1.
    :ivar toolkit_version: Версия пакета.
    """

    model_config = ConfigDict(extra="forbid")

    command: str
    params: dict[str, Any] = Field(default_factory=dict)
    results: list[dict[str, Any]] = Field(default_factory=list)
    failures: list[Failure] = Field(default_factory=list)
    toolkit_version: str = __version__

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, check: str, detail: str, **data: Any) -> None:
        self.failures.append(Failure(check=check, detail=detail, data=data))

    def merge(self, other: Report) -> None:
        """Добавляет результаты и ошибки другого отчёта с префиксом его команды."""

        for result in other.results:
            self.results.append({"command": other.command, **result})
        for failure in other.failures:
            self.failures.append(
                Failure(check=f"{other.command}:{failure.check}", detail=failure.detail,
                        data=failure.data)
            )
