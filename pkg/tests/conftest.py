from __future__ import annotations

import os
from collections.abc import Generator
from pathlib import Path

import pytest

from wreathkit.config import settings
from wreathkit.machine import Element
from wreathkit.parsing import AutomatonFile, parse_automaton_file
from wreathkit.services import intern_state
from wreathkit.services.mother import SpecialElements, special_elems

# Минимальный набор переменных окружения для Settings.
os.environ.setdefault("WREATHKIT_LOG_LEVEL", "WARNING")

AUTOMATA_DIR = Path(__file__).resolve().parent.parent / "automata"


@pytest.fixture(autouse=True)
def clear_state(monkeypatch: pytest.MonkeyPatch) -> Generator[None, None, None]:
    """
    Сбрасывает таблицу интернирования и закрепляет настройки перебора перед каждым тестом.

    :return: None
    """

    monkeypatch.setattr(settings, "search_budget", 200_000)
    monkeypatch.setattr(settings, "factor_cap", 6)
    monkeypatch.setattr(settings, "report_dir_raw", None)
    intern_state.reset_table()
    yield
    intern_state.reset_table()


def load_automaton(name: str) -> AutomatonFile:
    return parse_automaton_file((AUTOMATA_DIR / name).read_text(encoding="utf-8"))


@pytest.fixture
def grig() -> dict[str, Element]:
    """
    Образующие группы Григорчука из automata/grig.aut.

    :return: Словарь имя -> Element.
    """

    automaton = load_automaton("grig.aut")
    return {name: automaton.element(name) for name in "abcd"}


@pytest.fixture
def special() -> SpecialElements:
    """Элементы c, t, c̃ группы G_3."""

    return special_elems()


@pytest.fixture
def automata_dir() -> Path:
    return AUTOMATA_DIR
