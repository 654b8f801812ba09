from __future__ import annotations

import os
import tempfile
from enum import StrEnum
from pathlib import Path

import graphviz
from loguru import logger

from wreathkit.config import settings
from wreathkit.machine import Element, canonicalize
from wreathkit.models import Report
from wreathkit.perms import perm_format


class DotMode(StrEnum):
    AUTOMATON = "automaton"  # вся диаграмма Мура
    WREATH = "wreath"  # корень σ и дети g|_1..g|_d


def _state_names(form: Element) -> list[str]:
    names: list[str] = []
    for state, root in enumerate(form.roots):
        trivial = root.is_identity() and all(child == state for child in form.children[state])
        names.append("_" if trivial else f"q{state}")
    return names


def to_dot(g: Element, mode: DotMode = DotMode.AUTOMATON, name: str = "g") -> str:
    """
    DOT-представление элемента.

    :param g: Элемент.
    :param mode: AUTOMATON — все состояния и переходы с буквами; WREATH — один уровень рекурсии.
    :param name: Имя графа.
    :return: Исходный текст DOT.
    """

    form = canonicalize(g)
    names = _state_names(form)
    dot = graphviz.Digraph(name=name)
    dot.attr(rankdir="TB" if mode == DotMode.WREATH else "LR")

    if mode == DotMode.WREATH:
        dot.node("root", perm_format(form.root), shape="box")
        with dot.subgraph() as level:
            level.attr(rank="same")
            for letter, child in enumerate(form.children[form.initial], start=1):
                node = f"x{letter}"
                level.node(node, f"{names[child]}\n{perm_format(form.roots[child])}", shape="circle")
                dot.edge("root", node, label=str(letter))
        return dot.source

    for state, root in enumerate(form.roots):
        shape = "doublecircle" if state == form.initial else "circle"
        dot.node(names[state], f"{names[state]}\n{perm_format(root)}", shape=shape)
    edges: dict[tuple[int, int], list[str]] = {}
    for state, row in enumerate(form.children):
        for letter, child in enumerate(row, start=1):
            edges.setdefault((state, child), []).append(str(letter))
    for (state, child), letters in edges.items():
        dot.edge(names[state], names[child], label=",".join(letters))
    return dot.source


def resolve_output(path: str | Path) -> Path:
    """Относительный путь отчёта откладывается от WREATHKIT_REPORT_DIR, если он задан."""

    target = Path(path)
    if not target.is_absolute() and settings.report_dir is not None:
        target = settings.report_dir / target
    return target


def write_atomic(path: str | Path, text: str) -> Path:
    """
    Записывает файл через временный файл и os.replace.

    :param path: Путь назначения.
    :param text: Содержимое (UTF-8).
    :return: Итоговый путь.
    """

    target = resolve_output(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
            stream.write(text)
        os.replace(temp_name, target)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise
    logger.debug("wrote {}", target)
    return target


def report_json(report: Report) -> str:
    return report.model_dump_json(indent=2) + "\n"


def write_report(report: Report, path: str | Path) -> Path:
    return write_atomic(path, report_json(report))
