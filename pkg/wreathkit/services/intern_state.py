from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from wreathkit.config import settings

if TYPE_CHECKING:
    from wreathkit.machine import Element


@dataclass
class InternTable:
    """
    Общая таблица канонических автоматов и кэш произведений.

    Оба словаря ограничены settings.cache_cap: при переполнении вытесняется самая старая запись.

    :ivar elements: Канонический ключ -> единственный экземпляр Element.
    :ivar products: Пара ключей (g, h) -> каноническое произведение g·h.
    :ivar lock: Замок для вставки "если отсутствует".
    """
    elements: dict[Any, Element] = field(default_factory=dict)
    products: dict[tuple[Any, Any], Element] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


TABLE = InternTable()


def get_table() -> InternTable:
    """
    Возвращает общую таблицу интернирования.

    :return: Объект InternTable.
    """
    return TABLE


def _make_room(store: dict[Any, Any]) -> None:
    # Вызывается под замком; dict хранит порядок вставки.
    while store and len(store) >= settings.cache_cap:
        del store[next(iter(store))]


def intern(element: Element) -> Element:
    """
    Вставляет канонический элемент, если его ещё нет, и возвращает хранимый экземпляр.

    :param element: Канонический Element.
    :return: Экземпляр с тем же ключом.
    """
    table = get_table()
    key = element.key
    with table.lock:
        stored = table.elements.get(key)
        if stored is None:
            _make_room(table.elements)
            table.elements[key] = element
            stored = element
    return stored


def cached_product(left_key: Any, right_key: Any) -> Element | None:
    table = get_table()
    with table.lock:
        return table.products.get((left_key, right_key))


def store_product(left_key: Any, right_key: Any, product: Element) -> Element:
    table = get_table()
    with table.lock:
        stored = table.products.get((left_key, right_key))
        if stored is None:
            _make_room(table.products)
            table.products[(left_key, right_key)] = product
            stored = product
        return stored


def table_size() -> int:
    table = get_table()
    with table.lock:
        return len(table.elements)


def reset_table() -> None:
    """
    Очищает таблицу интернирования и кэш произведений.

    :return: None
    """
    table = get_table()
    with table.lock:
        table.elements.clear()
        table.products.clear()
