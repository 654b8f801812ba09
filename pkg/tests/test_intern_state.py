from __future__ import annotations

from wreathkit.config import settings
from wreathkit.machine import compose, identity, rootwise
from wreathkit.perms import perm_parse
from wreathkit.services import intern_state
from wreathkit.services.intern_state import TABLE, get_table, reset_table, table_size


def test_intern_returns_single_instance():
    """Равные канонические элементы хранятся одним экземпляром."""

    first = rootwise(perm_parse("(1 2)", 3))
    second = rootwise(perm_parse("(1 2)", 3))
    assert first is second
    assert get_table() is TABLE
    assert table_size() >= 1


def test_product_cache_and_reset(special):
    product = compose(special.c, special.t)
    assert intern_state.cached_product(special.c.key, special.t.key) is product

    reset_table()
    assert table_size() == 0
    assert intern_state.cached_product(special.c.key, special.t.key) is None
    assert compose(special.c, special.t) == product


def test_store_product_keeps_first_value():
    one = identity(2)
    swap = rootwise(perm_parse("(1 2)", 2))
    assert intern_state.store_product("k", "k", one) is one
    assert intern_state.store_product("k", "k", swap) is one


def test_product_cache_is_capped(monkeypatch):
    monkeypatch.setattr(settings, "cache_cap", 2)
    one = identity(2)
    for key in ("a", "b", "c"):
        intern_state.store_product(key, key, one)
    assert list(get_table().products) == [("b", "b"), ("c", "c")]
    assert intern_state.cached_product("a", "a") is None


def test_intern_table_is_capped(monkeypatch):
    monkeypatch.setattr(settings, "cache_cap", 3)
    for text in ("(1 2)", "(1 3)", "(2 3)", "(1 2 3)", "(1 3 2)"):
        rootwise(perm_parse(text, 3))
    assert table_size() <= 3
    # Вытеснение теряет только общий экземпляр, но не равенство.
    assert rootwise(perm_parse("(1 2)", 3)) == rootwise(perm_parse("(1 2)", 3))
