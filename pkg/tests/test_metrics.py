from __future__ import annotations

import pytest

from wreathkit.config import settings
from wreathkit.errors import BudgetExceeded, WreathkitError
from wreathkit.machine import compose, identity, inverse, rootwise
from wreathkit.models import SearchOutcome
from wreathkit.perms import perm_parse
from wreathkit.services.metrics import (
    CosetStatus,
    GrowthTable,
    WeightedGen,
    WeightedGenSet,
    WeightMode,
    ball_growth,
    coset_separation_check,
    mother_generator_set,
    t_length,
    tv_generators,
    weighted_search,
)
from wreathkit.services.mother import elem_tv


def test_g2_ball_sizes():
    """G_2 — бесконечная диэдральная группа: 1, 3, 5, 7."""

    table = ball_growth(mother_generator_set(2), 3)
    assert table.sizes == [1, 3, 5, 7]
    assert table.to_csv().splitlines() == ["radius,ball_size", "0,1", "1,3", "2,5", "3,7"]


def test_g3_first_ball():
    table = ball_growth(mother_generator_set(3), 1, keep_frontiers=True)
    assert table.sizes == [1, 77]
    assert table.frontiers is not None
    assert table.frontiers[0] == [identity(3)]


def test_growth_budget_keeps_partial_table():
    with pytest.raises(BudgetExceeded) as caught:
        ball_growth(mother_generator_set(3), 2, budget=50)
    assert isinstance(caught.value.partial, GrowthTable)


def test_negative_radius():
    with pytest.raises(WreathkitError):
        ball_growth(mother_generator_set(2), -1)


def test_generator_set_validation(special):
    with pytest.raises(WreathkitError):
        WeightedGenSet(())
    with pytest.raises(WreathkitError, match="обращения"):
        WeightedGenSet((WeightedGen("t", special.t, 1),))
    swap = rootwise(perm_parse("(1 2)", 3))
    with pytest.raises(WreathkitError):
        WeightedGenSet((WeightedGen("s", swap, -1),))
    with pytest.raises(WreathkitError):
        WeightedGenSet(
            (WeightedGen("s", swap, 1), WeightedGen("a", rootwise(perm_parse("(1 2)", 2)), 1))
        )


def test_tv_generator_weights():
    depth_weighted = tv_generators(1)
    assert len(depth_weighted.generators) == 8
    weights = {gen.label: gen.weight for gen in depth_weighted.generators}
    assert weights["t"] == 0
    assert weights["t_2^-1"] == 1
    proper = tv_generators(1, WeightMode.PROPER)
    assert {gen.label: gen.weight for gen in proper.generators}["t"] == 1


def test_t_length_exact_values(special):
    found = t_length(elem_tv((2,)), 1)
    assert found.outcome == SearchOutcome.FOUND
    assert found.length == 1
    assert found.word == ("t_2",)

    assert t_length(special.t, 1).length == 0
    assert t_length(compose(elem_tv((2,)), elem_tv((3,))), 1).length == 2


def test_t_length_outside_truncation():
    result = t_length(elem_tv((1, 1)), 1, max_weight=1)
    assert result.outcome == SearchOutcome.NOT_FOUND


def test_factor_cap_limits_weight_zero_layer(special):
    gens = tv_generators(0)
    exploration = weighted_search(gens, 0, budget=1000, factor_cap=2)
    assert exploration.complete
    assert len(exploration.weights) == 5
    assert special.t in exploration.weights


def test_coset_separation_small_levels():
    entries = coset_separation_check(0)
    assert len(entries) == 3
    assert all(entry.status == CosetStatus.SEPARATED for entry in entries)
    inside = coset_separation_check(1, samples=[(2,), (1, 1)])
    assert inside[0].status == CosetStatus.IN_SUBGROUP
    assert inside[1].status == CosetStatus.SEPARATED


def test_t_length_symmetric_and_subadditive(special):
    pairs = [
        (elem_tv((2,)), elem_tv((3,))),
        (elem_tv((2,)), inverse(special.t)),
        (compose(elem_tv((1,)), special.t), inverse(elem_tv((3,)))),
    ]
    for g, h in pairs:
        length_g = t_length(g, 1, max_weight=4)
        length_h = t_length(h, 1, max_weight=4)
        assert length_g.outcome == length_h.outcome == SearchOutcome.FOUND
        assert t_length(inverse(g), 1, max_weight=4).length == length_g.length

        length_gh = t_length(compose(g, h), 1, max_weight=4)
        assert length_gh.outcome == SearchOutcome.FOUND
        assert length_gh.length <= length_g.length + length_h.length


def test_proper_weights_give_finite_balls(monkeypatch):
    """Без образующих веса 0 предел factor_cap не нужен: шары конечны."""

    monkeypatch.setattr(settings, "factor_cap", 10**6)
    gens = tv_generators(1, WeightMode.PROPER)
    assert all(gen.weight > 0 for gen in gens.generators)

    exploration = weighted_search(gens, 2, budget=10_000, factor_cap=10**6)
    assert exploration.complete
    # 1; t^{±1}; t^{±2}, t_1^{±1}, t_2^{±1}, t_3^{±1}
    assert ball_growth(gens, 2, budget=10_000).sizes == [1, 3, 11]
