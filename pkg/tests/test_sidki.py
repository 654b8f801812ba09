from __future__ import annotations

import pytest

from wreathkit.machine import build_element, compose, identity, rootwise
from wreathkit.perms import Perm, perm_parse
from wreathkit.services.mother import elem_tv
from wreathkit.services.sidki import (
    Kind,
    activity,
    activity_profile,
    classify,
    is_bounded,
    is_directed,
    is_finitary,
    state_graph,
)


def test_grigorchuk_fixture_classification(grig):
    """a финитарен глубины 1, b, c, d направлены с периодом 3."""

    verdict = classify(grig["a"])
    assert verdict.kind == Kind.FINITARY
    assert verdict.finitary_depth == 1
    for name, spine in (("b", (2, 2, 2)), ("c", (2, 2, 2)), ("d", (2, 2, 2))):
        verdict = classify(grig[name])
        assert verdict.kind == Kind.DIRECTED
        assert verdict.period == 3
        assert verdict.spine == spine
        assert verdict.bounded_depth == 0


def test_identity_and_rootwise():
    assert classify(identity(3)).kind == Kind.IDENTITY
    assert classify(identity(3)).finitary_depth == 0
    verdict = classify(rootwise(perm_parse("(1 2 3)", 3)))
    assert verdict.kind == Kind.FINITARY
    assert verdict.finitary_depth == 1
    assert verdict.max_activity == 1


def test_c_is_directed(special):
    verdict = classify(special.c)
    assert verdict.kind == Kind.DIRECTED
    assert verdict.period == 1
    assert verdict.spine == (3,)
    assert is_directed(special.c)


def test_t_is_bounded_but_not_directed(special):
    """t = (1, c(23), (23)c): сечения первого уровня ещё не направлены, второго — уже да."""

    verdict = classify(special.t)
    assert verdict.kind == Kind.BOUNDED_OTHER
    assert verdict.bounded_depth == 2
    assert is_bounded(special.t)
    assert not is_finitary(special.t)


def test_adding_machine_is_directed():
    tau = build_element({"tau": (perm_parse("(1 2)", 2), ["_", "tau"])}, "tau")
    verdict = classify(tau)
    assert verdict.kind == Kind.DIRECTED
    assert verdict.spine == (2,)


def test_two_edge_cycle_is_unbounded():
    """z = (z, z′), z′ = (z, 1)(1 2): в компоненте больше рёбер, чем вершин."""

    one = Perm.identity(2)
    spec = {"z": (one, ["z", "z2"]), "z2": (perm_parse("(1 2)", 2), ["z", "_"])}
    z = build_element(spec, "z")
    assert classify(z).kind == Kind.UNBOUNDED
    assert not is_bounded(z)
    assert activity_profile(z, 4)[-1] > activity_profile(z, 2)[-1]


def test_activity_counts_nontrivial_sections(special, grig):
    assert activity(special.c, 5) == 2
    assert activity_profile(special.c, 2) == [1, 2, 2]
    assert activity_profile(grig["a"], 3) == [1, 0, 0, 0]
    assert activity_profile(special.t, 3) == [1, 2, 4, 4]
    with pytest.raises(ValueError, match="Уровень"):
        activity(special.c, -1)


def test_tv_generators_activity():
    t_2 = elem_tv((2,))
    assert activity_profile(t_2, 2) == [1, 1, 2]
    assert classify(compose(t_2, elem_tv((3,)))).kind == Kind.BOUNDED_OTHER


def test_state_graph_skips_identity(special):
    graph = state_graph(special.c)
    assert graph.number_of_nodes() == 2
    assert graph.has_edge(0, 0)
