from __future__ import annotations

import json

import pytest

from tests.conftest import load_automaton
from wreathkit.errors import (
    ConventionError,
    NotDirectedError,
    PermError,
    UnboundedGeneratorError,
    WreathkitError,
)
from wreathkit.machine import act, build_element, from_sections, identity, restrict, rootwise
from wreathkit.perms import Perm, all_words, perm_parse, word_rank
from wreathkit.services import embedder
from wreathkit.services.embedder import (
    EmbedPath,
    analyze,
    block_power,
    build_delta,
    default_zeta,
    embed_pipeline,
    mother_form_check,
    normalize_directed,
    recheck_report,
    restricted_set,
)
from wreathkit.services.mother import b_gen
from wreathkit.services.sidki import Kind, classify, is_finitary


def test_analyze_grigorchuk(grig):
    analysis = analyze(list(grig.values()))
    assert analysis.l == 3
    assert analysis.m == 2
    assert len(analysis.states) == 5
    assert len(analysis.finitary) == 2


def test_analyze_single_directed(special):
    """Для {c} уровень m = 2: корневое состояние (23) имеет глубину 1."""

    analysis = analyze([special.c])
    assert analysis.m == 2
    assert analysis.l == 1
    assert set(restricted_set([special.c], analysis.m)) == {
        special.c,
        rootwise(perm_parse("(2 3)", 3)),
        identity(3),
    }


def test_analyze_rejects_unbounded():
    spec = {
        "z": (Perm.identity(2), ["z", "z2"]),
        "z2": (perm_parse("(1 2)", 2), ["z", "_"]),
    }
    with pytest.raises(UnboundedGeneratorError):
        analyze([build_element(spec, "z")])
    with pytest.raises(WreathkitError):
        analyze([])


def test_block_power_acts_on_blocks(special):
    powered = block_power(special.c, 2)
    assert powered.degree == 9
    for word in all_words(3, 4):
        image = act(special.c, word)
        blocks = (word_rank(word[:2], 3), word_rank(word[2:], 3))
        assert act(powered, blocks) == (word_rank(image[:2], 3), word_rank(image[2:], 3))
    assert block_power(special.c, 1) == special.c
    with pytest.raises(WreathkitError):
        block_power(special.c, 0)


def test_block_power_makes_period_one(grig):
    verdict = classify(block_power(grig["b"], 3))
    assert verdict.kind == Kind.DIRECTED
    assert verdict.period == 1
    assert verdict.spine == (8,)
    assert classify(block_power(grig["a"], 3)).finitary_depth == 1


def test_delta_recodes_letters():
    """δ сохраняет первую букву и заменяет следующие разностями показателей ζ."""

    zeta = default_zeta(3)
    assert zeta == perm_parse("(1 2 3)", 3)
    delta = build_delta(3, 1, zeta)
    assert delta.root.is_identity()
    assert act(delta, (2, 3, 1)) == (2, 2, 2)
    assert act(delta, (1, 1, 1)) == (1, 1, 1)
    with pytest.raises(PermError):
        build_delta(3, 1, perm_parse("(1 2)", 3))
    with pytest.raises(PermError):
        build_delta(4, 1, zeta)


def test_mother_form_check(special):
    one = Perm.identity(3)
    assert mother_form_check(b_gen(3, [perm_parse("(1 2)", 3), perm_parse("(1 3)", 3)], Perm.identity(2)), 3).passed
    assert mother_form_check(special.c, 3).passed
    assert mother_form_check(rootwise(perm_parse("(1 2 3)", 3)), 1).passed
    assert not mother_form_check(special.t, 3).passed

    deep = from_sections([rootwise(perm_parse("(1 2)", 3)), identity(3), identity(3)], one)
    assert not mother_form_check(deep, 3).passed

    wrong_letter = mother_form_check(special.c, 1)
    assert not wrong_letter.passed
    assert wrong_letter.coordinate == 1


def test_normalize_directed_grigorchuk(grig):
    powered = block_power(grig["b"], 3)
    zeta = default_zeta(8)
    delta = build_delta(8, 1, zeta)
    beta = normalize_directed(powered, delta, zeta, 1)
    assert beta.root(1) == 1
    assert restrict(beta, (1,)) == beta
    assert all(is_finitary(restrict(beta, (x,))) for x in range(2, 9))


def test_normalize_rejects_non_directed(special):
    zeta = default_zeta(3)
    with pytest.raises(NotDirectedError):
        normalize_directed(special.t, build_delta(3, 1, zeta), zeta, 1)


def test_pipeline_grigorchuk(grig):
    report = embed_pipeline(list(grig.values()), labels=list(grig))
    assert report.analysis.l == 3
    assert report.intermediate_alphabet == 8
    assert report.final_alphabet == 8
    assert report.m_prime == 1
    assert report.aligned
    assert report.o_prime == 8
    assert report.ok
    assert report.target == "G_8 ≀ 2^2"
    assert {"a", "b", "c", "d"} <= {cert.label for cert in report.certificates}


def test_pipeline_degenerate_inputs(special, grig):
    single_c = embed_pipeline([special.c])
    assert single_c.final_alphabet == 3
    assert single_c.o_prime == 3
    assert single_c.ok

    single_a = embed_pipeline([grig["a"]])
    assert single_a.ok
    assert single_a.analysis.l == 1


def test_pipeline_conjugates_when_spines_differ():
    """b = (a, b) и e = (e, a): общей буквы хребта нет, нужен δ."""

    automaton = load_automaton("twospine.aut")
    report = embed_pipeline([automaton.element("b"), automaton.element("e")], labels=["b", "e"])
    assert not report.aligned
    assert report.zeta == perm_parse("(1 2)", 2)
    assert report.m_prime == 2
    assert report.final_alphabet == 4
    assert report.reassembly == [True, True]
    assert report.ok


def test_recheck_from_payload(grig):
    payload = embed_pipeline(list(grig.values())).to_payload()
    restored = json.loads(json.dumps(payload))
    assert recheck_report(restored) == []

    restored["m_prime"] = 2
    assert recheck_report(restored)


def test_pipeline_delta_path_on_grigorchuk(grig):
    """Без поиска общей буквы хребта: o′ = 1, δ по циклу (1 2 … 8)."""

    report = embed_pipeline(list(grig.values()), labels=list(grig), align=False)
    assert report.path == EmbedPath.DELTA
    assert not report.aligned
    assert report.o_prime == 1
    assert report.zeta == default_zeta(8)
    assert report.m_prime == 2
    assert report.final_alphabet == 64
    assert report.reassembly == [True, True, True]
    assert report.ok
    assert report.to_payload()["path"] == "delta"


def test_pipeline_non_strict_records_failed_normalization(monkeypatch):
    def broken(*_):
        raise ConventionError("β не фиксирует o′.")

    monkeypatch.setattr(embedder, "normalize_directed", broken)
    automaton = load_automaton("twospine.aut")
    gens = [automaton.element("b"), automaton.element("e")]

    with pytest.raises(ConventionError):
        embed_pipeline(gens, labels=["b", "e"])

    report = embed_pipeline(gens, labels=["b", "e"], strict=False)
    assert not report.ok
    assert len(report.failures) == 2
    assert recheck_report(report.to_payload())
