from __future__ import annotations

import pytest

from wreathkit.errors import NoSingleGeneratorImage, WordError, WreathkitError
from wreathkit.machine import compose_all, inverse
from wreathkit.models import SearchOutcome
from wreathkit.services.mother import elem_tv
from wreathkit.services.relations import (
    _as_generator,
    FormalGenerator,
    audit_incomparable,
    audit_prop41,
    clause_predictions,
    commute,
    conj_by_t,
    conj_closure_check,
    conj_map,
    hat,
    is_conj_bijection,
    jmap,
    normality_witness,
    quotient_probe,
    relation_for,
)


def test_hat_swaps_two_and_three():
    assert [hat(x) for x in (1, 2, 3)] == [1, 3, 2]


def test_conjugation_of_231(special):
    """t·t_231·t⁻¹ = t_221, хотя пункт для слов с буквой 1 предсказывает t_231."""

    assert conj_by_t((2, 3, 1)) == ((2, 2, 1), 1)
    t = special.t
    assert compose_all([t, elem_tv((2, 3, 1)), inverse(t)], 3) == elem_tv((2, 2, 1))

    predictions = {p.clause: (p.v_prime, p.sign) for p in clause_predictions((2, 3, 1))}
    assert predictions["1"] == ((2, 3, 1), 1)
    assert predictions["2c-i"] == ((2, 2, 1), 1)


@pytest.mark.parametrize(
    ("v", "clause", "expected"),
    [
        ((2,), "2a", ((2,), 1)),
        ((2, 3), "2b", ((2, 2), -1)),
        ((3, 2, 2), "2c-ii", ((3, 3, 3), 1)),
        ((2, 2, 3, 3), "2c-iii", ((2, 3, 3, 3), -1)),
        ((3, 3, 2), "2c-vi", ((3, 2, 2), -1)),
        ((2, 2, 3, 2, 3), "2c-vii", ((2, 3, 3, 2, 2), 1)),
    ],
)
def test_clause_table_shapes(v, clause, expected):
    predictions = {p.clause: (p.v_prime, p.sign) for p in clause_predictions(v)}
    assert predictions[clause] == expected


def test_relation_for_agrees_without_letter_one():
    for v in [(2,), (3,), (2, 3), (3, 3), (2, 3, 2), (3, 3, 3, 2)]:
        relation = relation_for(v)
        assert relation.agrees_with_table is True
        assert len(relation.v_prime) == len(v)


def test_audit_over_two_and_three():
    audit = audit_prop41(1, 3, (2, 3), incomparable_len=2)
    assert audit.ok
    assert audit.failures == []
    assert {"2a", "2b", "2c-i", "2c-ii", "incomparable"} <= set(audit.tallies)
    assert all(tally.failed == 0 for tally in audit.tallies.values())


def test_audit_reports_discrepancy_and_conflict():
    audit = audit_prop41(0, 3, (1, 2, 3), incomparable_len=None)
    assert any(
        failure.v == (2, 3, 1) and failure.clause == "1" and failure.discrepancy
        for failure in audit.failures
    )
    assert (2, 3, 1) in {conflict.v for conflict in audit.conflicts}
    assert audit.non_generator == []


def test_audit_bounds():
    with pytest.raises(WreathkitError):
        audit_prop41(0, 0)


def test_incomparable_generators_commute():
    report = audit_incomparable(2)
    assert report.incomparable_failures == []
    assert commute(elem_tv((1, 2)), elem_tv((2,)))


def test_conjugation_bijection():
    assert is_conj_bijection(1)
    assert is_conj_bijection(3)
    images = conj_map(2)
    assert len(images) == 9
    assert conj_closure_check(2, 2)
    with pytest.raises(WreathkitError):
        conj_closure_check(3, 2)


def test_normality_witness_and_jmap():
    relation = normality_witness((2, 3))
    assert relation.exponent == -1
    assert len(relation.v_prime) == 2
    assert jmap(2, FormalGenerator((3,), -1)) == FormalGenerator((2, 3), -1)
    with pytest.raises(WreathkitError):
        normality_witness(())


def test_formal_generator_validation():
    assert FormalGenerator((2,), -1).label == "t_2^-1"
    assert FormalGenerator(()).label == "t"
    with pytest.raises(WordError):
        FormalGenerator((4,))
    with pytest.raises(WreathkitError):
        FormalGenerator((2,), 2)


def test_non_generator_image_is_rejected(special):
    """Произведение двух образующих не раскладывается как t_{v′}^{±1}."""

    with pytest.raises(NoSingleGeneratorImage):
        _as_generator(compose_all([elem_tv((2,)), elem_tv((3,))], 3))


def test_quotient_probe():
    assert quotient_probe(1, 0, 5).k == 0
    with_t = quotient_probe(1, 2, 1, include_t=True)
    assert with_t.outcome == SearchOutcome.FOUND
    assert with_t.k == 1
    without_t = quotient_probe(1, 2, 2)
    assert without_t.outcome == SearchOutcome.NOT_FOUND


@pytest.mark.slow
def test_incomparable_generators_commute_up_to_length_four():
    report = audit_incomparable(4)
    assert report.incomparable_failures == []
    assert report.tallies["incomparable"].failed == 0
    assert report.tallies["incomparable"].checked > 0


@pytest.mark.parametrize("v", [(), (1,), (2,), (3,), (2, 3), (3, 1), (2, 3, 1), (3, 3, 2), (1, 2, 3)])
def test_conjugation_inverts_and_composes(v):
    v_prime, sign = conj_by_t(v)
    assert conj_by_t(v_prime, -1) == (v, sign)

    v_second, sign_second = conj_by_t(v_prime)
    assert conj_by_t(v, 2) == (v_second, sign * sign_second)
