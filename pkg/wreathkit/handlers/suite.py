from __future__ import annotations

import argparse
import itertools
import random
import time
from collections.abc import Callable
from dataclasses import dataclass

from loguru import logger

from wreathkit.errors import ConventionError, NoSingleGeneratorImage
from wreathkit.handlers import EXIT_FAILED, EXIT_OK, Router, arg
from wreathkit.machine import (
    Element,
    act,
    build_element,
    canonicalize,
    compose,
    compose_all,
    equal,
    from_sections,
    identity,
    inverse,
    is_identity,
    power,
    restrict,
    rootwise,
)
from wreathkit.models import Report
from wreathkit.perms import Perm, format_word, perm_format, perm_parse
from wreathkit.render import write_report
from wreathkit.services.embedder import EmbedPath, embed_pipeline
from wreathkit.services.metrics import (
    CosetStatus,
    ball_growth,
    coset_separation_check,
    mother_generator_set,
)
from wreathkit.services.mother import (
    A3,
    b_gen,
    elem_tv,
    embed_up,
    mother_gens,
    psi_preimage_A3,
    solve_eq7,
    special_elems,
)
from wreathkit.services.relations import (
    audit_prop41,
    clause_predictions,
    conj_by_t,
    is_conj_bijection,
)
from wreathkit.services.sidki import Kind, activity_profile, classify

router = Router()

SUITE_SEED = 20_240_601


@dataclass(frozen=True)
class Scale:
    """Размеры проверок: полный прогон и быстрый (--quick)."""

    audit_prefix: int
    audit_suffix: int
    bijection_k: int
    homomorphism_samples: int
    classifier_samples: int
    infra_samples: int
    incomparable_len: int


FULL = Scale(2, 5, 4, 100, 500, 1000, 4)
QUICK = Scale(1, 3, 3, 20, 40, 100, 2)


@dataclass
class CheckOutcome:
    name: str
    ok: bool
    detail: str
    seconds: float


def _r(text: str) -> Element:
    return rootwise(perm_parse(text, 3))


def grigorchuk() -> dict[str, Element]:
    """Образующие a, b, c, d группы Григорчука: b = (a, c), c = (a, d), d = (1, b)."""

    one = Perm.identity(2)
    spec = {
        "a": (perm_parse("(1 2)", 2), ["_", "_"]),
        "b": (one, ["a", "c"]),
        "c": (one, ["a", "d"]),
        "d": (one, ["_", "b"]),
    }
    return {name: build_element(spec, name, degree=2) for name in spec}


def check_wreath_identity(_: Scale) -> str | None:
    special = special_elems()
    s23 = _r("(2 3)")
    expected = from_sections(
        [identity(3), compose(special.c, s23), compose(s23, special.c)], Perm.identity(3)
    )
    if not equal(special.t, expected):
        return "(23)c(23)c ≠ (1, c(23), (23)c)"
    return None


def check_commutator_identities(_: Scale) -> str | None:
    special = special_elems()
    c, c_tilde, t = special.c, special.c_tilde, special.t
    one = identity(3)
    target = from_sections([one, one, t], Perm.identity(3))
    if not equal(compose(c, c_tilde), compose(c_tilde, c)):
        return "c·c̃ ≠ c̃·c"
    s23 = _r("(2 3)")
    if not equal(power(compose_all([s23, c, s23, c_tilde], 3), 2), target):
        return "[(23)c(23)c̃]² ≠ (1, 1, t)"
    if not equal(compose_all([t, c_tilde, inverse(t), c_tilde], 3), target):
        return "t·c̃·t⁻¹·c̃ ≠ (1, 1, t)"
    return None


def check_eq7(_: Scale) -> str | None:
    expected_transposition = {"(1 2 3)": "(2 3)", "(1 3 2)": "(1 3)"}
    for omega in A3:
        solved = solve_eq7(omega)
        key = perm_format(omega)
        wanted = expected_transposition.get(key)
        if wanted is not None and perm_format(solved.representative.sigma1_p) != wanted:
            return f"ω = {key}: σ1′ = {perm_format(solved.representative.sigma1_p)}"
        try:
            psi_preimage_A3(omega)
        except ConventionError as exc:
            return str(exc)
    return None


def check_relation_audit(scale: Scale) -> str | None:
    audit = audit_prop41(
        scale.audit_prefix, scale.audit_suffix, (2, 3), incomparable_len=scale.incomparable_len
    )
    if not audit.ok or audit.failures:
        return (
            f"{len(audit.failures)} clause failures, {len(audit.non_generator)} non-generator images, "
            f"{len(audit.incomparable_failures)} non-commuting incomparable pairs"
        )
    if audit.tallies["incomparable"].checked == 0:
        return "несравнимые пары не проверялись"
    v = (2, 3, 1)
    try:
        truth = conj_by_t(v)
    except NoSingleGeneratorImage:
        return "t·t_231·t⁻¹ не имеет вида t_{v′}^{±1}"
    if len(truth[0]) != len(v):
        return "длина образа t_231 изменилась"
    if len({(p.v_prime, p.sign) for p in clause_predictions(v)}) < 2:
        return "конфликт пунктов на v = 231 не найден"
    if truth != ((2, 2, 1), 1):
        return f"t·t_231·t⁻¹ = t_{format_word(truth[0])}^{truth[1]}"
    return None


def check_bijection(scale: Scale) -> str | None:
    for k in range(1, scale.bijection_k + 1):
        if not is_conj_bijection(k):
            return f"сопряжение не биективно на длине {k}"
    return None


def check_infinite_order_witnesses(scale: Scale) -> str | None:
    words = [(2,), (3,), (1, 2), (1, 3), (1, 1, 2), (1, 1, 3), (1, 1, 1, 2), (1, 1, 1, 3)]
    elements = [elem_tv(word) for word in words]
    for (i, g), (j, h) in itertools.combinations(enumerate(elements), 2):
        if not equal(compose(g, h), compose(h, g)):
            return f"t_{format_word(words[i])} и t_{format_word(words[j])} не коммутируют"
    t = special_elems().t
    current = identity(3)
    for k in range(1, 33):
        current = compose(current, t)
        if is_identity(current):
            return f"t^{k} = 1"

    a = rootwise(perm_parse("(1 2)", 2))
    b = b_gen(2, [perm_parse("(1 2)", 2)], Perm.identity(1))
    if not equal(embed_up(compose_all([a, b, a, b], 2)), t):
        return "φ(abab) ≠ t"
    rng = random.Random(SUITE_SEED)
    for _ in range(scale.homomorphism_samples):
        g = compose_all(rng.choices([a, b], k=rng.randint(1, 6)), 2)
        h = compose_all(rng.choices([a, b], k=rng.randint(1, 6)), 2)
        if not equal(embed_up(compose(g, h)), compose(embed_up(g), embed_up(h))):
            return "φ не сохраняет произведение"
    return None


def _brute_activity(g: Element, levels: int) -> list[int]:
    """Число слов длины n с нетривиальным сечением, n = 0..levels, перебором сечений по словам."""

    counts: list[int] = []
    frontier = [g]
    for _ in range(levels + 1):
        live = [section for section in frontier if not is_identity(section)]
        counts.append(len(live))
        # У тривиального сечения все сечения тривиальны.
        frontier = [restrict(section, (x,)) for section in live for x in range(1, g.degree + 1)]
    return counts


def _trivial_on_level(g: Element, level: int) -> bool:
    """Действие на X^level тривиально: корни сечений на всех словах короче level тождественны."""

    frontier = {g}
    for _ in range(level):
        if any(not section.root.is_identity() for section in frontier):
            return False
        frontier = {restrict(section, (x,)) for section in frontier for x in range(1, g.degree + 1)}
    return True


def check_classifier(scale: Scale) -> str | None:
    gens = [g for g in mother_gens(3) if not is_identity(g)]
    rng = random.Random(SUITE_SEED)
    for _ in range(scale.classifier_samples):
        g = compose_all(rng.choices(gens, k=rng.randint(1, 3)), 3)
        verdict = classify(g)
        if not verdict.is_bounded:
            return "произведение образующих G_3 классифицировано как неограниченное"
        levels = 2 * g.state_count
        brute = _brute_activity(g, levels)
        if brute != activity_profile(g, levels):
            return "активность по уровням расходится с перебором"
        if max(brute) != (verdict.max_activity or 0):
            return f"перебор: активность {max(brute)}, оценка {verdict.max_activity}"

    fixtures = grigorchuk()
    a_verdict = classify(fixtures["a"])
    if a_verdict.kind != Kind.FINITARY or a_verdict.finitary_depth != 1:
        return "a не финитарен глубины 1"
    for name in "bcd":
        verdict = classify(fixtures[name])
        if verdict.kind != Kind.DIRECTED or verdict.period != 3:
            return f"{name} не направлен с периодом 3"
    return None


def check_embedding(_: Scale) -> str | None:
    fixtures = grigorchuk()
    report = embed_pipeline(list(fixtures.values()), labels=list(fixtures), strict=False)
    if report.analysis.l != 3 or report.final_alphabet != 8 or not report.ok:
        return f"Григорчук: l = {report.analysis.l}, |X″| = {report.final_alphabet}, ok = {report.ok}"
    via_delta = embed_pipeline(
        list(fixtures.values()), labels=list(fixtures), strict=False, align=False
    )
    if (
        via_delta.path != EmbedPath.DELTA
        or via_delta.final_alphabet != 64
        or via_delta.m_prime != 2
        or via_delta.reassembly != [True, True, True]
        or not via_delta.ok
    ):
        return (
            f"Григорчук через δ: |X″| = {via_delta.final_alphabet}, m′ = {via_delta.m_prime}, "
            f"ok = {via_delta.ok}"
        )
    single_c = embed_pipeline([special_elems().c], strict=False)
    if single_c.final_alphabet != 3 or not single_c.ok:
        return f"{{c}}: |X″| = {single_c.final_alphabet}"
    if not embed_pipeline([fixtures["a"]], strict=False).ok:
        return "{a}: сертификат не прошёл"
    return None


def check_metrics(_: Scale) -> str | None:
    g2 = ball_growth(mother_generator_set(2), 3)
    if g2.sizes != [1, 3, 5, 7]:
        return f"G_2: {g2.sizes}"
    g3 = ball_growth(mother_generator_set(3), 1)
    if g3.sizes[1] != 77:
        return f"G_3: |B(1)| = {g3.sizes[1]}"
    for n in (0, 1):
        for entry in coset_separation_check(n):
            if entry.status != CosetStatus.SEPARATED:
                return f"n = {n}, w = {format_word(entry.word)}: {entry.status}"
    return None


def check_infrastructure(scale: Scale) -> str | None:
    gens = [g for g in mother_gens(3) if not is_identity(g)]
    rng = random.Random(SUITE_SEED)

    def sample() -> Element:
        return compose_all(rng.choices(gens, k=rng.randint(0, 4)), 3)

    for _ in range(scale.infra_samples):
        g, h = sample(), sample()
        form = canonicalize(g)
        if canonicalize(form).key != form.key:
            return "canonicalize не идемпотентен"
        if equal(g, h) != (canonicalize(g).key == canonicalize(h).key):
            return "equal расходится с каноническими формами"
        if equal(g, h) != is_identity(compose(g, inverse(h))):
            return "equal расходится с is_identity(g·h⁻¹)"
        word = tuple(rng.randint(1, 3) for _ in range(rng.randint(0, 5)))
        if act(compose(g, h), word) != act(h, act(g, word)):
            return "нарушено соглашение (g·h)(w) = h(g(w))"
        if word:
            x = word[0]
            cocycle = compose(restrict(g, (x,)), restrict(h, (g.root(x),)))
            if not equal(restrict(compose(g, h), (x,)), cocycle):
                return "нарушено правило (gh)|_x = g|_x·h|_{g(x)}"
        brute = _trivial_on_level(g, g.state_count)
        if is_identity(g) != brute:
            return "is_identity расходится с перебором уровней"
    return None


CHECKS: list[tuple[str, Callable[[Scale], str | None]]] = [
    ("wreath-identity", check_wreath_identity),
    ("commutator-identities", check_commutator_identities),
    ("eq7", check_eq7),
    ("relation-audit", check_relation_audit),
    ("conjugation-bijection", check_bijection),
    ("infinite-order-witnesses", check_infinite_order_witnesses),
    ("classifier", check_classifier),
    ("embedding", check_embedding),
    ("metrics", check_metrics),
    ("infrastructure", check_infrastructure),
]


def run_suite(scale: Scale = FULL, only: set[str] | None = None) -> list[CheckOutcome]:
    """
    Прогоняет машинные проверки по очереди.

    :param scale: Размеры проверок.
    :param only: Имена проверок (None — все).
    :return: Итог каждой проверки.
    """

    outcomes: list[CheckOutcome] = []
    for name, check in CHECKS:
        if only is not None and name not in only:
            continue
        started = time.perf_counter()
        problem = check(scale)
        elapsed = time.perf_counter() - started
        outcomes.append(CheckOutcome(name, problem is None, problem or "ok", elapsed))
        logger.info("{}: {} ({:.2f}s)", name, "ok" if problem is None else "FAILED", elapsed)
    return outcomes


@router.command(
    "suite",
    "Прогоняет все приёмочные машинные проверки.",
    [
        arg("--quick", action="store_true", help="Уменьшенные границы перебора."),
        arg("--only", help="Имена проверок через запятую."),
        arg("--report"),
    ],
)
def cmd_suite(args: argparse.Namespace) -> int:
    only = {name.strip() for name in args.only.split(",")} if args.only else None
    outcomes = run_suite(QUICK if args.quick else FULL, only)
    report = Report(command="suite", params={"quick": args.quick, "only": args.only})
    for outcome in outcomes:
        # Время не входит в отчёт: одинаковый ввод даёт одинаковый файл.
        report.results.append({"check": outcome.name, "ok": outcome.ok, "detail": outcome.detail})
        if not outcome.ok:
            report.fail(outcome.name, outcome.detail)
        print(f"{outcome.name}: {'ok' if outcome.ok else 'FAILED'} ({outcome.seconds:.2f}s)")
    if args.report:
        print(f"report: {write_report(report, args.report)}")
    return EXIT_OK if report.ok else EXIT_FAILED
