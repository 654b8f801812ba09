from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import Any

from loguru import logger

from wreathkit.errors import BudgetExceeded, ConventionError, WreathkitError
from wreathkit.handlers import EXIT_FAILED, EXIT_OK, Router, arg
from wreathkit.machine import Element, act, equal, inverse, rootwise, to_spec
from wreathkit.models import Report, SearchOutcome
from wreathkit.parsing import AutomatonFile, parse_automaton_file, parse_expression
from wreathkit.perms import all_perms, format_word, parse_word, perm_format, perm_parse
from wreathkit.render import DotMode, to_dot, write_atomic, write_report
from wreathkit.services.embedder import embed_pipeline, recheck_report
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
)
from wreathkit.services.mother import (
    A3,
    kernel_transport,
    psi_preimage_A3,
    solve_eq7,
    special_elems,
    stab1_preimage,
)
from wreathkit.services.relations import audit_prop41, is_conj_bijection, relation_for
from wreathkit.services.sidki import activity_profile, classify

router = Router()

FILE = arg("-f", "--file", help="Файл автоматов (.aut).")
REPORT = arg("--report", help="Путь JSON-отчёта.")


def _params(args: argparse.Namespace) -> dict[str, Any]:
    return {
        key: str(value) if isinstance(value, Path) else value
        for key, value in vars(args).items()
        if key not in {"handler", "command"}
    }


def _load(path: str | None) -> AutomatonFile | None:
    if path is None:
        return None
    return parse_automaton_file(Path(path).read_text(encoding="utf-8"))


def _element(expr: str, context: AutomatonFile | None) -> Element:
    return parse_expression(expr, context)


def _generators(args: argparse.Namespace) -> list[tuple[str, Element]]:
    """Образующие из --gens (через запятую) или все имена файла."""

    context = _load(args.file)
    if context is None:
        raise WreathkitError("Нужен файл автоматов (-f).")
    names = [name.strip() for name in args.gens.split(",")] if args.gens else context.names
    return [(name, context.element(name)) for name in names if name]


def _finish(report: Report, args: argparse.Namespace) -> int:
    if getattr(args, "report", None):
        target = write_report(report, args.report)
        print(f"report: {target}")
    for failure in report.failures:
        print(f"FAIL {failure.check}: {failure.detail}")
    return EXIT_OK if report.ok else EXIT_FAILED


@router.command(
    "eval",
    "Вычисляет элемент и (необязательно) его действие на слове.",
    [FILE, arg("-e", "--expr", required=True), arg("-w", "--word"), REPORT],
)
def cmd_eval(args: argparse.Namespace) -> int:
    context = _load(args.file)
    g = _element(args.expr, context)
    report = Report(command="eval", params=_params(args))
    result: dict[str, Any] = {
        "expression": args.expr,
        "degree": g.degree,
        "states": g.state_count,
        "root": perm_format(g.root),
        "automaton": to_spec(g),
    }
    if args.word is not None:
        word = parse_word(args.word, g.degree)
        image = act(g, word)
        result.update(word=format_word(word), image=format_word(image))
        print(format_word(image))
    else:
        print(f"root {perm_format(g.root)}, {g.state_count} states")
    report.results.append(result)
    return _finish(report, args)


@router.command(
    "eq",
    "Сравнивает два элемента.",
    [
        FILE,
        arg("-e", "--expr", required=True),
        arg("-e2", "--other", required=True),
        arg("--expect", choices=["equal", "different"]),
        REPORT,
    ],
)
def cmd_eq(args: argparse.Namespace) -> int:
    context = _load(args.file)
    same = equal(_element(args.expr, context), _element(args.other, context))
    verdict = "equal" if same else "different"
    print(verdict)
    report = Report(command="eq", params=_params(args))
    report.results.append({"left": args.expr, "right": args.other, "verdict": verdict})
    if args.expect is not None and args.expect != verdict:
        report.fail("eq", f"ожидалось {args.expect}, получено {verdict}")
    return _finish(report, args)


@router.command(
    "classify",
    "Классифицирует элементы: финитарный, направленный, ограниченный, неограниченный.",
    [
        FILE,
        arg("-e", "--expr", action="append", default=[]),
        arg("--gens", help="Имена из файла через запятую."),
        arg("--activity", type=int, default=0, help="Вывести активность до этого уровня."),
        REPORT,
    ],
)
def cmd_classify(args: argparse.Namespace) -> int:
    context = _load(args.file)
    targets = [(expr, _element(expr, context)) for expr in args.expr]
    if args.gens or not targets:
        targets.extend(_generators(args))
    report = Report(command="classify", params=_params(args))
    for label, g in targets:
        verdict = classify(g)
        result: dict[str, Any] = {
            "element": label,
            "kind": str(verdict.kind),
            "finitary_depth": verdict.finitary_depth,
            "period": verdict.period,
            "spine": format_word(verdict.spine) if verdict.spine is not None else None,
            "bounded_depth": verdict.bounded_depth,
            "max_activity": verdict.max_activity,
        }
        if args.activity > 0:
            result["activity"] = activity_profile(g, args.activity)
        report.results.append(result)
        print(f"{label}: {verdict.kind}")
    return _finish(report, args)


@router.command(
    "dot",
    "Выводит DOT-граф элемента.",
    [
        FILE,
        arg("-e", "--expr", required=True),
        arg("--mode", choices=[mode.value for mode in DotMode], default=DotMode.AUTOMATON.value),
        arg("--out", help="Файл .gv; по умолчанию stdout."),
    ],
)
def cmd_dot(args: argparse.Namespace) -> int:
    g = _element(args.expr, _load(args.file))
    source = to_dot(g, DotMode(args.mode))
    if args.out:
        print(f"dot: {write_atomic(args.out, source)}")
    else:
        print(source, end="")
    return EXIT_OK


@router.command(
    "relations",
    "Машинная проверка таблицы соотношений t·t_v·t⁻¹.",
    [
        arg("--max-prefix", type=int, default=2),
        arg("--max-suffix", type=int, default=5),
        arg("--letters", default="123", help="Буквы суффиксов v."),
        arg("--incomparable-len", type=int, default=3),
        arg("--bijection", type=int, default=0, help="Проверить биекцию v ↦ v′ для k ≤ K."),
        REPORT,
    ],
)
def cmd_relations(args: argparse.Namespace) -> int:
    letters = parse_word(args.letters, 3)
    audit = audit_prop41(args.max_prefix, args.max_suffix, letters, args.incomparable_len or None)
    report = Report(command="relations", params=_params(args))
    for clause, tally in sorted(audit.tallies.items()):
        report.results.append(
            {"clause": clause, "checked": tally.checked, "passed": tally.passed,
             "failed": tally.failed}
        )
    for conflict in audit.conflicts:
        relation = relation_for(conflict.v)
        report.results.append(
            {
                "conflict": format_word(conflict.v),
                "matched_clauses": relation.matched_clauses,
                "ground_truth": [format_word(relation.v_prime), relation.sign],
                "agrees_with_table": relation.agrees_with_table,
                "predictions": [
                    {"clause": p.clause, "v_prime": format_word(p.v_prime), "sign": p.sign}
                    for p in conflict.predictions
                ],
            }
        )
    for failure in audit.failures:
        entry = {
            "w1": format_word(failure.w1),
            "v": format_word(failure.v),
            "clause": failure.clause,
            "predicted": [format_word(failure.predicted[0]), failure.predicted[1]],
            "ground_truth": [format_word(failure.ground_truth[0]), failure.ground_truth[1]],
        }
        if failure.discrepancy:
            report.results.append({"discrepancy": True, **entry})
        else:
            report.fail("clause", f"пункт {failure.clause} не подтвердился", **entry)
    for w1, v in audit.non_generator:
        report.fail(
            "image", "сопряжённый не имеет вида t_{v′}^{±1}", w1=format_word(w1), v=format_word(v)
        )
    for w1, w2 in audit.incomparable_failures:
        report.fail(
            "incomparable", "t_{w₁} и t_{w₂} не коммутируют", w1=format_word(w1), w2=format_word(w2)
        )
    for k in range(1, args.bijection + 1):
        ok = is_conj_bijection(k)
        report.results.append({"bijection_k": k, "ok": ok})
        if not ok:
            report.fail("bijection", f"сопряжение не биективно на словах длины {k}", k=k)
    discrepancies = len(audit.failures) - len(audit.verification_failures)
    print(
        f"clauses checked: {sum(t.checked for t in audit.tallies.values())}, "
        f"discrepancies: {discrepancies}, conflicts: {len(audit.conflicts)}"
    )
    return _finish(report, args)


def _growth_set(args: argparse.Namespace) -> WeightedGenSet:
    if args.tv is not None:
        return tv_generators(args.tv, WeightMode(args.mode))
    if args.file is None:
        return mother_generator_set(args.degree)
    gens: list[WeightedGen] = []
    for name, element in _generators(args):
        gens.append(WeightedGen(name, element, 1))
        inv = inverse(element)
        if inv != element:
            gens.append(WeightedGen(f"{name}^-1", inv, 1))
    return WeightedGenSet(tuple(gens))


@router.command(
    "growth",
    "Точные размеры шаров |B(r)| в словарной метрике.",
    [
        arg("--degree", type=int, default=3, help="Образующие материнской группы G_d."),
        FILE,
        arg("--gens", help="Имена образующих из файла."),
        arg("--tv", type=int, help="Образующие t_v с |v| ≤ TV."),
        arg("--mode", choices=[mode.value for mode in WeightMode], default=WeightMode.PROPER.value),
        arg("--radius", type=int, required=True),
        arg("--expect", help="Ожидаемые размеры через запятую."),
        arg("--csv", help="Путь CSV-таблицы."),
        REPORT,
    ],
)
def cmd_growth(args: argparse.Namespace) -> int:
    gens = _growth_set(args)
    report = Report(command="growth", params=_params(args))
    complete = True
    try:
        table = ball_growth(gens, args.radius)
    except BudgetExceeded as exc:
        partial: GrowthTable = exc.partial
        table = partial
        complete = False
    report.results.append({"sizes": table.sizes, "complete": complete})
    print(",".join(str(size) for size in table.sizes))
    if args.expect:
        expected = [int(chunk) for chunk in args.expect.split(",")]
        if table.sizes[: len(expected)] != expected:
            report.fail("growth", f"ожидалось {expected}, получено {table.sizes}")
    if args.csv:
        write_atomic(args.csv, table.to_csv())
    return _finish(report, args)


@router.command(
    "tlength",
    "Точная длина элемента по образующим t_v^{±1}.",
    [
        FILE,
        arg("-e", "--expr", required=True),
        arg("--depth", type=int, default=1, help="Наибольшая длина v образующих."),
        arg("--mode", choices=[mode.value for mode in WeightMode], default=WeightMode.DEPTH.value),
        arg("--max-weight", type=int),
        arg("--budget", type=int),
        REPORT,
    ],
)
def cmd_tlength(args: argparse.Namespace) -> int:
    g = _element(args.expr, _load(args.file))
    result = t_length(g, args.depth, WeightMode(args.mode), args.max_weight, args.budget)
    report = Report(command="tlength", params=_params(args))
    report.results.append(
        {"outcome": str(result.outcome), "length": result.length, "word": list(result.word)}
    )
    print(f"{result.outcome}: {result.length if result.length is not None else '-'}")
    return _finish(report, args)


@router.command(
    "cosets",
    "Проверяет, что произведения веса ≤ n не дают t_w при |w| > n.",
    [
        arg("-n", type=int, required=True),
        arg("--samples", help="Слова w через запятую; по умолчанию все слова длины n + 1."),
        arg("--budget", type=int),
        REPORT,
    ],
)
def cmd_cosets(args: argparse.Namespace) -> int:
    samples = (
        [parse_word(chunk, 3) for chunk in args.samples.split(",")] if args.samples else None
    )
    entries = coset_separation_check(args.n, samples, args.budget)
    report = Report(command="cosets", params=_params(args))
    for entry in entries:
        report.results.append(
            {"word": format_word(entry.word), "status": str(entry.status),
             "witness": list(entry.witness), "explored": entry.explored}
        )
        if entry.status == CosetStatus.WITNESS:
            report.fail(
                "cosets", f"t_{format_word(entry.word)} получен произведением веса ≤ {args.n}",
                witness=list(entry.witness),
            )
    counts: dict[str, int] = {}
    for entry in entries:
        counts[entry.status] = counts.get(entry.status, 0) + 1
    print(", ".join(f"{status}: {count}" for status, count in sorted(counts.items())))
    return _finish(report, args)


@router.command(
    "solve-eq7",
    "Решает систему на перестановки S_3 и собирает прообразы (ω, 1, 1) для ω ∈ A_3.",
    [arg("--omega", help="Перестановка из A_3; по умолчанию все три."), REPORT],
)
def cmd_solve_eq7(args: argparse.Namespace) -> int:
    omegas = [perm_parse(args.omega, 3)] if args.omega else list(A3)
    report = Report(command="solve-eq7", params=_params(args))
    for omega in omegas:
        solved = solve_eq7(omega)
        full = solved.full
        result: dict[str, Any] = {
            "omega": perm_format(omega),
            "solutions": len(solved.solutions),
            "representative": {
                "sigma1": perm_format(solved.representative.sigma1),
                "sigma1_p": perm_format(solved.representative.sigma1_p),
                "sigma2_p": perm_format(solved.representative.sigma2_p),
                "a": perm_format(solved.representative.a),
            },
            "pairs": [[perm_format(x), perm_format(y)] for x, y in full.pairs()],
        }
        try:
            preimage = psi_preimage_A3(omega)
            result["preimage_states"] = preimage.state_count
            result["verified"] = True
        except ConventionError as exc:
            result["verified"] = False
            report.fail("preimage", str(exc), omega=perm_format(omega))
        report.results.append(result)
        print(f"{perm_format(omega)}: {len(solved.solutions)} solutions")
    return _finish(report, args)


def _t_family() -> list[tuple[str, Element]]:
    special = special_elems()
    gens = [
        ("t", special.t),
        ("t^-1", inverse(special.t)),
        ("ctilde", special.c_tilde),
        ("c", special.c),
    ]
    gens.extend(
        (perm_format(sigma), rootwise(sigma)) for sigma in all_perms(3) if not sigma.is_identity()
    )
    return gens


@router.command(
    "preimage",
    "Ищет h ∈ Stab(1) с заданным сечением на координате.",
    [
        FILE,
        arg("--target", default="t", help="Выражение сечения."),
        arg("--coord", type=int, default=3),
        arg("--radius", type=int, default=3),
        arg("--gens", choices=["mother", "t-family"], default="mother"),
        arg("--transport", action="store_true", help="Применить перенос h·(t·c̃·t⁻¹·c̃)·h⁻¹."),
        arg("--budget", type=int),
        REPORT,
    ],
)
def cmd_preimage(args: argparse.Namespace) -> int:
    target = _element(args.target, _load(args.file))
    generators = _t_family() if args.gens == "t-family" else None
    found = stab1_preimage(target, args.coord, args.radius, generators, args.budget)
    report = Report(command="preimage", params=_params(args))
    result: dict[str, Any] = {
        "outcome": str(found.outcome),
        "word": list(found.word),
        "radius": found.radius,
        "visited": found.visited,
    }
    if found.element is not None and args.transport and args.coord == 3:
        try:
            transported = kernel_transport(found.element)
            result["transport_states"] = transported.state_count
        except ConventionError as exc:
            report.fail("transport", str(exc))
    report.results.append(result)
    print(f"{found.outcome}: {' '.join(found.word) or '-'}")
    if found.outcome == SearchOutcome.BUDGET_EXHAUSTED:
        logger.warning("preimage search exhausted its budget")
    return _finish(report, args)


@router.command(
    "embed",
    "Компилятор вложения ограниченной автоматной группы в материнскую.",
    [
        FILE,
        arg("--gens", help="Имена образующих из файла через запятую."),
        arg("--recheck", help="Перепроверить ранее записанный отчёт embed."),
        arg(
            "--no-align",
            action="store_true",
            help="Не искать общую букву хребта: всегда строить δ с o′ = 1.",
        ),
        REPORT,
    ],
)
def cmd_embed(args: argparse.Namespace) -> int:
    report = Report(command="embed", params=_params(args))
    if args.recheck:
        stored = json.loads(Path(args.recheck).read_text(encoding="utf-8"))
        for payload in stored.get("results", []):
            for problem in recheck_report(payload):
                report.fail("recheck", problem)
        print("recheck: ok" if report.ok else "recheck: failed")
        return _finish(report, args)

    named = _generators(args)
    embedding = embed_pipeline(
        [g for _, g in named],
        labels=[name for name, _ in named],
        strict=False,
        align=not args.no_align,
    )
    report.results.append(embedding.to_payload())
    for certificate in embedding.certificates:
        if not certificate.certificate.passed:
            report.fail(
                "certificate", certificate.certificate.reason, generator=certificate.label,
                coordinate=certificate.certificate.coordinate,
            )
    for failure in embedding.failures:
        report.fail("self-check", failure)
    print(
        f"path={embedding.path} l={embedding.analysis.l} |X′|={embedding.intermediate_alphabet} "
        f"m′={embedding.m_prime} |X″|={embedding.final_alphabet} target {embedding.target}"
    )
    return _finish(report, args)
