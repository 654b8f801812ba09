from __future__ import annotations

import json

import pytest

from wreathkit.config import settings
from wreathkit.errors import (
    CertificateFailure,
    ConventionError,
    NoSingleGeneratorImage,
    PermError,
    WreathkitError,
)
from wreathkit.handlers import EXIT_FAILED, EXIT_OK, EXIT_USAGE, Router, build_parser, dispatch
from wreathkit.handlers import commands, suite
from wreathkit.services import embedder, intern_state


def run(*argv: str) -> int:
    return dispatch(list(argv), commands.router, suite.router)


def test_every_subcommand_is_registered():
    parser = build_parser(commands.router, suite.router)
    names = set(commands.router.commands) | set(suite.router.commands)
    assert names == {
        "eval", "eq", "classify", "dot", "relations", "growth", "tlength",
        "cosets", "solve-eq7", "preimage", "embed", "suite",
    }
    assert parser.prog == "wreathkit"


def test_eval_prints_image(automata_dir, capsys):
    code = run("eval", "-f", str(automata_dir / "g3.aut"), "-e", "perm(2 3) c", "-w", "23")
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "33"


def test_eq_with_expectation(tmp_path, capsys):
    assert run("eq", "-e", "t", "-e2", "perm(2 3) c perm(2 3) c", "--expect", "equal") == EXIT_OK
    assert capsys.readouterr().out.strip() == "equal"

    report = tmp_path / "eq.json"
    code = run("eq", "-e", "t", "-e2", "c", "--expect", "equal", "--report", str(report))
    assert code == EXIT_FAILED
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload["command"] == "eq"
    assert payload["results"][0]["verdict"] == "different"
    assert payload["failures"][0]["check"] == "eq"
    assert "FAIL eq" in capsys.readouterr().out


def test_reports_are_byte_identical(tmp_path):
    report = tmp_path / "cls.json"
    args = ("classify", "-e", "t", "-e", "c", "--activity", "3", "--report", str(report))
    assert run(*args) == EXIT_OK
    first = report.read_bytes()
    assert run(*args) == EXIT_OK
    assert report.read_bytes() == first


def test_classify_grigorchuk(automata_dir, tmp_path):
    report = tmp_path / "grig.json"
    code = run("classify", "-f", str(automata_dir / "grig.aut"), "--report", str(report))
    assert code == EXIT_OK
    kinds = {
        entry["element"]: entry["kind"]
        for entry in json.loads(report.read_text(encoding="utf-8"))["results"]
    }
    assert kinds == {"a": "Finitary", "b": "Directed", "c": "Directed", "d": "Directed"}


def test_dot_to_file(automata_dir, tmp_path, capsys):
    out = tmp_path / "c.gv"
    assert run("dot", "-f", str(automata_dir / "g3.aut"), "-e", "c", "--out", str(out)) == EXIT_OK
    assert out.read_text(encoding="utf-8").startswith("digraph")
    assert run("dot", "-e", "t", "--mode", "wreath") == EXIT_OK
    assert "root -> x1" in capsys.readouterr().out


def test_relations_lists_discrepancies_without_failing(tmp_path):
    report = tmp_path / "rel.json"
    code = run(
        "relations", "--max-prefix", "0", "--max-suffix", "3", "--incomparable-len", "0",
        "--bijection", "2", "--report", str(report),
    )
    assert code == EXIT_OK
    results = json.loads(report.read_text(encoding="utf-8"))["results"]
    assert any(entry.get("discrepancy") and entry["v"] == "231" for entry in results)
    conflict = next(entry for entry in results if entry.get("conflict") == "231")
    assert conflict["ground_truth"] == ["221", 1]
    assert conflict["agrees_with_table"] is False
    assert conflict["matched_clauses"].split(",")[0] == "1"
    assert {"bijection_k": 2, "ok": True} in results


def test_growth_with_csv(tmp_path, capsys):
    csv = tmp_path / "g2.csv"
    code = run("growth", "--degree", "2", "--radius", "3", "--expect", "1,3,5,7", "--csv", str(csv))
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "1,3,5,7"
    assert csv.read_text(encoding="utf-8").splitlines()[-1] == "3,7"

    assert run("growth", "--degree", "2", "--radius", "2", "--expect", "1,3,6") == EXIT_FAILED


def test_growth_from_file(automata_dir, capsys):
    code = run("growth", "-f", str(automata_dir / "g2.aut"), "--radius", "2")
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "1,3,5"


def test_tlength_and_cosets(capsys):
    assert run("tlength", "-e", "tv(2)", "--depth", "1") == EXIT_OK
    assert capsys.readouterr().out.strip() == "found: 1"
    assert run("cosets", "-n", "0") == EXIT_OK


def test_solve_eq7_and_preimage(capsys):
    assert run("solve-eq7", "--omega", "(1 2 3)") == EXIT_OK
    assert run("preimage", "--target", "c", "--coord", "3", "--radius", "1") == EXIT_OK
    assert capsys.readouterr().out.splitlines()[-1].startswith("found")


def test_embed_and_recheck(automata_dir, tmp_path, capsys):
    report = tmp_path / "embed.json"
    code = run(
        "embed", "-f", str(automata_dir / "grig.aut"), "--gens", "a,b,c,d", "--report", str(report)
    )
    assert code == EXIT_OK
    payload = json.loads(report.read_text(encoding="utf-8"))["results"][0]
    assert payload["final_alphabet"] == 8
    assert payload["l"] == 3
    assert all(cert["passed"] for cert in payload["certificates"])

    assert run("embed", "--recheck", str(report)) == EXIT_OK
    assert "recheck: ok" in capsys.readouterr().out


def test_relative_report_goes_to_report_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "report_dir_raw", str(tmp_path))
    assert run("eq", "-e", "c", "-e2", "c", "--report", "eq.json") == EXIT_OK
    assert (tmp_path / "eq.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        (),
        ("unknown",),
        ("eval",),
        ("eval", "-e", "nosuchname"),
        ("eval", "-f", "/nonexistent/file.aut", "-e", "c"),
        ("eval", "-e", "c", "-w", "4"),
        ("classify",),
        ("embed",),
    ],
)
def test_usage_errors(argv):
    assert run(*argv) == EXIT_USAGE


def test_quick_suite_subset(tmp_path, capsys):
    report = tmp_path / "suite.json"
    code = run(
        "suite", "--quick", "--only", "wreath-identity,commutator-identities,eq7",
        "--report", str(report),
    )
    assert code == EXIT_OK
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert [entry["check"] for entry in payload["results"]] == [
        "wreath-identity", "commutator-identities", "eq7",
    ]
    assert "seconds" not in payload["results"][0]


@pytest.mark.parametrize(
    ("error", "expected"),
    [
        (ConventionError("β не фиксирует o′."), EXIT_FAILED),
        (CertificateFailure("форма не подтвердилась", "b", 2), EXIT_FAILED),
        (NoSingleGeneratorImage("не t_v"), EXIT_FAILED),
        (PermError("буква вне алфавита"), EXIT_USAGE),
        (WreathkitError("нет файла"), EXIT_USAGE),
    ],
)
def test_dispatch_separates_failed_checks_from_usage_errors(error, expected):
    router = Router()

    @router.command("boom", "Бросает заданную ошибку.")
    def boom(_):
        raise error

    assert dispatch(["boom"], router) == expected


def test_dispatch_clears_intern_table():
    assert run("eq", "-e", "t", "-e2", "perm(2 3) c perm(2 3) c") == EXIT_OK
    assert intern_state.table_size() == 0
    assert intern_state.get_table().products == {}


def test_embed_delta_path_on_grigorchuk(automata_dir, tmp_path, capsys):
    report = tmp_path / "embed.json"
    code = run(
        "embed", "-f", str(automata_dir / "grig.aut"), "--gens", "a,b,c,d", "--no-align",
        "--report", str(report),
    )
    assert code == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0].startswith("path=delta")
    payload = json.loads(report.read_text(encoding="utf-8"))["results"][0]
    assert payload["path"] == "delta"
    assert payload["final_alphabet"] == 64
    assert payload["reassembly"] == [True, True, True]
    assert run("embed", "--recheck", str(report)) == EXIT_OK


def test_embed_records_failed_normalization(automata_dir, tmp_path, monkeypatch):
    def broken(*_):
        raise ConventionError("β не фиксирует o′.")

    monkeypatch.setattr(embedder, "normalize_directed", broken)
    report = tmp_path / "embed.json"
    code = run(
        "embed", "-f", str(automata_dir / "twospine.aut"), "--gens", "b,e", "--report", str(report)
    )
    assert code == EXIT_FAILED
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert [failure["check"] for failure in payload["failures"]] == ["self-check", "self-check"]
    assert payload["results"][0]["failures"]
