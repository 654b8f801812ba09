from __future__ import annotations

import json

from wreathkit.config import settings
from wreathkit.machine import identity
from wreathkit.models import Report
from wreathkit.render import DotMode, resolve_output, to_dot, write_atomic, write_report


def test_automaton_dot(special):
    source = to_dot(special.c, name="c")
    assert source.startswith("digraph c {")
    assert "doublecircle" in source
    assert "q0 -> q0" in source
    assert "q0 -> q2" in source
    assert "q2 -> _" in source
    assert "1,2,3" in source


def test_wreath_dot_shows_one_level(special):
    source = to_dot(special.t, DotMode.WREATH)
    assert "rank=same" in source
    assert "root -> x1" in source
    assert "root -> x3" in source
    assert "x4" not in source


def test_identity_dot():
    source = to_dot(identity(2))
    assert "_ -> _" in source


def test_write_atomic_creates_parents(tmp_path):
    target = write_atomic(tmp_path / "nested" / "out.gv", "digraph {}\n")
    assert target.read_text(encoding="utf-8") == "digraph {}\n"
    assert [path.name for path in target.parent.iterdir()] == ["out.gv"]

    write_atomic(target, "digraph g {}\n")
    assert target.read_text(encoding="utf-8") == "digraph g {}\n"


def test_report_dir_for_relative_paths(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "report_dir_raw", str(tmp_path))
    assert resolve_output("r.json") == tmp_path / "r.json"
    assert resolve_output(tmp_path / "abs.json") == tmp_path / "abs.json"

    report = Report(command="eq", params={"expr": "c"})
    report.fail("eq", "не совпало", left="c")
    path = write_report(report, "r.json")
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert set(payload) == {"command", "params", "results", "failures", "toolkit_version"}
    assert payload["failures"][0]["data"] == {"left": "c"}


def test_report_without_dir(monkeypatch):
    monkeypatch.setattr(settings, "report_dir_raw", "   ")
    assert settings.report_dir is None
    assert str(resolve_output("r.json")) == "r.json"
