import argparse
import json
import sys

import pytest
from conftest import root_path

from natlogic.commands import (
    cmd_check,
    cmd_compare,
    cmd_derive,
    cmd_extend,
    cmd_filters,
    cmd_natext_lattice,
    cmd_replay,
    cmd_search,
    emit,
    parse_arity,
)
from natlogic.report import Check, Report
from natlogic.search import MULTIPLE_NATEXTS, SS_CUT_FAILURE

TWO_POINT = root_path("structures", "two-point.struct")
A_IMPLIES_B = root_path("logics", "a-implies-b.logic")


def test_exit_codes():
    report = Report("x")
    assert report.exit_code == 0
    report.bounds.append("max_depth=2")
    assert report.exit_code == 0
    report.strict = True
    assert report.exit_code == 3
    report.add_check(Check.failed("p", {"goal": "a"}))
    assert report.exit_code == 1
    assert report.witnesses == [{"check": "p", "goal": "a"}]
    assert report.error("bad input").exit_code == 2


def test_arity_arguments():
    assert parse_arity(None) is None
    assert parse_arity("omega") is None
    assert parse_arity("3") == 3
    with pytest.raises(ValueError):
        parse_arity("0")


def test_derive():
    report = cmd_derive("builtin:running", "x", "a")
    assert report.exit_code == 0
    assert report.verdicts[0]["answer"] == "yes"
    assert [check.name for check in report.checks] == ["replay"]
    assert report.data == {"presentation": "running", "exact": True}
    assert cmd_derive("builtin:running", "x", "q").exit_code == 2
    assert cmd_derive("builtin:nothing", "x", "a").exit_code == 2
    assert cmd_derive("missing.logic", "x", "a").exit_code == 2


def test_derive_with_bounds(tmp_path):
    path = tmp_path / "deepening.logic"
    path.write_text("sig b:0 f:1\nvars x\nrule x => f(x)\n", encoding="utf-8")
    report = cmd_derive(str(path), "x", "b")
    assert report.verdicts[0]["answer"] == "unknown"
    assert report.bounds == ["max_depth=2"]
    assert report.exit_code == 0
    assert cmd_derive(str(path), "x", "b", strict=True).exit_code == 3
    wider = cmd_derive(str(path), "x", "f(f(f(x)))", bounds="depth=3 iters=8")
    assert wider.verdicts[0]["answer"] == "yes"


def test_extend():
    report = cmd_extend("builtin:running", premises="y", goal="a")
    assert report.exit_code == 0
    assert report.verdicts[0]["answer"] == "yes"
    assert report.data == {"relation": "minus", "target": ["x", "y"]}
    assert report.checks[0].name == "replay"
    no = cmd_extend("builtin:running", "x y", "plus", premises="a", goal="y")
    assert no.verdicts[0]["answer"] == "no"


def test_extend_reports_partial_answers():
    report = cmd_extend("builtin:cut-failure", "x y", "plus", premises="f(x)", goal="c")
    assert report.verdicts[0]["answer"] == "unknown"
    assert report.notes == ["plus was checked on finitely many substitutions only"]
    assert report.exit_code == 0
    assert cmd_extend("builtin:cut-failure", "x y", "plus", premises="f(x)", goal="c", strict=True).exit_code == 3


def test_extend_input_errors():
    assert cmd_extend("builtin:running", method="sup", goal="a").exit_code == 2
    assert cmd_extend("builtin:running", arity="0", goal="a").exit_code == 2
    assert cmd_extend("builtin:running", "y", goal="a").exit_code == 2


def test_compare():
    report = cmd_compare("builtin:collapse", "minus", "plus")
    assert report.exit_code == 0
    assert report.data["equal"] is False
    assert report.data["converse"]["witness"] == {"premises": ["x"], "goal": "y"}
    reverse = cmd_compare("builtin:collapse", "plus", "minus")
    assert reverse.exit_code == 1
    assert reverse.witnesses == [{"check": "plus ⊆ minus", "premises": ["x"], "goal": "y"}]
    assert cmd_compare("builtin:running", "minus", "plus", arity="2").data["equal"] is True


def test_check_running_example():
    report = cmd_check("builtin:running")
    assert report.status == "pass", [check.to_dict() for check in report.checks if not check]
    assert report.data["arity_profile"] == 2
    assert report.data["natural_extensions"] == ["minus"]
    assert set(report.timing) == {"chain", "closure", "filters", "roundtrip"}


def test_check_catches_perturbed_theories():
    report = cmd_check("builtin:running", "filters", perturb=lambda theories: theories - {max(theories)})
    assert report.exit_code == 1
    assert report.witnesses[0] == {
        "check": "filters = theories:running",
        "set": ["a", "x"],
        "filter": True,
        "theory": False,
    }


def test_check_outside_constants():
    report = cmd_check("builtin:cut-failure")
    assert report.exit_code == 0
    assert all(check.skipped for check in report.checks)
    pointwise = cmd_check("builtin:cut-failure", "chain", premise_sets=["f(x), g(y)"])
    assert pointwise.exit_code == 0
    assert pointwise.data["chain"]["observations"][0]["goal"] == "d"


def test_check_input_errors():
    assert cmd_check("builtin:running", "everything").exit_code == 2
    assert cmd_check("missing.logic").exit_code == 2


def test_filters():
    report = cmd_filters(TWO_POINT, A_IMPLIES_B, generate="0", structure_name="A")
    assert report.exit_code == 0
    assert sorted(report.data["filters"]) == ["A", "B", "C"]
    assert report.data["filters"]["A"]["filters"] == [[], ["1"], ["0", "1"]]
    assert sorted(report.data["preimages"]) == ["A->B", "A->C"]
    assert report.data["generated"] == {"structure": "A", "set": ["0"], "filter": ["0", "1"]}


def test_filters_input_errors(tmp_path):
    assert cmd_filters(TWO_POINT, "builtin:running").exit_code == 2
    assert cmd_filters(TWO_POINT, A_IMPLIES_B, generate="0", structure_name="Z").exit_code == 2
    assert cmd_filters(TWO_POINT, A_IMPLIES_B, generate="7", structure_name="A").exit_code == 2
    assert cmd_filters(str(tmp_path / "missing.struct"), A_IMPLIES_B).exit_code == 2


def test_natext_lattice(tmp_path):
    output = tmp_path / "lattice.dot"
    report = cmd_natext_lattice("builtin:running", emit="dot", output=str(output))
    assert report.exit_code == 0
    assert "rankdir=BT;" in report.data["dot"]
    assert output.read_text(encoding="utf-8") == report.data["dot"]
    assert report.data["lattice"]["labels"] == ["minus"]
    assert cmd_natext_lattice("builtin:running", emit="svg").exit_code == 2
    assert cmd_natext_lattice("builtin:cut-failure").exit_code == 2


def test_search_and_replay(tmp_path):
    path = tmp_path / "cut.witness"
    report = cmd_search(SS_CUT_FAILURE, output=str(path))
    assert report.exit_code == 0
    assert report.checks[0].name == f"replay:{SS_CUT_FAILURE}"
    replayed = cmd_replay(str(path))
    assert replayed.exit_code == 0
    assert replayed.data["witness"] == report.data["search"]["witness"]


def test_search_bounds_and_errors(tmp_path):
    spent = cmd_search(SS_CUT_FAILURE, budget=0, strict=True)
    assert spent.bounds == ["budget=0"]
    assert spent.exit_code == 3
    assert cmd_search("cut-elimination").exit_code == 2
    assert cmd_replay(str(tmp_path / "missing.witness")).exit_code == 2


def test_exhausted_search_is_not_a_bound():
    report = cmd_search(MULTIPLE_NATEXTS, strict=True)
    search = report.data["search"]
    assert search["found"] or search["exhausted"]
    assert report.bounds == []
    assert report.exit_code == 0


def test_reports_without_timing_are_reproducible():
    first = cmd_derive("builtin:singular-analog", "m11, m12, m21, m22", "star").to_json(False)
    second = cmd_derive("builtin:singular-analog", "m11, m12, m21, m22", "star").to_json(False)
    assert first == second
    assert "timing" not in json.loads(first)


def test_emit(tmp_path, capsys):
    path = tmp_path / "report.json"
    args = argparse.Namespace(no_timing=True, report=str(path))
    with pytest.raises(SystemExit) as exit_info:
        emit(cmd_derive("builtin:running", "x", "a"), args)
    assert exit_info.value.code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["status"] == "pass"
    assert json.loads(path.read_text(encoding="utf-8")) == printed


def test_script_entry_point(monkeypatch, capsys):
    import derive

    monkeypatch.setattr(sys, "argv", ["derive.py", "builtin:running", "--premises", "", "--goal", "a", "--no-timing"])
    with pytest.raises(SystemExit) as exit_info:
        derive.main()
    assert exit_info.value.code == 0
    assert json.loads(capsys.readouterr().out)["verdicts"][0]["answer"] == "no"
