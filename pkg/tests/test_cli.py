import json
import shutil

import pytest

from exactg2 import catalog
from exactg2.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_betti_of_the_example(capsys):
    code, report = run_json(capsys, "betti", "--catalog-id", "s-example")
    assert code == 0
    assert report["results"]["betti"] == [1, 1, 0, 0, 0, 0, 1, 1]
    assert set(report) == {"tool", "version", "command", "inputs", "results"}


def test_text_output_is_readable(capsys):
    code, out = run(capsys, "betti", "--catalog-id", "s-example")
    assert code == 0 and "betti: [1, 1, 0, 0, 0, 0, 1, 1]" in out


def test_sweep_report(capsys):
    code, report = run_json(capsys, "sweep")
    assert code == 0
    summary = report["results"]["summary"]
    assert summary["entries"] == 34
    assert summary["admitting"] == ["32", "33", "34"]
    assert all(r["matches_listed_exclusion"] for r in report["results"]["records"])


def test_obstruction_for_n2(capsys):
    code, report = run_json(capsys, "g2-obstruct", "--nilradical", "n2", "--constraints", "su")
    assert code == 0
    res = report["results"]
    assert res["witness"] == "e6" and res["verdict"] is True
    assert res["polynomial"] == "-12*c56^3*a1 - 12*c56^3*a7"
    assert res["polynomial_on_constraints"] == "0"


def test_refuted_obstruction_exits_with_two(capsys):
    code, report = run_json(capsys, "g2-obstruct", "--nilradical", "n2")
    assert code == 2 and report["results"]["verdict"] is False


def test_degenerate_phi_exits_with_two(capsys):
    code, report = run_json(capsys, "g2-check", "--phi", "e123")
    assert code == 2 and report["results"]["is_g2"] is False


def test_adapted_phi_is_accepted(capsys):
    phi = "e127 + e347 + e567 + e135 - e146 - e236 - e245"
    code, report = run_json(capsys, "g2-check", "--phi", phi)
    assert code == 0 and report["results"]["is_g2"] is True


@pytest.mark.parametrize("argv", [
    ["betti", "--tuple", "(0,0,e12,e34)"],
    ["betti", "--catalog-id", "no-such-algebra"],
    ["g2-obstruct"],
    ["frobnicate"],
])
def test_usage_errors_exit_with_one(capsys, argv):
    assert main(argv) == 1
    capsys.readouterr()


def test_strong_unimodularity(capsys):
    code, report = run_json(capsys, "unimodular", "--catalog-id", "n1")
    assert code == 0 and report["results"]["strongly_unimodular"] is True


def test_reports_are_byte_identical(capsys):
    argv = ["classify", "--catalog-id", "n2", "--format", "json"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_timing_only_on_request(capsys):
    _, report = run_json(capsys, "betti", "--catalog-id", "n1")
    assert "timing_seconds" not in report
    _, report = run_json(capsys, "betti", "--catalog-id", "n1", "--timing")
    assert report["timing_seconds"] >= 0


def test_reproduce_single_criterion(capsys):
    code, out = run(capsys, "reproduce", "--only", "obstructions")
    assert code == 0
    assert "[PASS]  8 obstructions" in out


def test_perturbed_fixture_is_caught(capsys, tmp_path, monkeypatch):
    source = catalog.__file__.replace("catalog.py", "data/fixtures.ini")
    target = tmp_path / "fixtures.ini"
    shutil.copy(source, target)
    text = target.read_text()
    assert "-3/2e67" in text
    target.write_text(text.replace("-3/2e67", "-5/2e67", 1))
    monkeypatch.setenv(catalog.FIXTURES_ENV, str(target))
    code, out = run(capsys, "reproduce", "--only", "s-betti")
    assert code != 0
    assert "[FAIL]  1 s-betti" in out
