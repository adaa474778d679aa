import json

import pytest
from click.testing import CliRunner

from artifact.cli import bundled_scenarios, main


@pytest.fixture
def runner():
    return CliRunner()


def call(runner, args, env=None):
    return runner.invoke(main, args, env=env, catch_exceptions=False)


def test_cohomology_command(runner):
    r = call(runner, ["--cutoff", "4", "cohomology", "ab(9)"])
    assert r.exit_code == 0
    rep = json.loads(r.stdout)
    assert rep["status"] == "ok" and rep["result"]["dims"] == [1] * 5


def test_flags_after_subcommand_win(runner):
    r = call(runner, ["--cutoff", "2", "cohomology", "ab(3,3)", "--cutoff", "3"])
    assert json.loads(r.stdout)["result"]["dims"] == [1, 2, 3, 4]


def test_env_var_override(runner):
    r = call(runner, ["cohomology", "ab(3)"], env={"ARTIFACT_CUTOFF": "5"})
    assert json.loads(r.stdout)["result"]["dims"] == [1] * 6


def test_ring_compare(runner):
    r = call(runner, ["ring", "ab(3,3)", "--compare", "ab(9,9)"])
    assert r.exit_code == 0
    assert json.loads(r.stdout)["result"]["verdict"]["verdict"] == "ISO"


def test_budget_exit_code(runner):
    r = call(runner, ["--budget", "10", "--cutoff", "6", "cohomology", "ab(9)"])
    assert r.exit_code == 3
    assert json.loads(r.stdout)["status"] == "budget_exceeded"


def test_malformed_dsl_exit_code(runner):
    r = call(runner, ["cohomology", "sd(ab(3,3),"])
    assert r.exit_code == 2
    assert "line 1" in r.stderr


def test_text_format(runner):
    r = call(runner, ["--format", "text", "cohomology", "ab(9)"])
    assert r.exit_code == 0 and "dims" in r.stdout


def test_constructible_default_gamma(runner):
    r = call(runner, ["constructible"])
    assert r.exit_code == 0
    assert json.loads(r.stdout)["status"] == "ok"


def test_bundled_scenarios_listed():
    assert {"weigel_cyclic", "semidirect", "constructible", "budget_exceeded", "malformed_dsl"} <= set(bundled_scenarios())


@pytest.mark.parametrize("name, code", [("weigel_cyclic", 0), ("constructible", 0),
                                        ("budget_exceeded", 3), ("malformed_dsl", 2)])
def test_run_bundled(runner, name, code):
    r = call(runner, ["run", name])
    assert r.exit_code == code
    rep = json.loads(r.stdout)
    assert rep["schema"] == "artifact.report/1"


def test_malformed_dsl_position(runner):
    rep = json.loads(call(runner, ["run", "malformed_dsl"]).stdout)
    err = rep["tasks"][0]["error"]
    assert (err["line"], err["column"]) == (2, 29)


def test_reports_are_deterministic(runner, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert call(runner, ["--out", str(a), "run", "weigel_cyclic"]).exit_code == 0
    assert call(runner, ["--out", str(b), "run", "weigel_cyclic"]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    assert "seconds" not in a.read_text()


def test_timings_flag_adds_seconds(runner):
    rep = json.loads(call(runner, ["--timings", "cohomology", "ab(3)"]).stdout)
    assert "seconds" in rep


def test_bad_scenario_file(runner, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert call(runner, ["run", str(p)]).exit_code == 2
    p.write_text(json.dumps({"schema": "artifact.scenario/1", "tasks": [{"kind": "nope"}]}))
    assert call(runner, ["run", str(p)]).exit_code == 2


def test_property_suite_and_mutation(runner):
    r = call(runner, ["suite", "properties", "--seed", "3"])
    assert r.exit_code == 0
    rep = json.loads(r.stdout)
    assert rep["passed"] == rep["total"]
    r = call(runner, ["suite", "properties", "--seed", "3", "--mutate-cup-sign"])
    assert r.exit_code == 1
    failed = [row["id"] for row in json.loads(r.stdout)["results"] if not row["passed"]]
    assert failed == ["leibniz"]


def test_acceptance_subset_with_timings(runner):
    r = call(runner, ["--timings", "suite", "acceptance", "--only", "1,10"])
    assert r.exit_code == 0
    rep = json.loads(r.stdout)
    assert rep["total"] == 2 and all("seconds" in row for row in rep["results"])
    assert "[PASS]" in r.stderr
