from __future__ import annotations

import json

import pytest

from semcost.cli import main
from semcost.llm_sensor import FixtureBackend, MockBackend, SensorQuery, build_request
from semcost.scenario import load_scenario, rasterize
from semcost import data


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_plan_builtin_scenario(capsys):
    code, out, _ = run(capsys, ["plan", "--scenario", "workzone"])
    assert code == 0
    assert "cost" in out and "min obstacle dist" in out


def test_plan_json_with_overrides(capsys):
    code, out, _ = run(capsys, ["plan", "--scenario", "workzone", "--gamma", "0", "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["metrics"]["min_obstacle_dist_m"] == pytest.approx(0.1)


def test_plan_scenario_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(data.scenario_text("cement"))
    code, out, _ = run(capsys, ["plan", "--scenario", str(path)])
    assert code == 0


def test_prompt_prints_table_row(capsys):
    code, out, _ = run(capsys, [
        "prompt", "--scenario", "workzone",
        "--text", "The work zone is busy today", "--backend", "mock",
    ])
    assert code == 0
    assert "0.86" in out


def test_prompt_trust_override(capsys):
    code, out, _ = run(capsys, [
        "prompt", "--scenario", "workzone", "--text", "busy", "--trust", "0", "--json",
    ])
    assert code == 0
    doc = json.loads(out)
    assert doc["posteriors"]["workstations"] == 0.5


def test_compare_table(tmp_path, capsys):
    prompts = tmp_path / "prompts.json"
    prompts.write_text(json.dumps([
        {"label": "empty", "text": "The work zone is empty today"},
        {"label": "busy", "text": "The work zone is busy today"},
    ]))
    code, out, _ = run(capsys, ["compare", "--scenario", "workzone", "--prompts", str(prompts)])
    assert code == 0
    assert "baseline (gamma=0)" in out
    assert "busy" in out and "empty" in out


def test_sweep_json(capsys):
    code, out, _ = run(capsys, [
        "sweep", "--scenario", "workzone", "--text", "busy", "--n-values", "0,5,50",
    ])
    assert code == 0
    doc = json.loads(out)
    means = [pt["mean"] for pt in doc["curves"]["workstations"]]
    assert means == [0.5, pytest.approx(6 / 7), pytest.approx(51 / 52)]


def test_ablate_deterministic(capsys):
    code, out, _ = run(capsys, [
        "ablate", "--scenario", "workzone", "--text", "busy", "--runs", "5",
    ])
    assert code == 0
    doc = json.loads(out)
    assert doc["posterior_stats"]["workstations"]["std"] == 0.0


def test_fixture_backend_flag(tmp_path, capsys):
    scenario = load_scenario(data.scenario_text("workzone"))
    grid = rasterize(scenario)
    from semcost.session import prompt_id_for

    text = "The work zone is busy today"
    query = SensorQuery(prompt=text, obstacles=grid.roster(), prompt_id=prompt_id_for(text, 0))
    records = FixtureBackend.record(MockBackend(), [build_request(query)])
    fix = tmp_path / "fixtures.json"
    FixtureBackend.write_file(fix, records)
    code, out, _ = run(capsys, [
        "prompt", "--scenario", "workzone", "--text", text,
        "--backend", "fixture", "--fixtures", str(fix), "--json",
    ])
    assert code == 0
    assert json.loads(out)["posteriors"]["workstations"] == pytest.approx(6 / 7)


def test_unknown_scenario_is_clean_error(capsys):
    code, _, err = run(capsys, ["plan", "--scenario", "does-not-exist"])
    assert code == 2
    assert "error" in err


def test_fixture_without_file_is_clean_error(capsys):
    code, _, err = run(capsys, [
        "prompt", "--scenario", "workzone", "--text", "x", "--backend", "fixture",
    ])
    assert code == 2
    assert "fixtures" in err
