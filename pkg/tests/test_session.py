from __future__ import annotations

import json

import numpy as np
import pytest
from conftest import make_scenario

from semcost.errors import NothingToUndoError, SensorTransportError, StateFormatError
from semcost.llm_sensor import MockBackend
from semcost.planner import PlannerParams
from semcost.session import Session, compare_runs, replay_posteriors

BUSY = "The work zone is busy today; proceed to your destination."
EMPTY = "The work zone is empty today; proceed to your destination."


class FailingBackend:
    name = "mock"

    def complete(self, request_text):
        raise SensorTransportError("timeout")


class FixedScoreBackend:
    name = "mock"

    def __init__(self, score):
        self.score = score

    def complete(self, request_text):
        ids = [o["id"] for o in json.loads(json.loads(request_text)["messages"][1]["content"])["obstacles"]]
        return json.dumps({"scores": {oid: self.score for oid in ids}})


def state_fingerprint(session: Session) -> str:
    return json.dumps(session.snapshot(), sort_keys=True)


def test_busy_prompt_reproduces_table_posteriors(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    record = session.apply_prompt(BUSY, MockBackend())
    assert round(record.posteriors_after["workstations"], 2) == 0.86
    assert round(record.posteriors_after["wall"], 2) == 0.29
    assert len(session.prompt_log) == 1


def test_neutral_prompt_drives_posteriors_toward_half(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    session.apply_prompt(BUSY, MockBackend())
    ws_probe = (16, 21)  # two cells above the workstation block, far from the wall
    wall_probe = (10, 1)  # one cell above the wall, far from the workstation
    ws_means, wall_means, ws_vals, wall_vals = [], [], [], []
    for _ in range(4):
        session.apply_prompt("status unchanged", FixedScoreBackend(0.5))
        means = session.posterior_means()
        ws_means.append(means["workstations"])
        wall_means.append(means["wall"])
        ws_vals.append(session.total_field.at(ws_probe))
        wall_vals.append(session.total_field.at(wall_probe))
    # posteriors converge toward 0.5 from both sides
    assert all(b < a for a, b in zip([6 / 7] + ws_means, ws_means))
    assert all(m > 0.5 for m in ws_means)
    assert all(b > a for a, b in zip([2 / 7] + wall_means, wall_means))
    assert all(m < 0.5 for m in wall_means)
    # the field follows monotonically: down near the workstation, up near the wall
    assert all(b < a for a, b in zip(ws_vals, ws_vals[1:]))
    assert all(b > a for a, b in zip(wall_vals, wall_vals[1:]))


def test_sensor_failure_leaves_state_bitwise_unchanged(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    session.apply_prompt(BUSY, MockBackend())
    before = state_fingerprint(session)
    before_field = session.total_field.values.copy()
    with pytest.raises(SensorTransportError):
        session.apply_prompt("anything", FailingBackend())
    assert state_fingerprint(session) == before
    assert np.array_equal(session.total_field.values, before_field)


def test_replan_empty_map_is_straight_line():
    sc = make_scenario(width=12, height=3, start=(0, 1), goal=(11, 1), obstacles=[])
    session = Session(sc)
    result = session.replan()
    assert result.path == tuple((i, 1) for i in range(12))
    assert result.metrics.min_obstacle_dist_m is None


def test_busy_path_at_least_as_long_as_empty(workzone):
    busy = Session(workzone, clock=lambda: 0.0)
    busy.apply_prompt(BUSY, MockBackend())
    empty = Session(workzone, clock=lambda: 0.0)
    empty.apply_prompt(EMPTY, MockBackend())
    assert busy.replan().metrics.length_cells >= empty.replan().metrics.length_cells


def test_fresh_session_differs_from_baseline_only_via_potential(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    shaped = session.replan()
    baseline = session.replan(PlannerParams(w1=1.0, w2=1.0, gamma=0.0, connectivity=8))
    # same grid: baseline is the pure shortest path, shaping only adds cost
    assert shaped.metrics.length_cells >= baseline.metrics.length_cells


def test_undo_restores_exact_snapshot(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    initial = state_fingerprint(session)
    session.apply_prompt(BUSY, MockBackend())
    session.undo()
    assert state_fingerprint(session) == initial


def test_two_prompts_one_undo(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    session.apply_prompt(BUSY, MockBackend())
    after_first = state_fingerprint(session)
    session.apply_prompt(EMPTY, MockBackend())
    session.undo()
    assert state_fingerprint(session) == after_first
    assert len(session.prompt_log) == 1
    assert round(session.posterior_means()["workstations"], 2) == 0.86


def test_undo_on_fresh_session_errors(workzone):
    session = Session(workzone)
    with pytest.raises(NothingToUndoError):
        session.undo()


def test_undo_restores_last_plan(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    first_plan = session.replan()
    session.apply_prompt(BUSY, MockBackend())
    session.replan()
    session.undo()
    assert session.last_plan == first_plan


def test_save_load_roundtrip(tmp_path, workzone):
    session = Session(workzone, clock=lambda: 42.0)
    session.apply_prompt(BUSY, MockBackend())
    session.apply_prompt(EMPTY, MockBackend(), trust_n=2.5)
    session.replan()
    path = tmp_path / "state.json"
    session.save_state(path)
    loaded = Session.load_state(path)
    assert state_fingerprint(loaded) == state_fingerprint(session)
    assert loaded.posteriors == session.posteriors
    # undo still works after reload (stack rebuilt by replay)
    loaded.undo()
    assert len(loaded.prompt_log) == 1


def test_load_then_replan_is_deterministic(tmp_path, workzone):
    session = Session(workzone, clock=lambda: 42.0)
    session.apply_prompt(BUSY, MockBackend())
    before = session.replan()
    path = tmp_path / "state.json"
    session.save_state(path)
    loaded = Session.load_state(path)
    after = loaded.replan()
    assert after == before


def test_version_mismatch_rejected(tmp_path, workzone):
    session = Session(workzone, clock=lambda: 0.0)
    path = tmp_path / "state.json"
    session.save_state(path)
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(StateFormatError):
        Session.load_state(path)


def test_corrupt_file_rejected(tmp_path):
    path = tmp_path / "state.json"
    path.write_text("{broken")
    with pytest.raises(StateFormatError):
        Session.load_state(path)
    path.write_text('{"format": "something-else"}')
    with pytest.raises(StateFormatError):
        Session.load_state(path)


def test_replay_equivalence(workzone):
    session = Session(workzone, clock=lambda: 0.0)
    session.apply_prompt(BUSY, MockBackend())
    session.apply_prompt(EMPTY, MockBackend(), trust_n=1.5)
    session.apply_prompt(BUSY, MockBackend(), trust_n=0.25)
    replayed = replay_posteriors(workzone, session.prompt_log)
    for ob, state in zip(session.grid.obstacles, session.posteriors):
        assert abs(replayed[ob.id].alpha - state.alpha) <= 1e-12
        assert abs(replayed[ob.id].beta - state.beta) <= 1e-12


def test_prompt_log_timestamps_and_ids(workzone):
    times = iter([100.0, 200.0])
    session = Session(workzone, clock=lambda: next(times))
    a = session.apply_prompt(BUSY, MockBackend())
    b = session.apply_prompt(BUSY, MockBackend())
    assert a.timestamp == 100.0 and b.timestamp == 200.0
    assert a.prompt_id != b.prompt_id  # same text, different index


def test_compare_runs_table(workzone):
    rows = compare_runs(
        workzone,
        [{"label": "empty", "text": EMPTY}, {"label": "busy", "text": BUSY}],
        MockBackend(),
        clock=lambda: 0.0,
    )
    assert [r["label"] for r in rows] == ["empty", "busy", "baseline (gamma=0)"]
    busy = next(r for r in rows if r["label"] == "busy")
    empty = next(r for r in rows if r["label"] == "empty")
    base = rows[-1]
    assert busy["metrics"]["min_obstacle_dist_m"] > empty["metrics"]["min_obstacle_dist_m"]
    assert empty["metrics"]["min_obstacle_dist_m"] > base["metrics"]["min_obstacle_dist_m"]
    assert base["posteriors"] == {}


def test_compare_runs_deterministic(workzone):
    a = compare_runs(workzone, [{"label": "busy", "text": BUSY}], MockBackend(), clock=lambda: 0.0)
    b = compare_runs(workzone, [{"label": "busy", "text": BUSY}], MockBackend(), clock=lambda: 0.0)
    assert a == b


def test_compare_runs_annotates_failing_variant(workzone):
    rows = compare_runs(
        workzone,
        [{"label": "ok", "text": BUSY}, {"label": "bad", "text": "x"}],
        _SelectiveBackend(),
        clock=lambda: 0.0,
    )
    ok = next(r for r in rows if r["label"] == "ok")
    bad = next(r for r in rows if r["label"] == "bad")
    assert "metrics" in ok
    assert "error" in bad


class _SelectiveBackend(MockBackend):
    def complete(self, request_text):
        user = json.loads(json.loads(request_text)["messages"][1]["content"])
        if user["prompt"] == "x":
            raise SensorTransportError("down")
        return super().complete(request_text)


def test_atomic_snapshot_visibility(workzone):
    # a reader holding the old stack never sees a half-applied prompt
    session = Session(workzone, clock=lambda: 0.0)
    old_stack = session.stack
    session.apply_prompt(BUSY, MockBackend())
    assert session.stack is not old_stack
    assert old_stack.total.values is not session.stack.total.values
