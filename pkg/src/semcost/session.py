"""Operator session: scenario -> (prompt -> sensor -> fusion -> gain and
field rebuild -> plan) loop, with undo and persistence.

Distance fields are computed once at session start and cached; a prompt
only moves posteriors, so applying one costs a gain recompute plus one
weighted field sum. A failed sensor call leaves the session exactly as it
was (the planner then simply keeps using the untouched field).

Persistence stores the prompt log (readings and trust values), not the
posteriors-as-truth: posteriors, history, and the undo stack are rebuilt
by replaying the log, which is bit-deterministic, and the stored posterior
vector is used as an integrity check.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass

from . import bayes_fusion, distance_field, llm_sensor, metrics, planner, potential_field
from .bayes_fusion import BetaState
from .errors import NothingToUndoError, StateFormatError
from .metrics import PathMetrics
from .planner import PlannerParams, PlanResult
from .scenario import Scenario, load_scenario, rasterize, scenario_to_dict, scenario_to_text

STATE_FORMAT = "semcost-session"
STATE_VERSION = 1


@dataclass(frozen=True)
class PromptRecord:
    prompt_id: str
    index: int
    text: str
    trust_n: float
    timestamp: float
    readings: dict[str, float]  # obstacle id -> score actually fused
    clamped: tuple[str, ...]
    posteriors_after: dict[str, float]  # obstacle id -> posterior mean

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "index": self.index,
            "text": self.text,
            "trust_n": self.trust_n,
            "timestamp": self.timestamp,
            "readings": dict(self.readings),
            "clamped": list(self.clamped),
            "posteriors_after": dict(self.posteriors_after),
        }


def prompt_id_for(text: str, index: int) -> str:
    return hashlib.sha256(f"{index}:{text}".encode("utf-8")).hexdigest()[:12]


def _plan_to_dict(result: PlanResult | None) -> dict | None:
    if result is None:
        return None
    return {
        "path": [list(c) for c in result.path],
        "total_cost": result.total_cost,
        "expansions": dict(result.expansions),
        "metrics": metrics.metrics_to_dict(result.metrics),
    }


def _plan_from_dict(doc: dict | None) -> PlanResult | None:
    if doc is None:
        return None
    m = doc.get("metrics")
    return PlanResult(
        path=tuple((int(c), int(r)) for c, r in doc["path"]),
        total_cost=float(doc["total_cost"]),
        expansions=dict(doc["expansions"]),
        metrics=PathMetrics(**m) if m else None,
    )


class Session:
    """Single-writer orchestration state. Mutations swap whole tuples, so a
    reader holding a reference never sees a half-applied prompt."""

    def __init__(self, scenario: Scenario, clock=time.time):
        self.scenario = scenario
        self.grid = rasterize(scenario)
        self._clock = clock
        self.distance_fields = distance_field.all_obstacle_edfs(self.grid)
        self.global_edf = distance_field.global_edf(self.grid, self.distance_fields)
        self.posteriors: tuple[BetaState, ...] = tuple(
            bayes_fusion.reset(scenario.fusion_params) for _ in self.grid.obstacles
        )
        self.history: tuple[tuple[tuple[str, float, float], ...], ...] = tuple(
            () for _ in self.grid.obstacles
        )
        self.prompt_log: tuple[PromptRecord, ...] = ()
        self.last_plan: PlanResult | None = None
        self._undo: list[tuple] = []
        self.stack = potential_field.make_stack(
            self.distance_fields,
            self._gains(),
            width=self.grid.width,
            height=self.grid.height,
        )

    # -- derived values ------------------------------------------------

    def _gains(self) -> tuple[float, ...]:
        return tuple(
            bayes_fusion.effective_gain(state, ob.base_gain)
            for state, ob in zip(self.posteriors, self.grid.obstacles)
        )

    def posterior_means(self) -> dict[str, float]:
        return {
            ob.id: bayes_fusion.posterior_mean(state)
            for ob, state in zip(self.grid.obstacles, self.posteriors)
        }

    @property
    def total_field(self):
        return self.stack.total

    # -- mutations -------------------------------------------------------

    def apply_prompt(self, text: str, backend, trust_n: float | None = None) -> PromptRecord:
        """Query the sensor once and fuse every obstacle's reading. On any
        sensor error the session is left untouched and the error propagates."""
        trust = self.scenario.fusion_params.trust_n if trust_n is None else float(trust_n)
        pid = prompt_id_for(text, len(self.prompt_log))
        query = llm_sensor.SensorQuery(prompt=text, obstacles=self.grid.roster(), prompt_id=pid)
        response = llm_sensor.score_obstacles(query, backend)  # may raise; no state touched yet

        by_id = {r.obstacle_id: r.score for r in response.readings}
        snapshot = (self.posteriors, self.history, self.prompt_log, self.last_plan)
        new_posteriors = tuple(
            bayes_fusion.update(state, by_id[ob.id], trust)
            for state, ob in zip(self.posteriors, self.grid.obstacles)
        )
        new_history = tuple(
            hist + ((pid, state.alpha, state.beta),)
            for hist, state in zip(self.history, new_posteriors)
        )
        record = PromptRecord(
            prompt_id=pid,
            index=len(self.prompt_log),
            text=text,
            trust_n=trust,
            timestamp=float(self._clock()),
            readings={ob.id: by_id[ob.id] for ob in self.grid.obstacles},
            clamped=response.clamped,
            posteriors_after={
                ob.id: bayes_fusion.posterior_mean(state)
                for ob, state in zip(self.grid.obstacles, new_posteriors)
            },
        )
        new_stack = potential_field.make_stack(
            self.distance_fields,
            tuple(
                bayes_fusion.effective_gain(state, ob.base_gain)
                for state, ob in zip(new_posteriors, self.grid.obstacles)
            ),
            width=self.grid.width,
            height=self.grid.height,
        )
        # Commit point: everything above succeeded.
        self._undo.append(snapshot)
        self.posteriors = new_posteriors
        self.history = new_history
        self.prompt_log = self.prompt_log + (record,)
        self.stack = new_stack
        return record

    def replan(self, params: PlannerParams | None = None) -> PlanResult:
        p = params if params is not None else self.scenario.planner_params
        result = planner.plan(
            self.grid,
            self.total_field,
            self.scenario.start_cell,
            self.scenario.goal_cell,
            p,
        )
        result = PlanResult(
            path=result.path,
            total_cost=result.total_cost,
            expansions=result.expansions,
            metrics=metrics.compute_metrics(result.path, self.global_edf, self.scenario.resolution_m),
        )
        self.last_plan = result
        return result

    def undo(self) -> None:
        """Restore the exact state before the last accepted prompt."""
        if not self._undo:
            raise NothingToUndoError("no accepted prompt to undo")
        self.posteriors, self.history, self.prompt_log, self.last_plan = self._undo.pop()
        self.stack = potential_field.make_stack(
            self.distance_fields,
            self._gains(),
            width=self.grid.width,
            height=self.grid.height,
        )

    # -- export / persistence -------------------------------------------

    def snapshot(self) -> dict:
        """Full state dump consumed by the CLI, service, and UI."""
        prev_means: dict[str, float] = {
            ob.id: bayes_fusion.posterior_mean(bayes_fusion.reset(self.scenario.fusion_params))
            for ob in self.grid.obstacles
        }
        log = []
        for rec in self.prompt_log:
            entry = rec.to_dict()
            entry["posterior_delta"] = {
                oid: rec.posteriors_after[oid] - prev_means[oid] for oid in rec.posteriors_after
            }
            prev_means = rec.posteriors_after
            log.append(entry)
        return {
            "scenario": {
                "name": self.scenario.name,
                "width": self.grid.width,
                "height": self.grid.height,
                "resolution_m": self.grid.resolution_m,
                "start_cell": list(self.scenario.start_cell),
                "goal_cell": list(self.scenario.goal_cell),
                "planner": {
                    "w1": self.scenario.planner_params.w1,
                    "w2": self.scenario.planner_params.w2,
                    "gamma": self.scenario.planner_params.gamma,
                    "connectivity": self.scenario.planner_params.connectivity,
                },
                "trust_n": self.scenario.fusion_params.trust_n,
            },
            "obstacles": [
                {
                    "id": ob.id,
                    "family": ob.family,
                    "base_gain": ob.base_gain,
                    "cells": [list(c) for c in ob.cells],
                    "alpha": state.alpha,
                    "beta": state.beta,
                    "mean": bayes_fusion.posterior_mean(state),
                    "effective_gain": bayes_fusion.effective_gain(state, ob.base_gain),
                }
                for ob, state in zip(self.grid.obstacles, self.posteriors)
            ],
            "prompt_log": log,
            "last_plan": _plan_to_dict(self.last_plan),
            "undo_depth": len(self._undo),
        }

    def save_state(self, path) -> None:
        doc = {
            "format": STATE_FORMAT,
            "version": STATE_VERSION,
            "scenario": scenario_to_dict(self.scenario),
            "prompt_log": [rec.to_dict() for rec in self.prompt_log],
            "posteriors": [[s.alpha, s.beta] for s in self.posteriors],
            "last_plan": _plan_to_dict(self.last_plan),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)

    @classmethod
    def load_state(cls, path, clock=time.time) -> "Session":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise StateFormatError(f"corrupt session file {path}: {exc}") from exc
        if doc.get("format") != STATE_FORMAT:
            raise StateFormatError(f"{path} is not a session state file")
        if doc.get("version") != STATE_VERSION:
            raise StateFormatError(
                f"unsupported session state version {doc.get('version')} (expected {STATE_VERSION})"
            )
        scenario = load_scenario(json.dumps(doc["scenario"]))
        session = cls(scenario, clock=clock)
        for entry in doc["prompt_log"]:
            session._replay_record(entry)
        stored = [tuple(p) for p in doc["posteriors"]]
        rebuilt = [(s.alpha, s.beta) for s in session.posteriors]
        if len(stored) != len(rebuilt) or any(
            abs(a - b) > 1e-12 * max(1.0, abs(a)) for (a, _), (b, _) in zip(stored, rebuilt)
        ) or any(abs(a - b) > 1e-12 * max(1.0, abs(a)) for (_, a), (_, b) in zip(stored, rebuilt)):
            raise StateFormatError(f"stored posteriors in {path} do not match the replayed prompt log")
        session.last_plan = _plan_from_dict(doc.get("last_plan"))
        return session

    def _replay_record(self, entry: dict) -> None:
        # Replay a logged prompt without touching a sensor backend.
        snapshot = (self.posteriors, self.history, self.prompt_log, self.last_plan)
        readings = entry["readings"]
        trust = float(entry["trust_n"])
        new_posteriors = tuple(
            bayes_fusion.update(state, float(readings[ob.id]), trust)
            for state, ob in zip(self.posteriors, self.grid.obstacles)
        )
        pid = entry["prompt_id"]
        self._undo.append(snapshot)
        self.history = tuple(
            hist + ((pid, state.alpha, state.beta),)
            for hist, state in zip(self.history, new_posteriors)
        )
        self.posteriors = new_posteriors
        self.prompt_log = self.prompt_log + (
            PromptRecord(
                prompt_id=pid,
                index=int(entry["index"]),
                text=entry["text"],
                trust_n=trust,
                timestamp=float(entry["timestamp"]),
                readings={k: float(v) for k, v in readings.items()},
                clamped=tuple(entry.get("clamped", ())),
                posteriors_after={k: float(v) for k, v in entry["posteriors_after"].items()},
            ),
        )
        self.stack = potential_field.make_stack(
            self.distance_fields,
            self._gains(),
            width=self.grid.width,
            height=self.grid.height,
        )


def replay_posteriors(scenario: Scenario, prompt_log) -> dict[str, BetaState]:
    """Independent replay of a prompt log from fresh priors (used to check
    the stored posteriors really are a pure function of the log)."""
    grid = rasterize(scenario)
    states = {ob.id: bayes_fusion.reset(scenario.fusion_params) for ob in grid.obstacles}
    for rec in prompt_log:
        readings = rec.readings if isinstance(rec, PromptRecord) else rec["readings"]
        trust = rec.trust_n if isinstance(rec, PromptRecord) else float(rec["trust_n"])
        for oid in states:
            states[oid] = bayes_fusion.update(states[oid], float(readings[oid]), trust)
    return states


def compare_runs(
    scenario: Scenario,
    prompt_variants: list,
    backend,
    include_baseline: bool = True,
    clock=time.time,
) -> list[dict]:
    """Independent sessions per prompt variant from identical priors, plus a
    gamma=0 baseline row. A failing variant annotates its row instead of
    aborting the rest."""
    if not prompt_variants:
        raise ValueError("compare_runs needs at least one prompt variant")
    rows = []
    for variant in prompt_variants:
        if isinstance(variant, str):
            label, text = variant, variant
        else:
            label, text = variant["label"], variant["text"]
        row: dict = {"label": label, "prompt": text}
        session = Session(scenario, clock=clock)
        try:
            session.apply_prompt(text, backend)
            result = session.replan()
            row["metrics"] = metrics.metrics_to_dict(result.metrics)
            row["length_cells"] = result.metrics.length_cells
            row["total_cost"] = result.total_cost
            row["posteriors"] = session.posterior_means()
            row["path"] = [list(c) for c in result.path]
        except Exception as exc:  # annotate, keep going
            row["error"] = str(exc)
        rows.append(row)
    if include_baseline:
        base = Session(scenario, clock=clock)
        params = PlannerParams(
            w1=scenario.planner_params.w1,
            w2=scenario.planner_params.w2,
            gamma=0.0,
            connectivity=scenario.planner_params.connectivity,
        )
        row = {"label": "baseline (gamma=0)", "prompt": None}
        try:
            result = base.replan(params)
            row["metrics"] = metrics.metrics_to_dict(result.metrics)
            row["length_cells"] = result.metrics.length_cells
            row["total_cost"] = result.total_cost
            row["posteriors"] = {}
            row["path"] = [list(c) for c in result.path]
        except Exception as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def scenario_text_roundtrip(scenario: Scenario) -> Scenario:
    """Serialize and reload (identity on valid scenarios)."""
    return load_scenario(scenario_to_text(scenario))
