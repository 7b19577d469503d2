"""HTTP service consumed by the operator console.

Endpoints (all JSON):
  POST /sessions {scenario}                     -> {session_id}
  GET  /sessions/{id}                           -> full state snapshot
  POST /sessions/{id}/prompt {text, backend, trust_n?} -> updated snapshot
  POST /sessions/{id}/plan                      -> plan result
  POST /sessions/{id}/undo                      -> snapshot
  GET  /sessions/{id}/field?kind=edf|potential|combined -> flat row-major array
  GET  /sessions/{id}/path                      -> last planned cell sequence

Errors come back as {code, message, detail}. One writer per session: a
per-session lock serializes prompt/plan/undo, readers always see the
latest complete snapshot.
"""
from __future__ import annotations

import json
import os
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import (
    NothingToUndoError,
    ScenarioParseError,
    ScenarioValidationError,
    SemcostError,
    SensorError,
)
from .llm_sensor import MockBackend
from .scenario import load_scenario
from .session import Session

FIELD_KINDS = ("edf", "potential", "combined")


class _SessionBox:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()


def _status_for(exc: SemcostError) -> int:
    if isinstance(exc, (ScenarioParseError, ScenarioValidationError)):
        return 400
    if isinstance(exc, SensorError):
        return 502
    if isinstance(exc, NothingToUndoError):
        return 409
    return 400


def create_app(state_dir=None, backends=None, token=None, ui_dir=None, clock=time.time) -> FastAPI:
    app = FastAPI(title="semcost", version="0.1.0")
    registry: dict[str, _SessionBox] = {}
    registry_lock = threading.Lock()
    backend_map = backends if backends is not None else {"mock": MockBackend()}

    if state_dir:
        os.makedirs(state_dir, exist_ok=True)
        for fname in sorted(os.listdir(state_dir)):
            if fname.endswith(".json"):
                sid = fname[: -len(".json")]
                try:
                    registry[sid] = _SessionBox(Session.load_state(os.path.join(state_dir, fname), clock=clock))
                except SemcostError:
                    continue  # ignore foreign/corrupt files at startup

    def _persist(sid: str, box: _SessionBox) -> None:
        if state_dir:
            box.session.save_state(os.path.join(state_dir, f"{sid}.json"))

    @app.exception_handler(SemcostError)
    async def _semcost_error(_req, exc: SemcostError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    if token:

        @app.middleware("http")
        async def _auth(request: Request, call_next):
            if request.headers.get("authorization") != f"Bearer {token}":
                return JSONResponse(status_code=401, content={"code": "unauthorized", "message": "bad token", "detail": ""})
            return await call_next(request)

    def _not_found(sid: str) -> JSONResponse:
        return JSONResponse(
            status_code=404,
            content={"code": "unknown_session", "message": f"unknown session '{sid}'", "detail": ""},
        )

    @app.post("/sessions")
    async def create_session(body: dict):
        if "scenario" not in body:
            raise ScenarioValidationError("scenario", "request body needs a 'scenario' object")
        scenario = load_scenario(json.dumps(body["scenario"]))
        sid = uuid.uuid4().hex[:12]
        box = _SessionBox(Session(scenario, clock=clock))
        with registry_lock:
            registry[sid] = box
        _persist(sid, box)
        return {"session_id": sid}

    @app.get("/sessions/{sid}")
    async def get_session(sid: str):
        with registry_lock:
            box = registry.get(sid)
        if box is None:
            return _not_found(sid)
        snap = box.session.snapshot()
        snap["session_id"] = sid
        return snap

    @app.post("/sessions/{sid}/prompt")
    async def post_prompt(sid: str, body: dict):
        with registry_lock:
            box = registry.get(sid)
        if box is None:
            return _not_found(sid)
        text = body.get("text")
        if not text or not isinstance(text, str):
            raise SemcostError("prompt body needs non-empty 'text'")
        backend_name = body.get("backend", "mock")
        backend = backend_map.get(backend_name)
        if backend is None:
            raise SemcostError(f"backend '{backend_name}' is not configured on this server")
        trust = body.get("trust_n")
        with box.lock:
            box.session.apply_prompt(text, backend, trust_n=trust)
            _persist(sid, box)
            snap = box.session.snapshot()
        snap["session_id"] = sid
        return snap

    @app.post("/sessions/{sid}/plan")
    async def post_plan(sid: str):
        with registry_lock:
            box = registry.get(sid)
        if box is None:
            return _not_found(sid)
        with box.lock:
            result = box.session.replan()
            _persist(sid, box)
        return {
            "path": [list(c) for c in result.path],
            "total_cost": result.total_cost,
            "expansions": result.expansions,
            "metrics": {
                "length_cells": result.metrics.length_cells,
                "length_m": result.metrics.length_m,
                "min_obstacle_dist_m": result.metrics.min_obstacle_dist_m,
                "avg_obstacle_dist_m": result.metrics.avg_obstacle_dist_m,
            },
        }

    @app.post("/sessions/{sid}/undo")
    async def post_undo(sid: str):
        with registry_lock:
            box = registry.get(sid)
        if box is None:
            return _not_found(sid)
        with box.lock:
            box.session.undo()
            _persist(sid, box)
            snap = box.session.snapshot()
        snap["session_id"] = sid
        return snap

    @app.get("/sessions/{sid}/field")
    async def get_field(sid: str, kind: str = "potential"):
        with registry_lock:
            box = registry.get(sid)
        if box is None:
            return _not_found(sid)
        if kind not in FIELD_KINDS:
            raise SemcostError(f"unknown field kind '{kind}' (have {', '.join(FIELD_KINDS)})")
        session = box.session
        if kind == "edf":
            values = session.global_edf.values
        elif kind == "potential":
            values = session.total_field.values
        else:
            # distance-to-goal plus weighted repulsion: the surface the
            # planner effectively descends
            goal = session.scenario.goal_cell
            h, w = session.grid.height, session.grid.width
            yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
            dist = np.sqrt((xx - goal[0]) ** 2 + (yy - goal[1]) ** 2)
            values = dist + session.scenario.planner_params.gamma * session.total_field.values
        flat = [None if not np.isfinite(v) else float(v) for v in values.ravel()]
        return {
            "kind": kind,
            "width": session.grid.width,
            "height": session.grid.height,
            "resolution_m": session.grid.resolution_m,
            "values": flat,
        }

    @app.get("/sessions/{sid}/path")
    async def get_path(sid: str):
        with registry_lock:
            box = registry.get(sid)
        if box is None:
            return _not_found(sid)
        plan = box.session.last_plan
        if plan is None:
            return {"cells": [], "total_cost": None}
        return {"cells": [list(c) for c in plan.path], "total_cost": plan.total_cost}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


__all__ = ["create_app", "FIELD_KINDS"]
