"""Command-line front end.

Subcommands: plan, prompt, compare, ablate, sweep, serve. Scenario
arguments accept either a file path or a bundled scenario name
(workzone, mep, cement).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import data, llm_sensor, metrics
from .errors import SemcostError
from .llm_sensor import FixtureBackend, HttpBackend, JitterBackend, MockBackend
from .planner import PlannerParams
from .scenario import Scenario, load_scenario, load_scenario_file
from .session import Session, compare_runs


def _load(scenario_arg: str) -> Scenario:
    if os.path.exists(scenario_arg):
        return load_scenario_file(scenario_arg)
    if scenario_arg in data.BUILTIN_SCENARIOS:
        return load_scenario(data.scenario_text(scenario_arg))
    raise SemcostError(
        f"scenario '{scenario_arg}' is neither a file nor a bundled name ({', '.join(data.BUILTIN_SCENARIOS)})"
    )


def _backend(args):
    kind = getattr(args, "backend", "mock")
    if kind == "mock":
        backend = MockBackend()
        noise = getattr(args, "noise", None)
        if noise:
            backend = JitterBackend(backend, width=float(noise), seed=getattr(args, "seed", 0))
        return backend
    if kind == "fixture":
        path = getattr(args, "fixtures", None)
        if not path:
            raise SemcostError("--fixtures FILE is required with the fixture backend")
        return FixtureBackend.from_file(path)
    if kind == "http":
        base_url = getattr(args, "llm_base_url", None) or os.environ.get("SEMCOST_LLM_BASE_URL")
        model = getattr(args, "llm_model", None) or os.environ.get("SEMCOST_LLM_MODEL")
        if not base_url or not model:
            raise SemcostError("http backend needs --llm-base-url and --llm-model (or the matching env vars)")
        return HttpBackend(base_url=base_url, model=model)
    raise SemcostError(f"unknown backend '{kind}'")


def _planner_override(scenario: Scenario, args) -> PlannerParams:
    p = scenario.planner_params
    return PlannerParams(
        w1=p.w1 if args.w1 is None else args.w1,
        w2=p.w2 if args.w2 is None else args.w2,
        gamma=p.gamma if args.gamma is None else args.gamma,
        connectivity=p.connectivity,
    )


def _print_plan(session: Session, result, as_json: bool) -> None:
    if as_json:
        out = {
            "path": [list(c) for c in result.path],
            "total_cost": result.total_cost,
            "expansions": result.expansions,
            "metrics": metrics.metrics_to_dict(result.metrics),
            "posteriors": session.posterior_means(),
        }
        print(json.dumps(out, indent=2))
        return
    m = result.metrics
    print(f"path cells: {len(result.path)}  cost: {result.total_cost:.4f}")
    print(f"length: {m.length_cells:.3f} cells / {m.length_m:.3f} m")
    if m.min_obstacle_dist_m is None:
        print("obstacle distance: n/a (no obstacles)")
    else:
        print(f"min obstacle dist: {m.min_obstacle_dist_m:.3f} m   avg: {m.avg_obstacle_dist_m:.3f} m")
    print(f"expansions: {result.expansions}")


def cmd_plan(args) -> int:
    scenario = _load(args.scenario)
    session = Session(scenario)
    result = session.replan(_planner_override(scenario, args))
    _print_plan(session, result, args.json)
    return 0


def cmd_prompt(args) -> int:
    scenario = _load(args.scenario)
    session = Session(scenario)
    backend = _backend(args)
    record = session.apply_prompt(args.text, backend, trust_n=args.trust)
    result = session.replan()
    if args.json:
        out = {
            "prompt": record.to_dict(),
            "plan": {
                "total_cost": result.total_cost,
                "metrics": metrics.metrics_to_dict(result.metrics),
            },
            "posteriors": session.posterior_means(),
        }
        print(json.dumps(out, indent=2))
        return 0
    row = {
        "label": "prompt",
        "metrics": metrics.metrics_to_dict(result.metrics),
        "posteriors": session.posterior_means(),
    }
    print(metrics.comparison_table([row]))
    return 0


def cmd_compare(args) -> int:
    scenario = _load(args.scenario)
    with open(args.prompts, encoding="utf-8") as fh:
        doc = json.load(fh)
    variants = []
    for i, entry in enumerate(doc):
        if isinstance(entry, str):
            variants.append({"label": f"variant {i}", "text": entry})
        else:
            variants.append({"label": entry["label"], "text": entry["text"]})
    rows = compare_runs(scenario, variants, _backend(args))
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(metrics.comparison_table(rows))
    return 0


def cmd_ablate(args) -> int:
    scenario = _load(args.scenario)
    from .scenario import rasterize

    grid = rasterize(scenario)
    query = llm_sensor.SensorQuery(prompt=args.text, obstacles=grid.roster())
    stats = llm_sensor.ablation_run(query, _backend(args), runs=args.runs, fusion=scenario.fusion_params)
    print(json.dumps({"runs": args.runs, "posterior_stats": stats}, indent=2))
    return 0


def cmd_sweep(args) -> int:
    scenario = _load(args.scenario)
    from .scenario import rasterize

    grid = rasterize(scenario)
    n_values = [float(v) for v in args.n_values.split(",")]
    query = llm_sensor.SensorQuery(prompt=args.text, obstacles=grid.roster())
    curves = llm_sensor.trust_sweep(query, _backend(args), n_values, scenario.fusion_params)
    print(json.dumps({"n_values": n_values, "curves": curves}, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    backends = {"mock": MockBackend()}
    if args.fixtures:
        backends["fixture"] = FixtureBackend.from_file(args.fixtures)
    if args.llm_base_url and args.llm_model:
        backends["http"] = HttpBackend(base_url=args.llm_base_url, model=args.llm_model)
    app = create_app(state_dir=args.state_dir, backends=backends, token=args.token, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semcost", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="one-shot plan + metrics")
    p.add_argument("--scenario", required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--w1", type=float, default=None)
    p.add_argument("--w2", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("prompt", help="apply one prompt, replan, print a table row")
    p.add_argument("--scenario", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--backend", choices=["mock", "fixture", "http"], default="mock")
    p.add_argument("--trust", type=float, default=None)
    p.add_argument("--fixtures")
    p.add_argument("--llm-base-url")
    p.add_argument("--llm-model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("compare", help="compare prompt variants plus a gamma=0 baseline")
    p.add_argument("--scenario", required=True)
    p.add_argument("--prompts", required=True, help="JSON list of strings or {label, text}")
    p.add_argument("--backend", choices=["mock", "fixture", "http"], default="mock")
    p.add_argument("--fixtures")
    p.add_argument("--llm-base-url")
    p.add_argument("--llm-model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("ablate", help="posterior mean/std statistics over repeated runs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--backend", choices=["mock", "fixture", "http"], default="mock")
    p.add_argument("--noise", type=float, default=None, help="uniform half-width added to mock scores")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixtures")
    p.add_argument("--llm-base-url")
    p.add_argument("--llm-model")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="posterior mean vs trust knob")
    p.add_argument("--scenario", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--n-values", required=True, help="comma-separated list, e.g. 0,1,5,50")
    p.add_argument("--backend", choices=["mock", "fixture", "http"], default="mock")
    p.add_argument("--fixtures")
    p.add_argument("--llm-base-url")
    p.add_argument("--llm-model")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--state-dir", default=None)
    p.add_argument("--fixtures")
    p.add_argument("--llm-base-url")
    p.add_argument("--llm-model")
    p.add_argument("--token", default=None, help="require this bearer token on every request")
    p.add_argument("--ui", default=None, help="serve a built web console from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SemcostError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
