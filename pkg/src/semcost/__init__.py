"""Danger-aware grid path planning with a language-model danger sensor.

Pipeline: scenario file -> semantic occupancy grid -> cached per-obstacle
Euclidean distance fields -> gain-weighted repulsive potential -> two-queue
multi-heuristic search. Natural-language prompts move the gains through
closed-form Beta-Bernoulli updates; everything else stays fixed.
"""
from .bayes_fusion import BetaState, DangerReading, FusionParams
from .distance_field import ScalarField, all_obstacle_edfs, global_edf, per_obstacle_edf
from .errors import SemcostError
from .llm_sensor import (
    FixtureBackend,
    HttpBackend,
    MockBackend,
    SensorQuery,
    SensorResponse,
    score_obstacles,
)
from .metrics import PathMetrics, compute_metrics
from .planner import PlannerParams, PlanResult, plan
from .potential_field import PotentialStack, make_stack, repulsive_field, total_field, with_gains
from .scenario import Scenario, SemanticGrid, load_scenario, load_scenario_file, rasterize
from .session import Session, compare_runs

__version__ = "0.1.0"

__all__ = [
    "BetaState",
    "DangerReading",
    "FusionParams",
    "ScalarField",
    "SemcostError",
    "Scenario",
    "SemanticGrid",
    "SensorQuery",
    "SensorResponse",
    "PathMetrics",
    "PlannerParams",
    "PlanResult",
    "PotentialStack",
    "Session",
    "MockBackend",
    "FixtureBackend",
    "HttpBackend",
    "all_obstacle_edfs",
    "compare_runs",
    "compute_metrics",
    "global_edf",
    "load_scenario",
    "load_scenario_file",
    "make_stack",
    "per_obstacle_edf",
    "plan",
    "rasterize",
    "repulsive_field",
    "score_obstacles",
    "total_field",
    "with_gains",
    "__version__",
]
