"""Two-queue multi-heuristic grid search.

Edge cost is step length plus gamma times the potential at the arrival
node (the start cell's potential is never charged). The anchor queue is
keyed by g + w1 * euclidean-to-goal, the informed queue by g + w1 *
potential; informed expansions are allowed while their key stays within a
factor w2 of the anchor key, which keeps the returned cost within
max(1, w1) * w2 of optimal.

Determinism contract: equal keys break by larger g first, then row-major
cell order; neighbor relaxation order is fixed (see kernels.pure.MOVES_8).
Occupied cells are hard-blocked, not merely expensive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from . import kernels
from .errors import NoPathError, PlannerError

if TYPE_CHECKING:
    from .distance_field import ScalarField
    from .metrics import PathMetrics
    from .scenario import Cell, SemanticGrid

ANCHOR = "anchor"
INFORMED = "informed"


@dataclass(frozen=True)
class PlannerParams:
    w1: float = 1.0
    w2: float = 1.0
    gamma: float = 1.0
    connectivity: int = 8

    def __post_init__(self):
        if not self.w1 > 0:
            raise ValueError("planner.w1 must be > 0")
        if not self.w2 >= 1:
            raise ValueError("planner.w2 must be >= 1")
        if not self.gamma >= 0:
            raise ValueError("planner.gamma must be >= 0")
        if self.connectivity not in (4, 8):
            raise ValueError("planner.connectivity must be 4 or 8")

    def suboptimality_bound(self) -> float:
        return max(1.0, self.w1) * self.w2


@dataclass(frozen=True)
class SearchNode:
    cell: "Cell"
    g: float
    parent: "Cell | None"
    h0: float  # euclidean distance to goal, cell-lengths
    h1: float  # potential at the cell


@dataclass(frozen=True)
class PlanResult:
    path: tuple["Cell", ...]
    total_cost: float
    expansions: dict = field(default_factory=dict)
    metrics: "PathMetrics | None" = None


def key(node: SearchNode, queue: str, params: PlannerParams) -> float:
    """Priority of a node in one queue: g + w1 * (h0 or h1)."""
    if queue == ANCHOR:
        return node.g + params.w1 * node.h0
    if queue == INFORMED:
        return node.g + params.w1 * node.h1
    raise PlannerError(f"unknown queue '{queue}'")


def reconstruct_path(parents: Mapping["Cell", "Cell | None"], goal: "Cell") -> list["Cell"]:
    """Walk the parent chain goal -> start and reverse it."""
    path = [goal]
    cur = goal
    for _ in range(len(parents) + 1):
        nxt = parents.get(cur, "missing")
        if nxt == "missing":
            raise PlannerError(f"broken parent chain at {cur}")
        if nxt is None:
            path.reverse()
            return path
        cur = nxt
        path.append(cur)
    raise PlannerError("parent chain does not terminate (cycle?)")


def plan(
    grid: "SemanticGrid",
    potential: "ScalarField",
    start: "Cell",
    goal: "Cell",
    params: PlannerParams,
) -> PlanResult:
    """Search from start to goal over the grid under the given potential."""
    if (potential.width, potential.height) != (grid.width, grid.height):
        raise PlannerError(
            f"potential field {potential.width}x{potential.height} does not match grid {grid.width}x{grid.height}"
        )
    for label, cell in (("start", start), ("goal", goal)):
        if not grid.in_bounds(cell):
            raise PlannerError(f"{label} cell {list(cell)} outside the grid")
        if not grid.is_free(cell):
            raise PlannerError(f"{label} cell {list(cell)} is occupied")
    if start == goal:
        return PlanResult(path=(start,), total_cost=0.0, expansions={"anchor_count": 0, "informed_count": 0})

    w = grid.width
    start_idx = start[1] * w + start[0]
    goal_idx = goal[1] * w + goal[0]
    occ = np.ascontiguousarray(grid.occupancy(), dtype=np.uint8)
    pot = np.ascontiguousarray(potential.values, dtype=np.float64)
    found, g_goal, parents, exp_anchor, exp_informed = kernels.mha_search(
        occ, pot, start_idx, goal_idx, params.w1, params.w2, params.gamma, params.connectivity
    )
    expansions = {"anchor_count": int(exp_anchor), "informed_count": int(exp_informed)}
    if not found:
        raise NoPathError(f"no path from {list(start)} to {list(goal)}", expansions=expansions)

    cells = []
    idx = goal_idx
    for _ in range(w * grid.height + 1):
        cells.append((idx % w, idx // w))
        if idx == start_idx:
            break
        idx = int(parents[idx])
        if idx < 0:
            raise PlannerError("broken parent chain in search result")
    else:
        raise PlannerError("parent chain does not terminate (cycle?)")
    cells.reverse()
    return PlanResult(path=tuple(cells), total_cost=float(g_goal), expansions=expansions)


def euclid(a: "Cell", b: "Cell") -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)
