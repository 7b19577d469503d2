"""Scenario files and their rasterization into a semantic occupancy grid.

Coordinates are (col, row) with the origin at the map's lower-left corner.
Footprints are declared in meters; planning happens on cells. Cell (c, r)
has its center at ((c + 0.5) * resolution_m, (r + 0.5) * resolution_m).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bayes_fusion import FusionParams
from .errors import ScenarioParseError, ScenarioValidationError
from .planner import PlannerParams

FREE = -1

Cell = tuple[int, int]

_TOP_KEYS = {
    "name",
    "resolution_m",
    "width_cells",
    "height_cells",
    "start_cell",
    "goal_cell",
    "obstacles",
    "planner",
    "fusion",
}
_OBSTACLE_KEYS = {"id", "family", "base_gain", "rect_m", "cells"}
_PLANNER_KEYS = {"w1", "w2", "gamma", "connectivity"}
_FUSION_KEYS = {"trust_n", "prior_alpha", "prior_beta"}


@dataclass(frozen=True)
class ObstacleSpec:
    id: str
    family: str
    base_gain: float = 1.0
    rect_m: tuple[float, float, float, float] | None = None
    cells: tuple[Cell, ...] | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    resolution_m: float
    width_cells: int
    height_cells: int
    start_cell: Cell
    goal_cell: Cell
    obstacles: tuple[ObstacleSpec, ...]
    planner_params: PlannerParams = field(default_factory=PlannerParams)
    fusion_params: FusionParams = field(default_factory=FusionParams)


@dataclass(frozen=True)
class Obstacle:
    """Rasterized map element: identity plus the cell set it occupies."""

    id: str
    family: str
    cells: tuple[Cell, ...]
    base_gain: float


@dataclass(frozen=True, eq=False)
class SemanticGrid:
    width: int
    height: int
    resolution_m: float
    cell_owner: np.ndarray  # (height, width) int16, FREE or obstacle index
    obstacles: tuple[Obstacle, ...]

    def occupancy(self) -> np.ndarray:
        """Boolean (height, width) array, True where any obstacle sits."""
        return self.cell_owner >= 0

    def in_bounds(self, cell: Cell) -> bool:
        c, r = cell
        return 0 <= c < self.width and 0 <= r < self.height

    def is_free(self, cell: Cell) -> bool:
        c, r = cell
        return self.cell_owner[r, c] == FREE

    def obstacle_mask(self, index: int) -> np.ndarray:
        mask = np.zeros((self.height, self.width), dtype=np.uint8)
        for c, r in self.obstacles[index].cells:
            mask[r, c] = 1
        return mask

    def roster(self) -> tuple[tuple[str, str], ...]:
        """(id, family) pairs in declaration order, for sensor queries."""
        return tuple((ob.id, ob.family) for ob in self.obstacles)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "resolution_m": self.resolution_m,
            "cell_owner": [int(v) for v in self.cell_owner.ravel()],
            "obstacles": [
                {
                    "id": ob.id,
                    "family": ob.family,
                    "base_gain": ob.base_gain,
                    "cells": [list(c) for c in ob.cells],
                }
                for ob in self.obstacles
            ],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _expect_keys(obj: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioValidationError(f"{path}.{unknown[0]}", f"unknown key '{unknown[0]}' in {path}")


def _get(obj: dict, key: str, path: str):
    if key not in obj:
        raise ScenarioValidationError(f"{path}.{key}", f"missing required key '{key}'")
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioValidationError(path, f"{path} must be a number")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioValidationError(path, f"{path} must be an integer")
    return value


def _cell(value, path: str) -> Cell:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioValidationError(path, f"{path} must be [col, row]")
    return (_integer(value[0], f"{path}[0]"), _integer(value[1], f"{path}[1]"))


def _parse_obstacle(obj, index: int) -> ObstacleSpec:
    path = f"obstacles[{index}]"
    if not isinstance(obj, dict):
        raise ScenarioValidationError(path, f"{path} must be an object")
    _expect_keys(obj, _OBSTACLE_KEYS, path)
    oid = _get(obj, "id", path)
    if not isinstance(oid, str) or not oid:
        raise ScenarioValidationError(f"{path}.id", f"{path}.id must be a non-empty string")
    family = _get(obj, "family", path)
    if not isinstance(family, str):
        raise ScenarioValidationError(f"{path}.family", f"{path}.family must be a string")
    base_gain = _number(obj.get("base_gain", 1.0), f"{path}.base_gain")
    if base_gain < 0:
        raise ScenarioValidationError(f"{path}.base_gain", f"{path}.base_gain must be >= 0")
    has_rect = "rect_m" in obj
    has_cells = "cells" in obj
    if has_rect == has_cells:
        raise ScenarioValidationError(path, f"{path} needs exactly one of 'rect_m' or 'cells'")
    rect = None
    cells = None
    if has_rect:
        raw = obj["rect_m"]
        if not isinstance(raw, (list, tuple)) or len(raw) != 4:
            raise ScenarioValidationError(f"{path}.rect_m", f"{path}.rect_m must be [x0, y0, x1, y1]")
        rect = tuple(_number(v, f"{path}.rect_m[{i}]") for i, v in enumerate(raw))
    else:
        raw = obj["cells"]
        if not isinstance(raw, list) or not raw:
            raise ScenarioValidationError(f"{path}.cells", f"{path}.cells must be a non-empty list")
        seen = []
        for j, item in enumerate(raw):
            cell = _cell(item, f"{path}.cells[{j}]")
            if cell not in seen:
                seen.append(cell)
        cells = tuple(seen)
    return ObstacleSpec(id=oid, family=family, base_gain=base_gain, rect_m=rect, cells=cells)


def load_scenario(source_text: str) -> Scenario:
    """Parse and validate scenario markup (strict: unknown keys rejected)."""
    try:
        doc = json.loads(source_text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"malformed scenario text: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario root must be an object")
    _expect_keys(doc, _TOP_KEYS, "scenario")

    name = _get(doc, "name", "scenario")
    if not isinstance(name, str):
        raise ScenarioValidationError("name", "name must be a string")
    resolution = _number(_get(doc, "resolution_m", "scenario"), "resolution_m")
    if resolution <= 0:
        raise ScenarioValidationError("resolution_m", "resolution_m must be > 0")
    width = _integer(_get(doc, "width_cells", "scenario"), "width_cells")
    height = _integer(_get(doc, "height_cells", "scenario"), "height_cells")
    if width < 2:
        raise ScenarioValidationError("width_cells", "width_cells must be >= 2")
    if height < 2:
        raise ScenarioValidationError("height_cells", "height_cells must be >= 2")
    start = _cell(_get(doc, "start_cell", "scenario"), "start_cell")
    goal = _cell(_get(doc, "goal_cell", "scenario"), "goal_cell")
    for label, cell in (("start_cell", start), ("goal_cell", goal)):
        c, r = cell
        if not (0 <= c < width and 0 <= r < height):
            raise ScenarioValidationError(label, f"{label} {list(cell)} outside {width}x{height} grid")

    raw_obstacles = _get(doc, "obstacles", "scenario")
    if not isinstance(raw_obstacles, list):
        raise ScenarioValidationError("obstacles", "obstacles must be a list")
    obstacles = tuple(_parse_obstacle(o, i) for i, o in enumerate(raw_obstacles))
    seen_ids: set[str] = set()
    for i, ob in enumerate(obstacles):
        if ob.id in seen_ids:
            raise ScenarioValidationError(f"obstacles[{i}].id", f"duplicate obstacle id '{ob.id}'")
        seen_ids.add(ob.id)
        if ob.cells is not None:
            for j, (c, r) in enumerate(ob.cells):
                if not (0 <= c < width and 0 <= r < height):
                    raise ScenarioValidationError(
                        f"obstacles[{i}].cells[{j}]",
                        f"cell [{c}, {r}] of obstacle '{ob.id}' outside {width}x{height} grid",
                    )

    planner_doc = doc.get("planner", {})
    if not isinstance(planner_doc, dict):
        raise ScenarioValidationError("planner", "planner must be an object")
    _expect_keys(planner_doc, _PLANNER_KEYS, "planner")
    try:
        planner_params = PlannerParams(
            w1=_number(planner_doc.get("w1", 1.0), "planner.w1"),
            w2=_number(planner_doc.get("w2", 1.0), "planner.w2"),
            gamma=_number(planner_doc.get("gamma", 1.0), "planner.gamma"),
            connectivity=_integer(planner_doc.get("connectivity", 8), "planner.connectivity"),
        )
    except ValueError as exc:
        raise ScenarioValidationError("planner", str(exc)) from exc

    fusion_doc = doc.get("fusion", {})
    if not isinstance(fusion_doc, dict):
        raise ScenarioValidationError("fusion", "fusion must be an object")
    _expect_keys(fusion_doc, _FUSION_KEYS, "fusion")
    try:
        fusion_params = FusionParams(
            trust_n=_number(fusion_doc.get("trust_n", 5.0), "fusion.trust_n"),
            prior_alpha=_number(fusion_doc.get("prior_alpha", 1.0), "fusion.prior_alpha"),
            prior_beta=_number(fusion_doc.get("prior_beta", 1.0), "fusion.prior_beta"),
        )
    except ValueError as exc:
        raise ScenarioValidationError("fusion", str(exc)) from exc

    return Scenario(
        name=name,
        resolution_m=resolution,
        width_cells=width,
        height_cells=height,
        start_cell=start,
        goal_cell=goal,
        obstacles=obstacles,
        planner_params=planner_params,
        fusion_params=fusion_params,
    )


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def scenario_to_dict(scenario: Scenario) -> dict:
    out: dict = {
        "name": scenario.name,
        "resolution_m": scenario.resolution_m,
        "width_cells": scenario.width_cells,
        "height_cells": scenario.height_cells,
        "start_cell": list(scenario.start_cell),
        "goal_cell": list(scenario.goal_cell),
        "obstacles": [],
        "planner": {
            "w1": scenario.planner_params.w1,
            "w2": scenario.planner_params.w2,
            "gamma": scenario.planner_params.gamma,
            "connectivity": scenario.planner_params.connectivity,
        },
        "fusion": {
            "trust_n": scenario.fusion_params.trust_n,
            "prior_alpha": scenario.fusion_params.prior_alpha,
            "prior_beta": scenario.fusion_params.prior_beta,
        },
    }
    for ob in scenario.obstacles:
        entry: dict = {"id": ob.id, "family": ob.family, "base_gain": ob.base_gain}
        if ob.rect_m is not None:
            entry["rect_m"] = list(ob.rect_m)
        else:
            entry["cells"] = [list(c) for c in ob.cells]
        out["obstacles"].append(entry)
    return out


def scenario_to_text(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2)


def _rect_cells(scenario: Scenario, rect: tuple[float, float, float, float]) -> list[Cell]:
    # Cell-center containment in the closed rectangle, row-major order.
    x0, y0, x1, y1 = rect
    res = scenario.resolution_m
    centers_x = (np.arange(scenario.width_cells) + 0.5) * res
    centers_y = (np.arange(scenario.height_cells) + 0.5) * res
    cols = np.nonzero((centers_x >= x0) & (centers_x <= x1))[0]
    rows = np.nonzero((centers_y >= y0) & (centers_y <= y1))[0]
    return [(int(c), int(r)) for r in rows for c in cols]


def rasterize(scenario: Scenario) -> SemanticGrid:
    """Burn obstacle footprints into the owner grid; later obstacles win
    overlaps."""
    owner = np.full((scenario.height_cells, scenario.width_cells), FREE, dtype=np.int16)
    obstacles = []
    for i, spec in enumerate(scenario.obstacles):
        if spec.rect_m is not None:
            cells = _rect_cells(scenario, spec.rect_m)
            if not cells:
                raise ScenarioValidationError(
                    f"obstacles[{i}].rect_m",
                    f"footprint of obstacle '{spec.id}' rasterizes to zero cells",
                )
        else:
            cells = list(spec.cells)
        for c, r in cells:
            owner[r, c] = i
        obstacles.append(Obstacle(id=spec.id, family=spec.family, cells=tuple(cells), base_gain=spec.base_gain))
    owner.setflags(write=False)
    return SemanticGrid(
        width=scenario.width_cells,
        height=scenario.height_cells,
        resolution_m=scenario.resolution_m,
        cell_owner=owner,
        obstacles=tuple(obstacles),
    )
