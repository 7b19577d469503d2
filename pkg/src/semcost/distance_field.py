"""Exact Euclidean distance fields over the grid.

Distances are measured between cell centers, in cell-lengths; multiply by
resolution_m for meters. Per-obstacle fields are exact (squared distance
transform), so they match a brute-force min-over-cells oracle to the last
ulp of the final sqrt.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import FieldError
from .scenario import SemanticGrid

# Distances at or above this are treated as "no obstacle anywhere".
UNBOUNDED = np.inf


@dataclass(frozen=True, eq=False)
class ScalarField:
    width: int
    height: int
    values: np.ndarray  # (height, width) float64

    def __post_init__(self):
        if self.values.shape != (self.height, self.width):
            raise FieldError(
                f"field values shape {self.values.shape} does not match {self.height}x{self.width}"
            )
        self.values.setflags(write=False)

    @property
    def is_unbounded(self) -> bool:
        return bool(np.isinf(self.values).any())

    def at(self, cell) -> float:
        c, r = cell
        return float(self.values[r, c])

    def flat_values(self) -> list[float]:
        """Row-major dump (row 0 = bottom row) for exports and golden tests."""
        return [float(v) for v in self.values.ravel()]

    def to_dict(self) -> dict:
        return {"width": self.width, "height": self.height, "values": self.flat_values()}


def _field_from_mask(mask: np.ndarray, width: int, height: int) -> ScalarField:
    sq = kernels.edt_squared(np.ascontiguousarray(mask, dtype=np.uint8))
    values = np.sqrt(sq)
    return ScalarField(width=width, height=height, values=values)


def per_obstacle_edf(grid: SemanticGrid, obstacle_index: int) -> ScalarField:
    """Distance to the nearest cell of one obstacle, zero on its own cells."""
    if not 0 <= obstacle_index < len(grid.obstacles):
        raise FieldError(f"obstacle index {obstacle_index} out of range")
    ob = grid.obstacles[obstacle_index]
    if not ob.cells:
        raise FieldError(f"obstacle '{ob.id}' has no cells")
    return _field_from_mask(grid.obstacle_mask(obstacle_index), grid.width, grid.height)


def all_obstacle_edfs(grid: SemanticGrid) -> tuple[ScalarField, ...]:
    return tuple(per_obstacle_edf(grid, i) for i in range(len(grid.obstacles)))


def global_edf(grid: SemanticGrid, per_obstacle: tuple[ScalarField, ...] | None = None) -> ScalarField:
    """Pointwise minimum over per-obstacle fields.

    With zero obstacles this returns an all-unbounded sentinel field instead
    of raising; metric consumers must check ``is_unbounded``.
    """
    if per_obstacle is None:
        per_obstacle = all_obstacle_edfs(grid)
    if not per_obstacle:
        values = np.full((grid.height, grid.width), UNBOUNDED)
        return ScalarField(width=grid.width, height=grid.height, values=values)
    values = np.minimum.reduce([f.values for f in per_obstacle])
    return ScalarField(width=grid.width, height=grid.height, values=values.copy())
