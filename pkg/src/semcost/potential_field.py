"""Repulsive potentials: gain * exp(-distance), summed across obstacles.

Geometry (the cached distance fields) never changes after rasterization;
prompt-driven fusion only moves the gains, so a total-field rebuild is one
weighted sum over cached fields.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance_field import ScalarField
from .errors import FieldError


@dataclass(frozen=True, eq=False)
class PotentialStack:
    per_obstacle_distance: tuple[ScalarField, ...]
    gains: tuple[float, ...]
    total: ScalarField


def repulsive_field(distance: ScalarField, gain: float) -> ScalarField:
    """Pointwise gain * exp(-D): gain on the obstacle itself, decaying out."""
    if gain < 0:
        raise FieldError(f"repulsive gain {gain} must be >= 0")
    values = gain * np.exp(-distance.values)
    return ScalarField(width=distance.width, height=distance.height, values=values)


def total_field(
    distance_fields: tuple[ScalarField, ...],
    gains: tuple[float, ...],
    width: int | None = None,
    height: int | None = None,
) -> ScalarField:
    """Gain-weighted sum of per-obstacle repulsive terms.

    width/height are only needed for the zero-obstacle case, where the total
    is identically zero.
    """
    if len(distance_fields) != len(gains):
        raise FieldError(f"{len(gains)} gains for {len(distance_fields)} distance fields")
    if not distance_fields:
        if width is None or height is None:
            raise FieldError("zero-obstacle total field needs explicit dimensions")
        return ScalarField(width=width, height=height, values=np.zeros((height, width)))
    w, h = distance_fields[0].width, distance_fields[0].height
    acc = np.zeros((h, w))
    for fld, gain in zip(distance_fields, gains):
        if (fld.width, fld.height) != (w, h):
            raise FieldError(f"distance field {fld.width}x{fld.height} does not match {w}x{h}")
        if gain < 0:
            raise FieldError(f"repulsive gain {gain} must be >= 0")
        acc += gain * np.exp(-fld.values)
    return ScalarField(width=w, height=h, values=acc)


def make_stack(
    distance_fields: tuple[ScalarField, ...],
    gains: tuple[float, ...],
    width: int | None = None,
    height: int | None = None,
) -> PotentialStack:
    return PotentialStack(
        per_obstacle_distance=tuple(distance_fields),
        gains=tuple(float(g) for g in gains),
        total=total_field(tuple(distance_fields), tuple(gains), width=width, height=height),
    )


def with_gains(stack: PotentialStack, gains: tuple[float, ...]) -> PotentialStack:
    """Rebuild the total from the cached distances under new gains."""
    return make_stack(
        stack.per_obstacle_distance,
        gains,
        width=stack.total.width,
        height=stack.total.height,
    )
