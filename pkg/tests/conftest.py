from __future__ import annotations

import json
import random

import numpy as np
import pytest

from semcost import data, load_scenario
from semcost.scenario import rasterize


def make_scenario(
    width=16,
    height=16,
    obstacles=None,
    start=(0, 0),
    goal=None,
    resolution=0.1,
    planner=None,
    fusion=None,
    name="test",
):
    """Scenario builder for tests; obstacles as dicts with rect_m or cells."""
    doc = {
        "name": name,
        "resolution_m": resolution,
        "width_cells": width,
        "height_cells": height,
        "start_cell": list(start),
        "goal_cell": list(goal if goal is not None else (width - 1, height - 1)),
        "obstacles": obstacles or [],
    }
    if planner:
        doc["planner"] = planner
    if fusion:
        doc["fusion"] = fusion
    return load_scenario(json.dumps(doc))


def random_cells(rng: random.Random, width: int, height: int, count: int, exclude=()):
    cells = set()
    excluded = set(exclude)
    while len(cells) < count:
        cell = (rng.randrange(width), rng.randrange(height))
        if cell not in excluded:
            cells.add(cell)
    return sorted(cells)


def random_instance(rng: random.Random, size=32, max_rects=4, gains=(0.2, 3.0)):
    """Random occupancy + potential pair for planner tests: returns
    (occ uint8 (size,size), pot float64, start, goal) with free endpoints."""
    occ = np.zeros((size, size), dtype=np.uint8)
    rect_max = max(3, size // 4)
    for _ in range(rng.randrange(1, max_rects + 1)):
        c0, r0 = rng.randrange(size), rng.randrange(size)
        occ[r0 : r0 + rng.randrange(2, rect_max), c0 : c0 + rng.randrange(2, rect_max)] = 1
    pot = np.zeros((size, size))
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    for _ in range(rng.randrange(1, 4)):
        cx, cy = rng.randrange(size), rng.randrange(size)
        pot += rng.uniform(*gains) * np.exp(-np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2))
    start, goal = (0, 0), (size - 1, size - 1)
    occ[0, 0] = 0
    occ[-1, -1] = 0
    return occ, pot, start, goal


@pytest.fixture
def workzone():
    return load_scenario(data.scenario_text("workzone"))


@pytest.fixture
def cement():
    return load_scenario(data.scenario_text("cement"))


@pytest.fixture
def mep():
    return load_scenario(data.scenario_text("mep"))


@pytest.fixture
def workzone_grid(workzone):
    return rasterize(workzone)
