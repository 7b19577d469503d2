from __future__ import annotations

import math
import random

import numpy as np
import pytest
from conftest import make_scenario, random_cells

from semcost.distance_field import ScalarField, global_edf
from semcost.metrics import compute_metrics, comparison_table, obstacle_distances, path_length
from semcost.scenario import rasterize


def edf_for(cell_sets, width=10, height=10):
    obstacles = [
        {"id": f"o{i}", "family": "F", "cells": [list(c) for c in cells]}
        for i, cells in enumerate(cell_sets)
    ]
    grid = rasterize(make_scenario(width=width, height=height, obstacles=obstacles, goal=(0, 1)))
    return global_edf(grid)


def test_single_cell_path_zero_length():
    assert path_length([(3, 3)], 0.1) == (0.0, 0.0)


def test_three_diagonal_steps():
    path = [(0, 0), (1, 1), (2, 2), (3, 3)]
    cells, meters = path_length(path, 0.5)
    assert cells == pytest.approx(3 * math.sqrt(2), rel=1e-12)
    assert meters == pytest.approx(1.5 * math.sqrt(2), rel=1e-12)


def test_random_path_matches_pairwise_sum():
    rng = random.Random(3)
    path = [(rng.randrange(10), rng.randrange(10)) for _ in range(12)]
    cells, _ = path_length(path, 1.0)
    expected = sum(
        math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2) for a, b in zip(path, path[1:])
    )
    assert cells == pytest.approx(expected, rel=1e-12)


def test_adjacent_pass_distance():
    edf = edf_for([[(5, 5)]])
    # path passing 4-adjacent to the obstacle at closest approach
    path = [(4, 3), (4, 4), (4, 5), (4, 6)]
    dmin, _ = obstacle_distances(path, edf, 0.1)
    assert dmin == pytest.approx(0.1, rel=1e-12)


def test_constant_field_min_equals_avg():
    edf = ScalarField(width=4, height=4, values=np.full((4, 4), 3.0))
    dmin, davg = obstacle_distances([(0, 0), (1, 0), (2, 0)], edf, 0.1)
    assert dmin == pytest.approx(0.3, rel=1e-12)
    assert davg == pytest.approx(0.3, rel=1e-12)


def test_start_and_goal_included():
    edf = edf_for([[(0, 0)]])
    path = [(0, 1), (5, 5)]  # start is the nearest cell on the path
    dmin, _ = obstacle_distances(path, edf, 1.0)
    assert dmin == 1.0


def test_no_obstacles_reports_absent():
    grid = rasterize(make_scenario(obstacles=[]))
    edf = global_edf(grid)
    dmin, davg = obstacle_distances([(0, 0), (1, 1)], edf, 0.1)
    assert dmin is None and davg is None
    m = compute_metrics([(0, 0), (1, 1)], edf, 0.1)
    assert m.min_obstacle_dist_m is None and m.avg_obstacle_dist_m is None
    assert m.length_cells == pytest.approx(math.sqrt(2))


def test_adding_obstacle_never_increases_distances():
    rng = random.Random(9)
    for _ in range(10):
        first = random_cells(rng, 10, 10, 3)
        second = random_cells(rng, 10, 10, 2, exclude=first)
        path = [(c, r) for c, r in [(0, 9), (3, 7), (6, 6), (9, 2)]]
        one = edf_for([first])
        two = edf_for([first, second])
        min1, avg1 = obstacle_distances(path, one, 0.1)
        min2, avg2 = obstacle_distances(path, two, 0.1)
        assert min2 <= min1 + 1e-12
        assert avg2 <= avg1 + 1e-12


def test_meter_cell_ratio_is_resolution(workzone):
    from semcost.session import Session

    session = Session(workzone)
    result = session.replan()
    m = result.metrics
    assert m.length_m / m.length_cells == workzone.resolution_m


def test_min_never_exceeds_avg():
    edf = edf_for([[(2, 2)], [(7, 7)]])
    path = [(0, 0), (1, 0), (2, 0), (3, 0), (4, 1)]
    m = compute_metrics(path, edf, 0.1)
    assert m.min_obstacle_dist_m <= m.avg_obstacle_dist_m


def test_comparison_table_renders_rows_and_errors():
    rows = [
        {
            "label": "busy",
            "metrics": {"length_cells": 10.0, "length_m": 1.0, "min_obstacle_dist_m": 0.3, "avg_obstacle_dist_m": 0.5},
            "posteriors": {"ws": 0.86},
        },
        {"label": "broken", "error": "sensor down"},
    ]
    text = comparison_table(rows)
    assert "busy" in text and "broken" in text
    assert "0.86" in text
    assert "sensor down" in text
