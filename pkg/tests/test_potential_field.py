from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import make_scenario

from semcost import data, load_scenario
from semcost.distance_field import all_obstacle_edfs, per_obstacle_edf
from semcost.errors import FieldError
from semcost.potential_field import make_stack, repulsive_field, total_field, with_gains
from semcost.scenario import rasterize


@pytest.fixture
def small_field():
    grid = rasterize(make_scenario(obstacles=[{"id": "a", "family": "F", "cells": [[4, 4]]}]))
    return per_obstacle_edf(grid, 0)


def test_unit_gain_on_obstacle(small_field):
    rep = repulsive_field(small_field, 1.0)
    assert rep.at((4, 4)) == 1.0


def test_zero_gain_annihilates(small_field):
    rep = repulsive_field(small_field, 0.0)
    assert not rep.values.any()


def test_gain_two_distance_one(small_field):
    rep = repulsive_field(small_field, 2.0)
    assert rep.at((4, 5)) == pytest.approx(2 * math.exp(-1), rel=1e-12)


def test_negative_gain_rejected(small_field):
    with pytest.raises(FieldError):
        repulsive_field(small_field, -0.1)
    with pytest.raises(FieldError):
        total_field((small_field,), (-1.0,))


def test_single_obstacle_total_equals_repulsive(small_field):
    total = total_field((small_field,), (1.7,))
    rep = repulsive_field(small_field, 1.7)
    assert np.array_equal(total.values, rep.values)


def test_two_identical_obstacles_double():
    grid = rasterize(make_scenario(obstacles=[
        {"id": "a", "family": "F", "cells": [[4, 4]]},
        {"id": "b", "family": "F", "cells": [[4, 4]]},
    ]))
    fields = all_obstacle_edfs(grid)
    total = total_field(fields, (1.0, 1.0))
    single = repulsive_field(fields[0], 1.0)
    assert np.allclose(total.values, 2 * single.values, rtol=1e-15)


def test_cement_scene_against_brute_force():
    sc = load_scenario(data.scenario_text("cement"))
    grid = rasterize(sc)
    fields = all_obstacle_edfs(grid)
    gains = (0.21, 0.71, 0.21)
    total = total_field(fields, gains)
    expected = np.zeros((grid.height, grid.width))
    for fld, gain in zip(fields, gains):
        for r in range(grid.height):
            for c in range(grid.width):
                expected[r, c] += gain * math.exp(-fld.values[r, c])
    assert np.abs(total.values - expected).max() <= 1e-12 * max(1.0, expected.max())


def test_stack_invariants(workzone):
    grid = rasterize(workzone)
    stack = make_stack(all_obstacle_edfs(grid), (0.8, 0.3))
    v = stack.total.values
    assert (v >= 0).all()
    assert v.max() <= 0.8 + 0.3 + 1e-12
    recomputed = sum(g * np.exp(-f.values) for f, g in zip(stack.per_obstacle_distance, stack.gains))
    assert np.abs(v - recomputed).max() <= 1e-12


def test_linearity_in_gains(workzone):
    grid = rasterize(workzone)
    fields = all_obstacle_edfs(grid)
    base = total_field(fields, (0.5, 1.5))
    scaled = total_field(fields, (0.5 * 3, 1.5 * 3))
    assert np.allclose(scaled.values, 3 * base.values, rtol=1e-12)


def test_monotone_in_single_gain(workzone):
    grid = rasterize(workzone)
    fields = all_obstacle_edfs(grid)
    lo = total_field(fields, (0.5, 1.0))
    hi = total_field(fields, (0.9, 1.0))
    assert (hi.values >= lo.values - 1e-15).all()


def test_strictly_positive_with_positive_gains(workzone):
    grid = rasterize(workzone)
    total = total_field(all_obstacle_edfs(grid), (0.01, 0.01))
    assert (total.values > 0).all()


def test_with_gains_rebuilds_from_cached_distances(workzone):
    grid = rasterize(workzone)
    stack = make_stack(all_obstacle_edfs(grid), (1.0, 1.0))
    rebuilt = with_gains(stack, (2.0, 0.5))
    assert rebuilt.per_obstacle_distance is stack.per_obstacle_distance
    expected = total_field(stack.per_obstacle_distance, (2.0, 0.5))
    assert np.array_equal(rebuilt.total.values, expected.values)


def test_dimension_mismatch_rejected(small_field):
    other_grid = rasterize(make_scenario(width=4, height=4, goal=(3, 3),
                                         obstacles=[{"id": "z", "family": "F", "cells": [[1, 1]]}]))
    other = per_obstacle_edf(other_grid, 0)
    with pytest.raises(FieldError):
        total_field((small_field, other), (1.0, 1.0))


def test_gain_count_mismatch_rejected(small_field):
    with pytest.raises(FieldError):
        total_field((small_field,), (1.0, 2.0))


def test_zero_obstacle_total_is_zero():
    total = total_field((), (), width=5, height=4)
    assert total.values.shape == (4, 5)
    assert not total.values.any()
