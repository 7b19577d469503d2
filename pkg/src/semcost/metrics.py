"""Path quality metrics: length plus clearance statistics against the
global distance field.

Lengths are reported both in cell-lengths and meters because scenario
authors disagree on which "unit" a table should show. Clearance is sampled
at path cells only (start and goal included); the grid has no sub-cell
precision to offer anyway.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .distance_field import ScalarField


@dataclass(frozen=True)
class PathMetrics:
    length_cells: float
    length_m: float
    min_obstacle_dist_m: float | None  # None when the map has no obstacles
    avg_obstacle_dist_m: float | None


def path_length(path, resolution_m: float) -> tuple[float, float]:
    """Sum of per-step Euclidean distances between consecutive cell centers,
    as (cells, meters)."""
    cells = 0.0
    for (c0, r0), (c1, r1) in zip(path, path[1:]):
        cells += math.sqrt((c1 - c0) ** 2 + (r1 - r0) ** 2)
    return cells, cells * resolution_m


def obstacle_distances(path, global_edf: ScalarField, resolution_m: float) -> tuple[float | None, float | None]:
    """Min and mean of the global distance field over all path cells, in
    meters; (None, None) when the field is the unbounded (no obstacles)
    sentinel."""
    if global_edf.is_unbounded:
        return None, None
    values = [global_edf.at(cell) for cell in path]
    return min(values) * resolution_m, (sum(values) / len(values)) * resolution_m


def compute_metrics(path, global_edf: ScalarField, resolution_m: float) -> PathMetrics:
    cells, meters = path_length(path, resolution_m)
    dmin, davg = obstacle_distances(path, global_edf, resolution_m)
    return PathMetrics(
        length_cells=cells,
        length_m=meters,
        min_obstacle_dist_m=dmin,
        avg_obstacle_dist_m=davg,
    )


def metrics_to_dict(m: PathMetrics | None) -> dict | None:
    if m is None:
        return None
    return {
        "length_cells": m.length_cells,
        "length_m": m.length_m,
        "min_obstacle_dist_m": m.min_obstacle_dist_m,
        "avg_obstacle_dist_m": m.avg_obstacle_dist_m,
    }


def _fmt(value, digits=3) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def comparison_table(rows: list[dict]) -> str:
    """Side-by-side table of labeled runs: path metrics on top, posterior
    means per obstacle underneath."""
    labels = [row["label"] for row in rows]
    obstacle_ids: list[str] = []
    for row in rows:
        for oid in row.get("posteriors", {}):
            if oid not in obstacle_ids:
                obstacle_ids.append(oid)

    width = max([len("Metric")] + [len(x) for x in ("Length (cells)", "Min. obstacle dist. (m)")])
    col = max(12, max((len(l) for l in labels), default=12) + 2)

    def line(name, values):
        return name.ljust(28) + "".join(str(v).rjust(col) for v in values)

    out = [line("Metric", labels), "-" * (28 + col * len(labels))]
    for name, key_name in (
        ("Length (cells)", "length_cells"),
        ("Length (m)", "length_m"),
        ("Min. obstacle dist. (m)", "min_obstacle_dist_m"),
        ("Avg. obstacle dist. (m)", "avg_obstacle_dist_m"),
    ):
        values = []
        for row in rows:
            if row.get("error"):
                values.append("error")
            else:
                values.append(_fmt(row["metrics"].get(key_name)))
        out.append(line(name, values))
    if obstacle_ids:
        out.append(line("Posterior mean", [""] * len(labels)))
        for oid in obstacle_ids:
            values = []
            for row in rows:
                post = row.get("posteriors", {})
                values.append(_fmt(post.get(oid), digits=2) if oid in post else "-")
            out.append(line(f"  {oid}", values))
    errors = [row for row in rows if row.get("error")]
    for row in errors:
        out.append(f"[{row['label']}] error: {row['error']}")
    return "\n".join(out)
