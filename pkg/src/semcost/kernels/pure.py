"""Pure NumPy/Python kernels: exact squared Euclidean distance transform and
the two-queue search loop.

These are the fallback twins of ``semcost.kernels._native``. Both
implementations must stay behaviorally identical (same tie-breaking, same
neighbor order, same floating-point expression order) so that plans and
fields do not depend on which backend happens to be importable.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

# Large-but-finite stand-in for +inf; keeps parabola intersections NaN-free.
_BIG = 1e20

# Neighbor order is part of the determinism contract (first relaxation wins
# on equal g), so both kernel backends use these exact tables.
MOVES_4 = ((-1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0), (1, 0, 1.0))
_SQRT2 = math.sqrt(2.0)
MOVES_8 = (
    (-1, -1, _SQRT2),
    (-1, 0, 1.0),
    (-1, 1, _SQRT2),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, _SQRT2),
    (1, 0, 1.0),
    (1, 1, _SQRT2),
)


def _dt1d(f: list) -> list:
    """Exact 1D squared-distance transform (lower envelope of parabolas)."""
    n = len(f)
    d = [0.0] * n
    v = [0] * n
    z = [0.0] * (n + 1)
    k = 0
    v[0] = 0
    z[0] = -_BIG
    z[1] = _BIG
    for q in range(1, n):
        fq = f[q] + q * q
        s = (fq - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        while s <= z[k]:
            k -= 1
            s = (fq - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = _BIG
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) ** 2 + f[v[k]]
    return d


def edt_squared(mask: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance (in cells) to the nearest True cell.

    Cells of an empty mask come back >= _BIG; callers treat that as
    unbounded.
    """
    h, w = mask.shape
    tmp = np.where(mask, 0.0, _BIG)
    for c in range(w):
        tmp[:, c] = _dt1d(tmp[:, c].tolist())
    out = np.empty((h, w), dtype=np.float64)
    for r in range(h):
        out[r, :] = _dt1d(tmp[r, :].tolist())
    return out


def mha_search(
    occ: np.ndarray,
    pot: np.ndarray,
    start_idx: int,
    goal_idx: int,
    w1: float,
    w2: float,
    gamma: float,
    connectivity: int,
):
    """Two-queue search: anchor keyed by g + w1*euclid-to-goal, informed keyed
    by g + w1*potential; informed expands while its key <= w2 * anchor key.

    Returns (found, g_goal, parents, anchor_expansions, informed_expansions).
    Ties break by (smaller key, larger g, smaller row-major index).
    """
    h, w = occ.shape
    n = h * w
    occf = occ.ravel()
    potf = pot.ravel()
    g = [math.inf] * n
    parents = np.full(n, -1, dtype=np.int32)
    closed_anc = bytearray(n)
    closed_inad = bytearray(n)
    grow, gcol = divmod(goal_idx, w)
    moves = MOVES_8 if connectivity == 8 else MOVES_4

    open0: list = []  # (key, -g_at_push, idx)
    open1: list = []
    g[start_idx] = 0.0
    srow, scol = divmod(start_idx, w)
    dr0, dc0 = srow - grow, scol - gcol
    heapq.heappush(open0, (w1 * math.sqrt(dr0 * dr0 + dc0 * dc0), -0.0, start_idx))
    heapq.heappush(open1, (w1 * potf[start_idx], -0.0, start_idx))
    exp_anchor = exp_informed = 0

    def peek(openq, skip_inad):
        # Drop stale entries (g improved since push) and closed nodes.
        while openq:
            key, neg_g, idx = openq[0]
            if -neg_g != g[idx] or closed_anc[idx] or (skip_inad and closed_inad[idx]):
                heapq.heappop(openq)
                continue
            return key, idx
        return None

    while True:
        top0 = peek(open0, False)
        if top0 is None:
            break
        top1 = peek(open1, True)
        if top1 is not None and top1[0] <= w2 * top0[0]:
            sel_key, u = top1
            heapq.heappop(open1)
            closed_inad[u] = 1
            informed = True
        else:
            sel_key, u = top0
            heapq.heappop(open0)
            closed_anc[u] = 1
            informed = False
        if g[goal_idx] <= sel_key:
            break
        if informed:
            exp_informed += 1
        else:
            exp_anchor += 1
        gu = g[u]
        ur, uc = divmod(u, w)
        for dr, dc, step in moves:
            vr = ur + dr
            vc = uc + dc
            if vr < 0 or vr >= h or vc < 0 or vc >= w:
                continue
            v = vr * w + vc
            if occf[v]:
                continue
            cand = gu + step + gamma * potf[v]
            if cand < g[v]:
                g[v] = cand
                parents[v] = u
                dvr = vr - grow
                dvc = vc - gcol
                heapq.heappush(open0, (cand + w1 * math.sqrt(dvr * dvr + dvc * dvc), -cand, v))
                heapq.heappush(open1, (cand + w1 * potf[v], -cand, v))

    g_goal = g[goal_idx]
    return (math.isfinite(g_goal), g_goal, parents, exp_anchor, exp_informed)
