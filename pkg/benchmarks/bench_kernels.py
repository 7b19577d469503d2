"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--size 256] [--repeats 3]

Times the exact distance transform and the two-queue search on random
instances and prints per-backend timings plus the speedup. Also verifies
the two backends return identical results on the benchmarked instances.
"""
from __future__ import annotations

import argparse
import random
import time

import numpy as np

from semcost.kernels import available_backends


def make_instance(size: int, seed: int):
    rng = random.Random(seed)
    occ = np.zeros((size, size), dtype=np.uint8)
    for _ in range(size // 16):
        c0, r0 = rng.randrange(size), rng.randrange(size)
        occ[r0 : r0 + rng.randrange(2, size // 8), c0 : c0 + rng.randrange(2, size // 8)] = 1
    occ[0, 0] = 0
    occ[-1, -1] = 0
    pot = np.zeros((size, size))
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    for _ in range(4):
        cx, cy = rng.randrange(size), rng.randrange(size)
        pot += rng.uniform(0.2, 2.0) * np.exp(-np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2))
    return occ, pot


def time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    if "native" not in backends:
        print("note: compiled kernels not built; timing the fallback only")

    occ, pot = make_instance(args.size, seed=7)
    mask = occ.copy()
    search_args = (occ, pot, 0, args.size * args.size - 1, 1.0, 1.5, 1.0, 8)

    rows = []
    results = {}
    for name, mod in backends.items():
        edt_t = time_call(lambda m=mod: m.edt_squared(mask), args.repeats)
        search_t = time_call(lambda m=mod: m.mha_search(*search_args), args.repeats)
        results[name] = (mod.edt_squared(mask), mod.mha_search(*search_args))
        rows.append((name, edt_t, search_t))

    if len(results) == 2:
        a, b = results["python"], results["native"]
        assert np.array_equal(a[0], b[0]), "edt results differ between backends"
        assert a[1][1] == b[1][1] and np.array_equal(a[1][2], b[1][2]), "search results differ"
        print(f"result parity: OK (grid {args.size}x{args.size})\n")

    print(f"{'backend':<10} {'edt (ms)':>12} {'search (ms)':>14}")
    for name, edt_t, search_t in rows:
        print(f"{name:<10} {edt_t * 1e3:>12.2f} {search_t * 1e3:>14.2f}")
    if len(rows) == 2:
        py = next(r for r in rows if r[0] == "python")
        nat = next(r for r in rows if r[0] == "native")
        print(f"\nspeedup: edt x{py[1] / nat[1]:.1f}, search x{py[2] / nat[2]:.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
