#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the NumPy fallback.

Also asserts the two backends agree bit for bit, which is what makes the
import-time selection safe.

Usage: python benchmarks/bench_lbm.py [--grid 128] [--steps 400]
"""

import argparse
import time

import numpy as np

from windcomfort.oracle import _lbm_ref


def _bench(kernel, n, steps, solid, damp):
    f = kernel.init_state(n, 0.08)
    kernel.run(f, solid, damp, 0.08, 0.8, 10)  # warm up
    f = kernel.init_state(n, 0.08)
    t0 = time.perf_counter()
    kernel.run(f, solid, damp, 0.08, 0.8, steps)
    elapsed = time.perf_counter() - t0
    return elapsed, f


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--steps", type=int, default=400)
    args = ap.parse_args()

    try:
        from windcomfort.oracle import _lbm
    except ImportError:
        print("compiled kernel not built; only timing the NumPy fallback")
        _lbm = None

    n = args.grid
    rng = np.random.default_rng(0)
    solid = (rng.random((n, n)) < 0.08).astype(np.uint8)
    damp = np.where(rng.random((n, n)) < 0.1, 0.9, 1.0)

    t_py, f_py = _bench(_lbm_ref, n, args.steps, solid, damp)
    cells = n * n * args.steps
    print(f"python   : {t_py:8.3f}s  ({cells / t_py / 1e6:7.1f} Mcell-updates/s)")

    if _lbm is not None:
        t_cy, f_cy = _bench(_lbm, n, args.steps, solid, damp)
        print(f"compiled : {t_cy:8.3f}s  ({cells / t_cy / 1e6:7.1f} Mcell-updates/s)")
        print(f"speedup  : {t_py / t_cy:8.2f}x")
        if np.array_equal(f_py, f_cy):
            print("bitwise  : identical")
        else:
            diff = np.abs(f_py - f_cy).max()
            raise SystemExit(f"BACKEND MISMATCH: max abs diff {diff}")


if __name__ == "__main__":
    main()
