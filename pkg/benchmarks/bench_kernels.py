#!/usr/bin/env python3
"""Benchmark the compiled strapdown kernel against the numpy fallback.

The workload mirrors filter usage: repeated propagation of a sigma-point
batch (49 points for the 24-dim augmented reentry state) through one
navigation step.

Usage:
    python benchmarks/bench_kernels.py [--points 49] [--reps 2000]
"""

import argparse
import time

import numpy as np

from skfnav import kernels
from skfnav.kernels import _numpy as pure


def make_batch(n_points: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    states = np.empty((n_points, 15))
    states[:, 0] = 1.5e5 + 1e3 * rng.standard_normal(n_points)
    states[:, 1] = 0.93 + 0.01 * rng.standard_normal(n_points)
    states[:, 2] = 0.32 + 0.01 * rng.standard_normal(n_points)
    states[:, 3] = 1.4e4 + 100 * rng.standard_normal(n_points)
    states[:, 4] = -0.006 + 0.001 * rng.standard_normal(n_points)
    states[:, 5] = 0.8 + 0.01 * rng.standard_normal(n_points)
    states[:, 6:9] = 0.3 + 0.01 * rng.standard_normal((n_points, 3))
    states[:, 9:15] = 1e-4 * rng.standard_normal((n_points, 6))
    return states


def bench(fn, states, f, w, dt, reps: int) -> float:
    fn(states, f, w, dt)  # warm up
    start = time.perf_counter()
    for _ in range(reps):
        fn(states, f, w, dt)
    return (time.perf_counter() - start) / reps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=49, help="batch size")
    parser.add_argument("--reps", type=int, default=2000, help="repetitions")
    args = parser.parse_args()

    states = make_batch(args.points)
    f = np.array([-5.0, 2.0, -31.0])
    w = np.array([1e-3, -2e-3, 5e-4])
    dt = 1.4

    t_pure = bench(pure.strapdown_batch, states, f, w, dt, args.reps)
    print(f"numpy backend : {t_pure * 1e6:9.2f} us/call "
          f"({t_pure / args.points * 1e9:7.1f} ns/point)")

    try:
        from skfnav.kernels import _native as native
    except ImportError:
        print("compiled backend: not built (pip install -e . --no-build-isolation)")
        return
    t_nat = bench(native.strapdown_batch, states, f, w, dt, args.reps)
    print(f"native backend: {t_nat * 1e6:9.2f} us/call "
          f"({t_nat / args.points * 1e9:7.1f} ns/point)")
    print(f"speedup: {t_pure / t_nat:.1f}x  (active backend: {kernels.BACKEND})")

    a = pure.strapdown_batch(states, f, w, dt)
    b = native.strapdown_batch(states, f, w, dt)
    rel = np.abs(a - b) / np.maximum(np.abs(a), 1e-12)
    print(f"max relative difference: {rel.max():.2e}")


if __name__ == "__main__":
    main()
