#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

The columnwise simplex projections are the hot inner loop of every solve:
one H-update iteration projects n columns of length r, one A-update
iteration projects r columns of length d.  This script times both backends
on those two shapes plus a full solver block, and prints the speedups.

Select a backend globally with NCAA_BACKEND=numpy|numba (default numba).
"""

import time

import numpy as np

from ncaa import projections
from ncaa.projections import (
    SUM_AT_MOST_ONE,
    SUM_EQUALS_ONE,
    EpsSimplexSpec,
    project_columns,
)
from ncaa.solver import bcd_block, init_factors
from ncaa.synthdata import SyntheticSpec, generate


def best_of(fn, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def projection_workloads(rng):
    h_like = np.asfortranarray(rng.normal(size=(7, 1000)))
    a_like = np.asfortranarray(rng.normal(size=(70, 7)))
    big = np.asfortranarray(rng.normal(size=(20, 5000)))
    return [
        ("H-update shape 7x1000, sum<=1", h_like,
         EpsSimplexSpec(7, 0.0, SUM_AT_MOST_ONE), 200),
        ("A-update shape 70x7, sum=1, eps=0.01", a_like,
         EpsSimplexSpec(70, 0.01, SUM_EQUALS_ONE), 200),
        ("wide 20x5000, sum=1, eps=0.05", big,
         EpsSimplexSpec(20, 0.05, SUM_EQUALS_ONE), 20),
    ]


def time_projections():
    rng = np.random.default_rng(0)
    rows = []
    for label, mat, spec, reps in projection_workloads(rng):
        per_backend = {}
        for backend in ("numba", "numpy"):
            try:
                projections.set_backend(backend)
            except ImportError:
                continue
            project_columns(mat, spec)  # warm up (JIT compile / cache touch)
            per_backend[backend] = best_of(
                lambda: [project_columns(mat, spec) for _ in range(reps)]
            ) / reps
        rows.append((label, per_backend))
    return rows


def time_solver_block():
    spec = SyntheticSpec(m=10, n=500, r=7, purity=0.8, noise=0.0, seed=0)
    inst = generate(spec, 0)
    rng = np.random.default_rng(1)
    Y = np.asfortranarray(inst.X[:, rng.choice(500, size=70, replace=False)])
    A0, H0 = init_factors(inst.X, Y, 7)
    per_backend = {}
    for backend in ("numba", "numpy"):
        try:
            projections.set_backend(backend)
        except ImportError:
            continue
        bcd_block(inst.X, Y, A0, H0, 0.01, 2)  # warm up
        per_backend[backend] = best_of(
            lambda: bcd_block(inst.X, Y, A0, H0, 0.01, 10), repeat=3
        )
    return per_backend


def main():
    default = projections.active_backend()
    print(f"default backend: {default}\n")
    print(f"{'projection workload':44s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for label, per in time_projections():
        nb = per.get("numba")
        np_ = per.get("numpy")
        nb_s = f"{nb * 1e6:8.1f}us" if nb else "      n/a"
        np_s = f"{np_ * 1e6:8.1f}us" if np_ else "      n/a"
        ratio = f"{np_ / nb:7.2f}x" if nb and np_ else "     n/a"
        print(f"{label:44s} {nb_s:>10s} {np_s:>10s} {ratio:>8s}")

    per = time_solver_block()
    print(f"\n10-round BCD block (m=10, n=500, r=7, d=70):")
    for backend, secs in per.items():
        print(f"  {backend:6s} {secs * 1e3:8.1f} ms")
    if "numba" in per and "numpy" in per:
        print(f"  end-to-end speedup: {per['numpy'] / per['numba']:.2f}x")
    projections.set_backend(default)


if __name__ == "__main__":
    main()
