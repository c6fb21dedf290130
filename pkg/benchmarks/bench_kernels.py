#!/usr/bin/env python3
"""Benchmark the compiled classical-map kernels against the numpy fallback.

Run after building the extension:

    python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from dmkr import kernels
from dmkr.kernels import python_backend

ARGS = dict(K=5.4, gamma=0.2, a2=0.5, phi=math.pi / 2)


def timeit(fn, repeat=3):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if not kernels.HAVE_COMPILED:
        print("compiled backend not available; benchmarking fallback only")
    rng = np.random.default_rng(0)
    cases = []

    q0 = rng.uniform(0, 2 * math.pi, 512)
    p0 = rng.uniform(-math.pi, math.pi, 512)
    cases.append((
        "lyapunov_max_batch (512 ics x 20k steps)",
        lambda impl: impl.lyapunov_max_batch(q0, p0, t_transient=500,
                                             t_total=20_000, **ARGS),
    ))
    cases.append((
        "iterate_batch (512 ics x 50k steps)",
        lambda impl: impl.iterate_batch(q0, p0, steps=50_000, **ARGS),
    ))
    cases.append((
        "trajectory_record (1 ic x 2M steps)",
        lambda impl: impl.trajectory_record(1.0, 0.0, steps=2_000_000, **ARGS),
    ))
    cases.append((
        "bifurcation_record_batch (64 ics x 5k steps)",
        lambda impl: impl.bifurcation_record_batch(
            q0[:64], p0[:64], t_transient=4_000, t_record=1_000, **ARGS),
    ))

    print(f"{'case':<45} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, fn in cases:
        t_py = timeit(lambda: fn(python_backend))
        if kernels.HAVE_COMPILED:
            t_cy = timeit(lambda: fn(kernels))
            print(f"{name:<45} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x")
        else:
            print(f"{name:<45} {t_py:>9.3f}s {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
