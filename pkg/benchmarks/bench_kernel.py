#!/usr/bin/env python3
"""Benchmark the compiled trajectory kernel against the pure-Python mirror.

Usage: python benchmarks/bench_kernel.py [steps]

Runs the same workload (cyclic 4-species operator, coordinate observables,
dyadic checkpoints, sojourn tracking) on every available backend, reports
steps/second, and verifies the outputs are bit-identical.
"""

import math
import sys
import time

from volqso.ergodic import dyadic_checkpoints
from volqso.kernel import available_backends, get_kernel
from volqso.simplex import validate

ROWS = [[0.0, 0.5, 0.5, -0.5], [-0.5, 0.0, 0.5, 0.5],
        [-0.5, -0.5, 0.0, 0.5], [0.5, -0.5, -0.5, 0.0]]


def workload(steps):
    start = validate((0.4, 0.3, 0.2, 0.1)).to_log()
    return (
        4, ROWS, list(start.log_coords), steps, math.log(0.05),
        [0, 1, 2, 3], [[1 / 3, 0.0, 1 / 3, 1 / 3]],
        list(dyadic_checkpoints(steps)), max(1, steps // 1000), True,
    )


def main():
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    args = workload(steps)
    results = {}
    for name in backends:
        # python fallback gets a smaller slice, scaled for comparison
        n = steps if name == "compiled" else max(steps // 20, 10_000)
        run_args = workload(n)
        kern = get_kernel(name)
        t0 = time.perf_counter()
        results[name] = kern(*run_args)
        dt = time.perf_counter() - t0
        print(f"{name:>9}: {n:>9} steps in {dt:7.3f} s "
              f"({n / dt / 1e6:6.2f} M steps/s)")

    if len(backends) == 2:
        small = workload(50_000)
        a = get_kernel("compiled")(*small)
        b = get_kernel("python")(*small)
        same = all(
            a[k] == b[k] or (isinstance(a[k], float) and math.isnan(a[k])
                             and math.isnan(b[k]))
            for k in a
        )
        print(f"bit-identical on 50k-step cross-check: {same}")
        if not same:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
