"""Benchmark the counter-based draw kernels: numba @njit vs pure numpy.

The two paths produce bit-identical draws (asserted below); this script
only measures speed.  Run directly:

    python benchmarks/bench_kernels.py [n_molecules]

Force the numpy path at package level with TWOATOM_NUMBA=0.
"""

import sys
import time

import numpy as np

from twoatom import _kernels as kern
from twoatom.eventsim import SimConfig, simulate_ensemble
from twoatom.kinetics import RateTriple


def timeit(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
    print(f"n_molecules = {n:,}  ({kern.DRAWS_PER_MOLECULE} draws each)")
    print(f"active backend: {kern.backend_name()}")

    a = kern.raw_draws_numpy(1, 0, n)
    rows = [("numpy raw draws", timeit(lambda: kern.raw_draws_numpy(1, 0, n)))]
    if kern.HAVE_NUMBA:
        kern.raw_draws_numba(1, 0, 1000)  # compile outside the timer
        b = kern.raw_draws_numba(1, 0, n)
        assert np.array_equal(a, b), "backends disagree"
        rows.append(("numba raw draws", timeit(lambda: kern.raw_draws_numba(1, 0, n))))
    else:
        print("numba not available; benchmarking numpy only")

    rates = RateTriple.compatible(1.0 / 1.6e-9)
    cfg = SimConfig(n0=n, mode="sequential", rates=rates, seed=1)
    rows.append(("full ensemble generation", timeit(lambda: simulate_ensemble(cfg), repeats=3)))

    width = max(len(r[0]) for r in rows)
    print()
    for name, t in rows:
        print(f"{name:<{width}}  {t * 1e3:9.1f} ms   {n / t / 1e6:8.1f} M molecules/s")
    if kern.HAVE_NUMBA:
        speedup = rows[0][1] / rows[1][1]
        print(f"\nnumba speedup on the draw kernel: {speedup:.1f}x")


if __name__ == "__main__":
    main()
