"""Timing comparison of the numba and numpy trajectory backends.

Runs the same seeded workloads through both kernel implementations and
prints wall-clock times plus the speedup.  The outputs are also compared
bit for bit, since backend choice must never change results.

Usage: python benchmarks/bench_backends.py [--samples N]
"""

import argparse
import time

import numpy as np

from bottlewalk import backend, fixtures, mc


def run_workloads(name: str, n_samples: int):
    g = fixtures.build_fixture("paradigm2-scaled")
    rng = mc.RngConfig(seed=2026, backend=name)
    results = {}
    timings = {}

    t0 = time.perf_counter()
    stats = mc.hitting_time_stats(
        g, g.marks.far_start, [g.marks.origin], 0.5, rng, n_samples
    )
    timings["hitting"] = time.perf_counter() - t0
    results["hitting"] = stats.times

    t0 = time.perf_counter()
    law = mc.core_return_law(g, rng, n_samples)
    timings["returns"] = time.perf_counter() - t0
    results["returns"] = law.stats.counts

    t0 = time.perf_counter()
    coup = mc.coupling_experiment(g, 400, 0.5, rng, n_samples)
    timings["coupling"] = time.perf_counter() - t0
    results["coupling"] = coup.meet

    return results, timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=20_000)
    args = parser.parse_args()

    names = ["numpy"]
    if backend.NUMBA_AVAILABLE:
        names.append("numba")
        # trigger jit compilation outside the timed region
        run_workloads("numba", 10)
    else:
        print("numba not importable; benchmarking numpy only")

    all_results = {}
    all_timings = {}
    for name in names:
        all_results[name], all_timings[name] = run_workloads(name, args.samples)

    print(f"{args.samples} trajectories per workload\n")
    print(f"{'workload':<10} " + " ".join(f"{n:>10}" for n in names) + "   speedup")
    for wl in ("hitting", "returns", "coupling"):
        row = [all_timings[n][wl] for n in names]
        speed = row[0] / row[-1] if len(row) > 1 and row[-1] > 0 else float("nan")
        cells = " ".join(f"{t:>9.3f}s" for t in row)
        print(f"{wl:<10} {cells}   {speed:6.1f}x")

    if len(names) == 2:
        for wl in all_results["numpy"]:
            a, b = all_results["numpy"][wl], all_results["numba"][wl]
            if not np.array_equal(a, b):
                raise SystemExit(f"backend outputs differ on workload {wl!r}")
        print("\nbackend outputs are bit-identical")


if __name__ == "__main__":
    main()
