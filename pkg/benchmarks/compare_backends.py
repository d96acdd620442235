"""Compare the compiled scoring kernels against the numpy fallback.

Times the two backend entry points (rank-1 gains for the binary kind,
stacked rank-r gains for the multi-class kinds) over a grid of candidate
counts, dimensions, and ranks, and prints one row per case:

    python benchmarks/compare_backends.py [--reps 5]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from fastfish.backends import available, get_backend

CASES_RANK1 = [(2000, 64), (20000, 64), (5000, 384), (50000, 384)]
CASES_LOWRANK = [(500, 320, 2), (500, 320, 5), (500, 1280, 2), (500, 1280, 20), (2000, 128, 2)]


def _problem(rng, dim):
    a = rng.standard_normal((dim, dim))
    m = a @ a.T / dim + np.eye(dim)
    minv = np.linalg.inv(m)
    minv = (minv + minv.T) / 2
    t = rng.standard_normal((dim, dim))
    t = t @ t.T / dim
    q = minv @ t @ minv
    return minv, (q + q.T) / 2


def _median(fn, reps):
    fn()
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()
    backends = {name: get_backend(name) for name in available()}
    if "ext" not in backends:
        print("compiled backend not built; timing the fallback only")
    rng = np.random.default_rng(0)

    print(f"{'kernel':8s} {'n':>6s} {'dim':>5s} {'r':>3s}  " + "  ".join(f"{n}_ms" for n in backends))
    for n, dim in CASES_RANK1:
        minv, q = _problem(rng, dim)
        vectors = np.ascontiguousarray(rng.standard_normal((n, dim)))
        outputs, times = {}, {}
        for name, mod in backends.items():
            times[name] = _median(lambda m=mod: m.rank1_gains(vectors, minv, q), args.reps)
            outputs[name] = mod.rank1_gains(vectors, minv, q)
        _check(outputs)
        print(
            f"{'rank1':8s} {n:6d} {dim:5d} {1:3d}  "
            + "  ".join(f"{times[name] * 1e3:8.2f}" for name in backends)
        )
    for n, dim, r in CASES_LOWRANK:
        minv, q = _problem(rng, dim)
        factors = np.ascontiguousarray(rng.standard_normal((n, dim, r)))
        outputs, times = {}, {}
        for name, mod in backends.items():
            times[name] = _median(lambda m=mod: m.lowrank_gains(factors, minv, q), args.reps)
            outputs[name] = mod.lowrank_gains(factors, minv, q)
        _check(outputs)
        print(
            f"{'lowrank':8s} {n:6d} {dim:5d} {r:3d}  "
            + "  ".join(f"{times[name] * 1e3:8.2f}" for name in backends)
        )


def _check(outputs) -> None:
    values = list(outputs.values())
    for other in values[1:]:
        err = np.abs(values[0] - other).max() / max(1.0, np.abs(values[0]).max())
        if err > 1e-10:
            raise AssertionError(f"backends disagree: relative error {err:.2e}")


if __name__ == "__main__":
    main()
