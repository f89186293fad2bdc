"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from heavytail import _fallback
from heavytail.tau import _rowmasks

try:
    from heavytail import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    A = rng.uniform(0, 2, (12, 14)) * (rng.random((12, 14)) < 0.3)
    A[A.sum(axis=1) == 0, 0] = 1.0
    masks, sums = _rowmasks(A), np.ascontiguousarray(A.sum(axis=1))
    b = rng.uniform(-1, 1, 200_000)
    w = 1.0 - rng.random(200_000)
    return {
        "tau_scan d=14 k=12 |S|<=3": lambda m: m.tau_scan(masks, sums, 14, 12, 3),
        "min_cover d=14 k=12": lambda m: m.min_cover(masks, 14, 12),
        "cond_bisect n=2e5 rho=1": lambda m: m.cond_bisect(b, w, 1.0, 1e-10),
        "cond_bisect n=2e5 rho=2": lambda m: m.cond_bisect(b, w, 2.0, 1e-10),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    impls = [("fallback", _fallback)] + ([("compiled", _kernels)] if _kernels else [])
    print(f"{'kernel':28s} " + " ".join(f"{n:>12s}" for n, _ in impls) + "     speedup")
    for name, fn in cases(np.random.default_rng(0)).items():
        best = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in impls]
        speed = f"{best[0] / best[1]:10.1f}x" if len(best) == 2 else ""
        print(f"{name:28s} " + " ".join(f"{t * 1e3:10.2f}ms" for t in best) + speed)


if __name__ == "__main__":
    main()
