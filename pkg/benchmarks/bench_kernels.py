"""Time the compiled history kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 1024 4096] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from fracred import _pykernels

try:
    from fracred import _ckernels
except ImportError:
    _ckernels = None


def cases(n):
    t = np.linspace(0.0, 1.0, n + 1)
    f = np.sin(3 * t) + t**2
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -0.5, -0.1]])
    h = 1.0 / n
    yield "product_trapezoid", lambda m: m.product_trapezoid(f, 0.5, h)
    yield "l1_caputo", lambda m: m.l1_caputo(f, 0.5, h)
    yield "abm_solve linear", lambda m: m.abm_solve(None, [0.5] * 3, [1.0, 0.0, 0.0], 0.0, h, n, matrix=A)
    yield "abm_solve callback", lambda m: m.abm_solve(lambda s, x: A @ x + math.cos(s), [0.5] * 3,
                                                      [1.0, 0.0, 0.0], 0.0, h, n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1024, 4096])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'kernel':<20} {'n':>6} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for n in args.sizes:
        for name, run in cases(n):
            py = min(timeit.repeat(lambda: run(_pykernels), number=1, repeat=args.repeat)) * 1e3
            if _ckernels is None:
                print(f"{name:<20} {n:>6} {py:>11.2f} {'-':>12} {'-':>8}")
                continue
            cy = min(timeit.repeat(lambda: run(_ckernels), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<20} {n:>6} {py:>11.2f} {cy:>12.2f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
