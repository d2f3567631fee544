"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and size with the best-of-``repeat`` time of
each backend and the speedup.  The first numba call (compilation) is made
before timing starts.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from quasispec._kernels import NUMBA_KERNELS, NUMPY_KERNELS


def cases(rng):
    for n in (16, 128, 1024):
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x = np.cos(np.linspace(0, np.pi, 2 * n))
        yield "clenshaw", n, (c, x)
        yield "chebder", n, (c,)
        yield "chebint", n, (c,)
    for m, n in ((64, 8), (256, 32), (1024, 64)):
        V = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        yield "mgs2", f"{m}x{n}", (V, 1e-14)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if NUMBA_KERNELS is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<10}{'size':>10}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for name, size, a in cases(rng):
        fnp, fnb = NUMPY_KERNELS[name], NUMBA_KERNELS[name]
        fnb(*a)  # compile
        number = 20
        tnp = min(timeit.repeat(lambda: fnp(*a), number=number, repeat=args.repeat)) / number
        tnb = min(timeit.repeat(lambda: fnb(*a), number=number, repeat=args.repeat)) / number
        print(f"{name:<10}{size!s:>10}{1e6 * tnp:>14.1f}{1e6 * tnb:>14.1f}{tnp / tnb:>10.2f}")


if __name__ == "__main__":
    main()
