"""Time the jitted kernels against their pure-numpy fallbacks.

Run as: python3 benchmarks/bench_kernels.py [--n 256] [--repeats 5]

Both implementations live in ddns2d.kernels and are called directly, so a
single process compares them; production path selection happens once at
import through the DDNS2D_NO_NUMBA environment variable.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ddns2d import kernels
from ddns2d.grid import GridSpec, grid_arrays
from ddns2d.mollify import _NODES, _TAPER, _TAPER_D, _TAPER_DD, _WEIGHTS


def timeit(fn, repeats):
    fn()  # warm-up (includes jit compilation)
    best = np.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    n, repeats = args.n, args.repeats

    ga = grid_arrays(GridSpec(n))
    offsets = np.ascontiguousarray(0.5 * _NODES)
    weights = _WEIGHTS
    rng = np.random.default_rng(0)
    fields = [rng.normal(size=(n, n)) for _ in range(6)]
    out1 = np.zeros((n, n))
    out2 = np.zeros((n, n))
    yvals = rng.normal(scale=30.0, size=(n, n))

    print(f"n={n}  numba available: {kernels.USING_NUMBA}")
    print(f"{'kernel':<28} {'numpy [ms]':>12} {'numba [ms]':>12} "
          f"{'speedup':>8}")

    rows = [
        ("mollifier_multiplier",
         lambda: kernels._multiplier_numpy(ga.kx, ga.ky, offsets, weights),
         lambda: kernels._multiplier_numba(ga.kx, ga.ky, offsets, weights)),
        ("increment_accumulation",
         lambda: kernels._accum_numpy(out1, out2, *fields, 0.01),
         lambda: kernels._accum_numba(out1, out2, *fields, 0.01)),
        ("beta_family_eval",
         lambda: kernels._beta_numpy(yvals, 20.0, _TAPER, _TAPER_D,
                                     _TAPER_DD, 0),
         lambda: kernels._beta_numba(yvals, 20.0, _TAPER, _TAPER_D,
                                     _TAPER_DD, 0)),
    ]
    for name, np_fn, nb_fn in rows:
        t_np = timeit(np_fn, repeats)
        if kernels.USING_NUMBA:
            t_nb = timeit(nb_fn, repeats)
            print(f"{name:<28} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
                  f"{t_np / t_nb:>8.2f}x")
        else:
            print(f"{name:<28} {t_np * 1e3:>12.3f} {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
