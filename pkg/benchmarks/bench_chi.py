"""Time the finite-part chi kernel on the compiled and pure-Python backends.

Run with ``python benchmarks/bench_chi.py [--points N] [--threads T]``.
Prints wall time per backend and the largest relative disagreement.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from tdqo import kernels


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"backend default: {kernels.BACKEND}, cores: {os.cpu_count()}")

    cases = {
        "exponential(sigma=0.5)": (kernels.SHAPE_EXP, (0.5,), np.linspace(-2.0, 5.0, args.points)),
        "gaussian(sigma=1,f0=2)": (kernels.SHAPE_GAUSS, (1.0, 2.0, 0.0), np.linspace(-6.0, 6.0, args.points)),
    }
    runs = [("python", 1)]
    if "compiled" in kernels.BACKENDS:
        runs += [("compiled", 1), ("compiled", args.threads)]
    else:
        print("compiled backend not built; timing the fallback only")

    for name, (code, params, t) in cases.items():
        print(f"{name}, {t.size} points")
        ref = None
        base = None
        for backend, nt in runs:
            sec, (vals, _) = _time(
                lambda: kernels.chi_finite_part(code, params, t, nthreads=nt, backend=backend), args.repeat
            )
            ref = vals if ref is None else ref
            base = sec if base is None else base
            ok = np.isfinite(ref) & np.isfinite(vals)
            dev = np.max(np.abs(vals[ok] - ref[ok])) / np.max(np.abs(ref[ok]))
            print(f"  {backend:9s} threads={nt:<2d} {sec * 1e3:9.1f} ms  x{base / sec:6.1f}  max rel dev {dev:.1e}")


if __name__ == "__main__":
    main()
