#!/usr/bin/env python3
"""Benchmark the CG kernel backends (compiled vs NumPy fallback).

Builds full-rectangle blend systems of growing size on random rasters and
times repeated solves per backend. The two backends implement the same
algorithm; this script reports wall time, speedup, and the max solution
deviation (expected at floating-point noise level).

Usage: python benchmarks/bench_solver.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from padx.core import BinaryMask, ImageBuffer
from padx.kernels.cg_numpy import cg_csr as cg_numpy
from padx.poisson import BlendProblem, build_system

try:
    from padx.kernels._cg import cg_csr as cg_compiled
except ImportError:
    cg_compiled = None

SIZES = (16, 32, 64, 96, 128)
TOL = 1e-8


def make_system(side: int, rng: np.random.Generator):
    pad = 4
    img = side + 2 * pad
    tgt = ImageBuffer(rng.integers(0, 256, (img, img, 1), dtype=np.uint8))
    src = ImageBuffer(rng.integers(0, 256, (side, side, 1), dtype=np.uint8))
    p = BlendProblem(tgt, src, BinaryMask.full(side, side), (pad, pad))
    return build_system(p)


def time_solver(solver, system, repeats: int) -> tuple[float, np.ndarray]:
    b = np.ascontiguousarray(system.rhs[:, 0])
    x0 = np.ascontiguousarray(system.warm_start[:, 0])
    best = float("inf")
    x = None
    for _ in range(repeats):
        start = time.perf_counter()
        x, iters, relres = solver(system.indptr, system.indices, system.data,
                                  b, x0, TOL, 10 * system.n)
        best = min(best, time.perf_counter() - start)
        if relres > TOL:
            raise RuntimeError(f"solver did not converge (relres {relres:.2e})")
    return best, x


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per size (best is reported)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    if cg_compiled is None:
        print("compiled kernel not built: timing the NumPy fallback only\n")

    header = f"{'region':>10} {'n':>8} {'numpy':>12}"
    if cg_compiled is not None:
        header += f" {'cython':>12} {'speedup':>9} {'max |dx|':>10}"
    print(header)

    for side in SIZES:
        system = make_system(side, rng)
        t_np, x_np = time_solver(cg_numpy, system, args.repeats)
        row = f"{side}x{side:<5} {system.n:>8} {t_np * 1e3:>10.2f}ms"
        if cg_compiled is not None:
            t_cy, x_cy = time_solver(cg_compiled, system, args.repeats)
            dev = float(np.abs(x_np - x_cy).max())
            row += f" {t_cy * 1e3:>10.2f}ms {t_np / t_cy:>8.1f}x {dev:>10.2e}"
        print(row)


if __name__ == "__main__":
    main()
