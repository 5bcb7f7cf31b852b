"""Gradient-field fusion: seamless blending via a discrete Poisson solve.

A source patch ``g`` is pasted into a target ``f*`` over a region Omega by
solving, per channel, the 4-neighbor discretization of

    laplacian(f) = div(grad g)  over Omega,   f = f* on the outer boundary,

so boundary intensities match the target while interior gradients follow the
source. For every region pixel q the stencil reads

    4 f_q - sum_{r in N(q), r in Omega} f_r
        = sum_{r in N(q), r not in Omega} f*_r + sum_{r in N(q)} (g_q - g_r)

with N(q) the 4-neighborhood in target coordinates (always complete, because
the region must sit strictly inside the target). Dirichlet values f* are read
from the target for every neighbor outside the region, so the system is
symmetric positive definite for every mask, including the full-rectangle
masks the augmentation pipeline uses. The guidance sum runs over neighbors
where the source is defined; across the source-raster edge the source
gradient does not exist and contributes nothing.

A consequence worth knowing: pasting a patch back onto its own origin is an
exact no-op whenever the region keeps a 1-pixel ring inside the source
raster (so the source determines its own boundary gradients); with a
full-rectangle mask the dropped edge gradients make the operation a genuine
re-blend instead.

Arithmetic stays in float64 until the final clamp-and-round to 8 bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from padx.core import BinaryMask, ImageBuffer
from padx.errors import BoundaryViolationError, ConvergenceError
from padx.kernels import cg_csr

DEFAULT_TOL = 1e-8
DENSE_ORACLE_CAP = 4096

# Stencil neighbor order chosen so CSR column indices come out sorted
# (row-major unknown numbering: up < left < self < right < down).
_NEIGHBORS = ((0, -1), (-1, 0), (1, 0), (0, 1))


@dataclass(frozen=True)
class BlendProblem:
    """Target raster, source patch, region mask (source coordinates), offset.

    ``offset`` maps source pixel (x, y) to target pixel (x + dx, y + dy).
    The region must land strictly inside the target: no region pixel may touch
    the target border, so every boundary neighbor is a real target pixel.
    """

    target: ImageBuffer
    source: ImageBuffer
    mask: BinaryMask
    offset: tuple[int, int]

    def __post_init__(self) -> None:
        if (self.mask.width, self.mask.height) != (self.source.width, self.source.height):
            raise ValueError(
                f"mask {self.mask.width}x{self.mask.height} does not match "
                f"source {self.source.width}x{self.source.height}"
            )
        if self.source.channels != self.target.channels:
            raise ValueError(
                f"source has {self.source.channels} channel(s) "
                f"but target has {self.target.channels}"
            )
        dx, dy = self.offset
        ys, xs = np.nonzero(self.mask.bits)
        tx_min = int(xs.min()) + dx
        tx_max = int(xs.max()) + dx
        ty_min = int(ys.min()) + dy
        ty_max = int(ys.max()) + dy
        if tx_min < 1 or ty_min < 1 or tx_max > self.target.width - 2 \
                or ty_max > self.target.height - 2:
            raise BoundaryViolationError(
                "region must lie strictly inside the target (1-pixel ring free): "
                f"region spans x [{tx_min}, {tx_max}], y [{ty_min}, {ty_max}] in a "
                f"{self.target.width}x{self.target.height} target"
            )


@dataclass(frozen=True)
class SparseSystem:
    """SPD Laplacian over the region pixels, in CSR form, plus per-channel data.

    ``xs``/``ys`` list the region pixels (source coordinates) in row-major
    order; unknown i corresponds to pixel (xs[i], ys[i]). ``warm_start``
    carries the source intensities used as the CG initial guess.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    rhs: np.ndarray          # (n, channels)
    warm_start: np.ndarray   # (n, channels)
    xs: np.ndarray
    ys: np.ndarray
    index_grid: np.ndarray = field(repr=False)  # (h, w) int32, -1 outside region


def build_system(p: BlendProblem) -> SparseSystem:
    """Assemble the CSR Laplacian and per-channel right-hand sides."""
    bits = p.mask.bits
    h, w = bits.shape
    dx, dy = p.offset
    src = p.source.pixels.astype(np.float64)
    tgt = p.target.pixels.astype(np.float64)
    channels = src.shape[2]

    ys, xs = np.nonzero(bits)
    n = xs.size
    index_grid = np.full((h, w), -1, dtype=np.int32)
    index_grid[ys, xs] = np.arange(n, dtype=np.int32)

    g_center = src[ys, xs]  # (n, c)
    rhs = np.zeros((n, channels), dtype=np.float64)

    # Per-direction neighbor classification shared by matrix and RHS assembly.
    neighbor_idx = []
    for ddx, ddy in _NEIGHBORS:
        nx = xs + ddx
        ny = ys + ddy
        in_raster = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
        nxc = np.clip(nx, 0, w - 1)
        nyc = np.clip(ny, 0, h - 1)
        in_region = in_raster & bits[nyc, nxc]
        cols = np.where(in_region, index_grid[nyc, nxc], -1).astype(np.int32)
        neighbor_idx.append(cols)

        # Target values at the neighbor's offset position (always valid:
        # the region sits strictly inside the target).
        t_vals = tgt[ny + dy, nx + dx]
        # Guidance field grad g where the source raster defines it.
        g_nb = src[nyc, nxc]
        rhs += np.where(in_raster[:, None], g_center - g_nb, 0.0)
        # Dirichlet contribution wherever the neighbor is outside the region.
        rhs += np.where(in_region[:, None], 0.0, t_vals)

    # CSR assembly. Row layout: off-diagonals above/left, diagonal,
    # off-diagonals right/below -- column indices are already sorted.
    cols_mat = np.stack(
        [neighbor_idx[0], neighbor_idx[1],
         np.arange(n, dtype=np.int32),
         neighbor_idx[2], neighbor_idx[3]],
        axis=1,
    )
    vals_mat = np.full((n, 5), -1.0)
    vals_mat[:, 2] = 4.0
    keep = cols_mat >= 0
    counts = keep.sum(axis=1)
    indptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(counts, out=indptr[1:])
    indices = cols_mat[keep].astype(np.int32)
    data = vals_mat[keep]

    return SparseSystem(
        n=n, indptr=indptr, indices=indices, data=data,
        rhs=rhs, warm_start=g_center.copy(),
        xs=xs.astype(np.int32), ys=ys.astype(np.int32),
        index_grid=index_grid,
    )


def solve_cg(sys: SparseSystem, tol: float = DEFAULT_TOL,
             max_iter: int | None = None) -> np.ndarray:
    """Conjugate-gradient solve per channel; returns (n, channels) float64.

    Warm-started from the source intensities. Raises ConvergenceError with
    the final relative residual if any channel misses tol within max_iter
    (default 10 * n) iterations.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if max_iter is None:
        max_iter = 10 * sys.n
    out = np.empty_like(sys.rhs)
    for c in range(sys.rhs.shape[1]):
        x, iterations, relres = cg_csr(
            sys.indptr, sys.indices, sys.data,
            np.ascontiguousarray(sys.rhs[:, c]),
            np.ascontiguousarray(sys.warm_start[:, c]),
            tol, max_iter,
        )
        if relres > tol:
            raise ConvergenceError(
                f"CG did not converge on channel {c}: relative residual "
                f"{relres:.3e} > {tol:.3e} after {iterations} iterations"
            )
        out[:, c] = x
    return out


def dense_solve_oracle(sys: SparseSystem) -> np.ndarray:
    """Exact dense factorization solve; test oracle, capped at n = 4096."""
    if sys.n > DENSE_ORACLE_CAP:
        raise ValueError(f"dense oracle capped at n={DENSE_ORACLE_CAP}, got n={sys.n}")
    dense = np.zeros((sys.n, sys.n))
    for i in range(sys.n):
        for k in range(sys.indptr[i], sys.indptr[i + 1]):
            dense[i, sys.indices[k]] = sys.data[k]
    return np.linalg.solve(dense, sys.rhs)


def blend(p: BlendProblem, tol: float = DEFAULT_TOL,
          max_iter: int | None = None) -> ImageBuffer:
    """Solve the blend problem and composite the result into the target."""
    system = build_system(p)
    solution = solve_cg(system, tol=tol, max_iter=max_iter)
    out = p.target.pixels.copy()
    dx, dy = p.offset
    quantized = np.rint(np.clip(solution, 0.0, 255.0)).astype(np.uint8)
    out[system.ys + dy, system.xs + dx] = quantized
    return ImageBuffer(out)
