"""Conjugate-gradient solver on CSR matrices, pure NumPy backend.

Mirrors the compiled kernel in ``_cg.pyx``: plain CG without preconditioner,
fixed iteration order, no parallel reductions, so a given input always
produces bit-identical output within this backend.
"""

from __future__ import annotations

import numpy as np


def _matvec(indptr: np.ndarray, indices: np.ndarray, data: np.ndarray,
            x: np.ndarray) -> np.ndarray:
    # Every row holds at least the diagonal, so reduceat segments are non-empty.
    return np.add.reduceat(data * x[indices], indptr[:-1])


def cg_csr(indptr: np.ndarray, indices: np.ndarray, data: np.ndarray,
           b: np.ndarray, x0: np.ndarray, tol: float,
           max_iter: int) -> tuple[np.ndarray, int, float]:
    """Solve A x = b for SPD CSR A; returns (x, iterations, relative residual).

    Convergence target is ||b - A x|| <= tol * ||b||, verified against the
    true residual (not only the CG recurrence) before accepting a solution.
    A zero right-hand side short-circuits to the exact solution x = 0.
    """
    b = np.asarray(b, dtype=np.float64)
    bnorm = float(np.sqrt(b @ b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0

    x = np.array(x0, dtype=np.float64, copy=True)
    r = b - _matvec(indptr, indices, data, x)
    rs = float(r @ r)
    if np.sqrt(rs) <= tol * bnorm:
        return x, 0, float(np.sqrt(rs)) / bnorm

    p = r.copy()
    iterations = 0
    while iterations < max_iter:
        ap = _matvec(indptr, indices, data, p)
        alpha = rs / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        iterations += 1
        if np.sqrt(rs_new) <= tol * bnorm:
            # Guard against recurrence drift before declaring convergence.
            r_true = b - _matvec(indptr, indices, data, x)
            rs_true = float(r_true @ r_true)
            if np.sqrt(rs_true) <= tol * bnorm:
                return x, iterations, float(np.sqrt(rs_true)) / bnorm
            r = r_true
            p = r.copy()
            rs = rs_true
            continue
        beta = rs_new / rs
        p = r + beta * p
        rs = rs_new

    r_true = b - _matvec(indptr, indices, data, x)
    return x, iterations, float(np.sqrt(r_true @ r_true)) / bnorm
