"""Solver kernel backends.

Prefers the compiled Cython kernel when it was built; falls back to the
NumPy implementation otherwise. Set ``PADX_KERNEL=numpy`` or
``PADX_KERNEL=cython`` to force a backend (the latter raises if the
extension is not available).
"""

from __future__ import annotations

import os

from padx.kernels.cg_numpy import cg_csr as _cg_numpy

_forced = os.environ.get("PADX_KERNEL", "").strip().lower()

if _forced == "numpy":
    cg_csr = _cg_numpy
    BACKEND = "numpy"
else:
    try:
        from padx.kernels._cg import cg_csr as _cg_compiled

        cg_csr = _cg_compiled
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        cg_csr = _cg_numpy
        BACKEND = "numpy"

__all__ = ["cg_csr", "BACKEND"]
