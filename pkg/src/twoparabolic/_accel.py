"""Optional numba compilation for the integer kernels.

Kernels are written once in the numba-compatible subset of Python.  They are
compiled with ``numba.njit`` unless ``TWOPARABOLIC_NO_JIT=1`` is set (or numba
is missing), in which case the plain Python function runs on numpy arrays.
Both paths produce identical results; ``benchmarks/bench_kernels.py`` times them.
"""

from __future__ import annotations

import os

try:  # pragma: no cover - import guard
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

JIT_ENABLED = _numba is not None and os.environ.get("TWOPARABOLIC_NO_JIT", "") not in ("1", "true", "yes")


def kernel(fn):
    """Compile ``fn`` with njit when enabled; ``.py_func`` is always the pure version."""
    if JIT_ENABLED:
        return _numba.njit(cache=False, nogil=True)(fn)  # lets search workers overlap
    fn.py_func = fn
    return fn


def backend_name() -> str:
    return "numba" if JIT_ENABLED else "python"
