"""Numba toggle shared by the hot kernels.

Set ``EXPLOREBUG_NO_NUMBA=1`` to force the pure-numpy/Python fallbacks. The
flag is read once at import time.
"""
import os

_FLAG = os.environ.get("EXPLOREBUG_NO_NUMBA", "").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """``numba.njit(cache=True)`` when available, else the function itself."""
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
