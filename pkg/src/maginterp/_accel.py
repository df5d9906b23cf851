"""Numba switch for the hot kernels.

Set ``MAGINTERP_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The flag is read once, at import time.
"""
import os

_FALSE = {"", "0", "false", "no", "off"}

NUMBA_REQUESTED = os.environ.get("MAGINTERP_DISABLE_NUMBA", "0").strip().lower() in _FALSE

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = NUMBA_REQUESTED and _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity decorator otherwise.

    The undecorated function stays reachable as ``.py_func`` in both modes so
    tests and benchmarks can compare the two paths in one process.
    """
    if USE_NUMBA:
        return _numba.njit(*args, **kwargs)

    def wrap(func):
        func.py_func = func
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return wrap(args[0])
    return wrap


def backend_name():
    return "numba" if USE_NUMBA else "python"
