"""Kernel backend selection.

Hot loops (episode stepping, planner sweeps) exist twice: a numba ``@njit``
kernel and a pure-numpy fallback. Setting ``VUCQ_DISABLE_NUMBA=1`` in the
environment, or running without numba installed, selects the fallback.
"""
import os

DISABLE_ENV = "VUCQ_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes")


def njit(fn):
    """Compile ``fn`` with numba when it is importable, else return it unchanged."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
