"""Backend selection for the hot kernels.

Set ``SOLYANIK_BACKEND=numpy`` to force the pure-numpy path. Any other value
(or unset) uses numba when it can be imported.
"""
import os

BACKEND_ENV = "SOLYANIK_BACKEND"

_requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _njit = None


def njit(func):
    """``numba.njit(cache=True, nogil=True)``, or the identity without numba."""
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
