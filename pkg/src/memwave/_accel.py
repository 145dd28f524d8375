"""Optional numba acceleration.

Set ``MEMWAVE_DISABLE_NUMBA=1`` to force the pure-numpy code paths even when
numba is installed.  The flag is read once, at import time.
"""
import os

_FLAG = os.environ.get("MEMWAVE_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

# The TBB layer found on some systems is too old and only produces a warning
# before numba falls back; try it last unless the user chose an order.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

try:
    if _DISABLED:
        raise ImportError
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if HAVE_NUMBA else "numpy"


def set_threads(n):
    """Set the numba worker count (ignored on the numpy backend)."""
    if n is None or not HAVE_NUMBA:
        return
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
