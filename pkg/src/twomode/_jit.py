"""Numba switch.

Kernels are written in the subset of Python/numpy that numba compiles.  Set
``TWOMODE_DISABLE_NUMBA=1`` to run them uncompiled (useful for debugging and
for the benchmark comparison); the results are identical up to rounding.
"""

import logging
import os

logger = logging.getLogger(__name__)

_FLAG = os.environ.get("TWOMODE_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError("disabled by TWOMODE_DISABLE_NUMBA")
    import numba

    USE_NUMBA = True
except ImportError as exc:  # pragma: no cover - depends on environment
    if not DISABLED:
        logger.warning("numba unavailable (%s); using the pure-numpy path", exc)
    USE_NUMBA = False


def njit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` or a no-op when numba is off."""
    def wrap(f):
        if not USE_NUMBA:
            return f
        opts = {"cache": True, "nogil": True}
        opts.update(kwargs)
        return numba.njit(**opts)(f)

    return wrap if func is None else wrap(func)
