"""Optional numba acceleration.

Set ``LOGSL_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""
import logging
import os

logger = logging.getLogger(__name__)

_DISABLED = os.environ.get("LOGSL_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba

    HAVE_NUMBA = True
    njit = numba.njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


USE_NUMBA = HAVE_NUMBA and not _DISABLED

if _DISABLED:
    logger.debug("numba disabled by LOGSL_DISABLE_NUMBA; using numpy kernels")
