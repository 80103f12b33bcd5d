"""Kernel backend selection.

Set ``TRANSRATE_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The
numba kernels are also skipped when numba cannot be imported.
"""
import logging
import os

log = logging.getLogger(__name__)

_disabled = os.environ.get("TRANSRATE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

if _disabled:
    from . import _kernels_numpy as kernels
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as kernels
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        log.warning("numba unavailable, using numpy kernels")
        from . import _kernels_numpy as kernels
        BACKEND = "numpy"

__all__ = ["kernels", "BACKEND"]
