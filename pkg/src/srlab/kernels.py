"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is used. Setting ``SRLAB_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("SRLAB_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
exhaustive_search = (_compiled or _kernels_py).exhaustive_search
near_max_supports = (_compiled or _kernels_py).near_max_supports


def backends():
    """Mapping of available backend name -> kernel module."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
