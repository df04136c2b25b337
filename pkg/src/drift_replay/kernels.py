"""Kernel dispatch.

The compiled extension ``drift_replay._kernels`` is used when it was built;
otherwise the numpy implementations in ``_kernels_py`` are used. Setting
``DRIFT_REPLAY_PURE=1`` forces the fallback.

All kernels take C-contiguous float64 arrays and int64 row indices; the thin
wrappers below normalise their inputs so callers can pass views.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DRIFT_REPLAY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def scatter_add_rows(table, idx, rows, impl=None):
    """``table[idx[n]] += rows[n]`` in place; ``table`` must be C-contiguous float64."""
    if not (table.flags.c_contiguous and table.dtype == np.float64):
        raise TypeError("table must be a C-contiguous float64 array")
    (impl or _impl).scatter_add_rows(table, _idx(idx), _f64(rows))


def gather_rowdot(table, idx, rows, impl=None):
    return (impl or _impl).gather_rowdot(_f64(table), _idx(idx), _f64(rows))


def outer_dot(a, delta, V, impl=None):
    return (impl or _impl).outer_dot(_f64(a), _f64(delta), _f64(V))


def implementations():
    """Map backend name to module for every backend available in this build."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return out
    out["compiled"] = compiled
    return out
