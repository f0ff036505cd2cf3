"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``SMOOTHCERT_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("SMOOTHCERT_PURE_PYTHON", "") not in ("", "0"):
    _backend = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _backend
        BACKEND = "compiled"
    except ImportError:
        _backend = _kernels_py
        BACKEND = "python"


def get_backend(name=None):
    """Return the kernel module named ``"compiled"`` or ``"python"`` (default: active)."""
    if name is None:
        return _backend
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def ndtr(x, backend=None):
    be = get_backend(backend)
    arr = _f64(x)
    flat = arr.ravel()
    out = np.empty_like(flat)
    be.ndtr(flat, out)
    return out.reshape(arr.shape)


def ndtri(p, backend=None):
    be = get_backend(backend)
    arr = _f64(p)
    flat = arr.ravel()
    out = np.empty_like(flat)
    be.ndtri(flat, out)
    return out.reshape(arr.shape)


def box_counts(points, shift, r, backend=None):
    be = get_backend(backend)
    return be.box_counts(_f64(points), _f64(shift), float(r))


def max_abs_rows(samples, backend=None):
    be = get_backend(backend)
    samples = _f64(samples)
    out = np.empty(samples.shape[0])
    be.max_abs_rows(samples, out)
    return out


def halfspace_labels(points, w, b, backend=None):
    be = get_backend(backend)
    points = _f64(points)
    out = np.empty(points.shape[0], dtype=np.int64)
    be.halfspace_labels(points, _f64(w), float(b), out)
    return out
