"""Vectors, l_p norm orders and standard-normal helpers."""
from __future__ import annotations

import enum
import math
from typing import Union

import numpy as np

from . import kernels


class PInf(enum.Enum):
    """The p = infinity norm order. Kept distinct from floats on purpose."""

    INF = "inf"

    def __str__(self):
        return "inf"


INF = PInf.INF

Order = Union[float, PInf]


def parse_p(value) -> Order:
    """Parse a norm order: a real >= 1, or ``inf``/``INF``."""
    if isinstance(value, PInf):
        return value
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        value = float(value)
    if isinstance(value, float) and math.isinf(value):
        return INF
    p = float(value)
    if not p >= 1.0:
        raise ValueError(f"norm order must be >= 1 or inf, got {value!r}")
    return p


def inv_p(p: Order) -> float:
    """1/p, with 1/inf = 0 exactly."""
    return 0.0 if p is INF else 1.0 / p


def l2_exponent(p: Order) -> float:
    """The exponent 1/2 - 1/p relating l_p and l_2 norms in R^d."""
    return 0.5 - inv_p(p)


def p_label(p: Order) -> str:
    if p is INF:
        return "inf"
    return f"{p:g}"


def lp_norm(v, p: Order) -> float:
    v = np.asarray(v, dtype=float)
    p = parse_p(p)
    if p is INF:
        return float(np.max(np.abs(v))) if v.size else 0.0
    return float(np.linalg.norm(v, ord=p))


class DenseVector:
    """A real d-vector. Thin wrapper around a 1-D float array."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=float).reshape(-1)
        if arr.size < 1:
            raise ValueError("a DenseVector needs dim >= 1")
        arr.setflags(write=False)
        self.entries = arr

    @property
    def dim(self) -> int:
        return self.entries.size

    def lp_norm(self, p: Order) -> float:
        return lp_norm(self.entries, p)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"DenseVector({self.entries.tolist()!r})"


def as_array(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def norm_cdf(x):
    """Standard normal cdf. Scalars in, float out; arrays in, arrays out."""
    if np.ndim(x) == 0:
        return float(kernels.ndtr(np.array([x], dtype=float))[0])
    return kernels.ndtr(x)


def norm_ppf(q):
    """Inverse standard normal cdf (bracketed Newton on the cdf)."""
    if np.ndim(q) == 0:
        return float(kernels.ndtri(np.array([q], dtype=float))[0])
    return kernels.ndtri(q)


def norm_pdf(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)
