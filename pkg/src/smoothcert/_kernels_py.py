"""Numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and the same algorithms, vectorized where the compiled
version loops.
"""
import numpy as np
from scipy.special import erfc

SQRT1_2 = 0.70710678118654752440
LOG_SQRT_2PI = 0.91893853320467274178
PPF_LO = -39.0


def _ndtr(x):
    return 0.5 * erfc(-x * SQRT1_2)


def ndtr(x, out):
    out[:] = _ndtr(np.asarray(x))


def _lower_tail_guess(q):
    t = np.sqrt(-2.0 * np.log(q))
    return -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
             / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t))


def _ndtri_lower(q):
    lo = np.full_like(q, PPF_LO)
    hi = np.zeros_like(q)
    x = np.clip(_lower_tail_guess(q), PPF_LO, 0.0)
    logq = np.log(q)
    active = np.ones(q.shape, dtype=bool)
    for _ in range(200):
        if not active.any():
            break
        xa = x[active]
        cdf = _ndtr(xa)
        with np.errstate(divide="ignore"):
            g = np.log(cdf) - logq[active]
        lo_a, hi_a = lo[active], hi[active]
        hi_a = np.where(g > 0.0, xa, hi_a)
        lo_a = np.where(g < 0.0, xa, lo_a)
        with np.errstate(over="ignore", invalid="ignore"):
            step = g * cdf / np.exp(-0.5 * xa * xa - LOG_SQRT_2PI)
        xn = xa - step
        outside = ~((xn > lo_a) & (xn < hi_a)) & (g != 0.0)
        xn = np.where(outside, 0.5 * (lo_a + hi_a), xn)
        xn = np.where(g == 0.0, xa, xn)
        done = (g == 0.0) | (np.abs(xn - xa) <= 1e-15 * (1.0 + np.abs(xa)))
        lo[active], hi[active], x[active] = lo_a, hi_a, xn
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return x


def ndtri(p, out):
    p = np.asarray(p, dtype=float)
    res = np.full(p.shape, np.nan)
    res[p == 0.0] = -np.inf
    res[p == 1.0] = np.inf
    res[p == 0.5] = 0.0
    low = (p > 0.0) & (p < 0.5)
    high = (p > 0.5) & (p < 1.0)
    if low.any():
        res[low] = _ndtri_lower(p[low])
    if high.any():
        res[high] = -_ndtri_lower(1.0 - p[high])
    out[:] = res


def box_counts(points, shift, r):
    points = np.asarray(points)
    in_a = np.all(np.abs(points) <= r, axis=1)
    in_b = np.all(np.abs(points - np.asarray(shift)) <= r, axis=1)
    return int(in_a.sum()), int(in_b.sum()), int((in_a & in_b).sum())


def max_abs_rows(samples, out):
    out[:] = np.abs(np.asarray(samples)).max(axis=1)


def halfspace_labels(points, w, b, out):
    out[:] = (np.asarray(points) @ np.asarray(w) + b > 0.0).astype(np.int64)
