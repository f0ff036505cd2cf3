# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature; ``smoothcert.kernels`` picks one at import time.
"""

from libc.math cimport erfc, exp, log, sqrt, fabs, INFINITY, NAN, isnan

cdef double SQRT1_2 = 0.70710678118654752440
cdef double LOG_SQRT_2PI = 0.91893853320467274178
cdef double PPF_LO = -39.0


cdef inline double _ndtr(double x) nogil:
    return 0.5 * erfc(-x * SQRT1_2)


cdef inline double _lower_tail_guess(double q) nogil:
    # Abramowitz-Stegun 26.2.23, |error| < 4.5e-4; only a Newton seed
    cdef double t = sqrt(-2.0 * log(q))
    return -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
             / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t))


cdef double _ndtri_lower(double q) nogil:
    """Solve Phi(x) = q for q in (0, 0.5], x <= 0, by bracketed Newton on log Phi."""
    cdef double lo = PPF_LO, hi = 0.0
    cdef double x = _lower_tail_guess(q)
    cdef double logq = log(q)
    cdef double cdf, g, step, xn
    cdef int it
    if x < lo or x > hi:
        x = 0.5 * (lo + hi)
    for it in range(200):
        cdf = _ndtr(x)
        g = log(cdf) - logq
        if g > 0.0:
            hi = x
        elif g < 0.0:
            lo = x
        else:
            return x
        # d/dx log Phi(x) = phi(x) / Phi(x)
        step = g * cdf / exp(-0.5 * x * x - LOG_SQRT_2PI)
        xn = x - step
        if xn <= lo or xn >= hi:
            xn = 0.5 * (lo + hi)
        if fabs(xn - x) <= 1e-15 * (1.0 + fabs(x)):
            return xn
        x = xn
    return x


cdef inline double _ndtri(double p) nogil:
    if isnan(p) or p < 0.0 or p > 1.0:
        return NAN
    if p == 0.0:
        return -INFINITY
    if p == 1.0:
        return INFINITY
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return _ndtri_lower(p)
    return -_ndtri_lower(1.0 - p)


def ndtr(const double[::1] x, double[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(x.shape[0]):
            out[i] = _ndtr(x[i])


def ndtri(const double[::1] p, double[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(p.shape[0]):
            out[i] = _ndtri(p[i])


def box_counts(const double[:, ::1] points, const double[::1] shift, double r):
    """Return (#in B(0,r), #in B(shift,r), #in both) for the rows of ``points``."""
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1], i, j
    cdef long long in_a = 0, in_b = 0, both = 0
    cdef bint a, b
    cdef double xj
    with nogil:
        for i in range(n):
            a = True
            b = True
            for j in range(d):
                xj = points[i, j]
                if fabs(xj) > r:
                    a = False
                if fabs(xj - shift[j]) > r:
                    b = False
                if not a and not b:
                    break
            if a:
                in_a += 1
            if b:
                in_b += 1
            if a and b:
                both += 1
    return in_a, in_b, both


def max_abs_rows(const double[:, ::1] samples, double[::1] out):
    cdef Py_ssize_t n = samples.shape[0], d = samples.shape[1], i, j
    cdef double m, a
    with nogil:
        for i in range(n):
            m = 0.0
            for j in range(d):
                a = fabs(samples[i, j])
                if a > m:
                    m = a
            out[i] = m


def halfspace_labels(const double[:, ::1] points, const double[::1] w, double b,
                     long long[::1] out):
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1], i, j
    cdef double s
    with nogil:
        for i in range(n):
            s = b
            for j in range(d):
                s += points[i, j] * w[j]
            out[i] = 1 if s > 0.0 else 0
