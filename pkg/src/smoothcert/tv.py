"""Total variation distance between a noise distribution and its translate.

Closed forms for the isotropic Gaussian and the uniform l_inf box, the
two-sided linear bracket for Gaussians, a generic density-ratio Monte Carlo
estimator, and the largest mass any interval of fixed width can carry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .noise import (
    Estimate,
    IIDProduct,
    IsotropicGaussian,
    NoiseDistribution,
    OneDimLaw,
    UniformBox,
    GaussianLaw,
    UniformLaw,
    batched,
)
from .norms import as_array, norm_cdf, norm_ppf

EXACT = "exact"
BRACKET = "bracket"
MONTE_CARLO = "monte-carlo"

GAUSS_BRACKET_LO = 1.0 / 200.0
GAUSS_BRACKET_HI = 9.0 / 2.0


@dataclass(frozen=True)
class TVResult:
    value: float
    lo: float
    hi: float
    provenance: str
    n: Optional[int] = None
    ci_level: Optional[float] = None
    bracket: Optional[tuple[float, float]] = field(default=None)

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.value <= self.hi <= 1.0):
            raise ValueError(f"inconsistent TV result {self!r}")
        if self.provenance == EXACT and not (self.lo == self.value == self.hi):
            raise ValueError("an exact TV result must have lo == value == hi")

    @classmethod
    def exact(cls, value, bracket=None):
        value = min(1.0, max(0.0, float(value)))
        return cls(value, value, value, EXACT, bracket=bracket)

    @property
    def is_exact(self):
        return self.provenance == EXACT

    def as_dict(self):
        d = {"value": self.value, "lo": self.lo, "hi": self.hi, "provenance": self.provenance}
        if self.n is not None:
            d["n"] = self.n
            d["ci_level"] = self.ci_level
        if self.bracket is not None:
            d["bracket"] = list(self.bracket)
        return d


def _gauss_tv_value(x: float) -> float:
    # 2 Phi(x) - 1 written as 1 - 2 Phi(-x) keeps precision for large x
    if x <= 1.0:
        return 2.0 * norm_cdf(x) - 1.0
    return 1.0 - 2.0 * norm_cdf(-x)


def gaussian_bracket(sigma: float, v_norm2: float) -> tuple[float, float]:
    """Linear bracket [m/200, 9m/2] with m = min(1, ||v||/sigma)."""
    m = min(1.0, v_norm2 / sigma)
    return GAUSS_BRACKET_LO * m, GAUSS_BRACKET_HI * m


def tv_gaussian_shift(sigma: float, v_norm2: float) -> TVResult:
    """tv(N(0, s^2 I), N(v, s^2 I)) = 2 Phi(||v|| / 2s) - 1, with the bracket attached."""
    sigma, v_norm2 = float(sigma), float(v_norm2)
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be > 0, got {sigma!r}")
    if not (v_norm2 >= 0.0 and math.isfinite(v_norm2)):
        raise ValueError(f"shift norm must be finite and >= 0, got {v_norm2!r}")
    return TVResult.exact(_gauss_tv_value(v_norm2 / (2.0 * sigma)),
                          bracket=gaussian_bracket(sigma, v_norm2))


def tv_uniform_box_shift(r: float, v) -> TVResult:
    """tv(U_r, U_r + v) = 1 - prod_i max(0, 1 - |v_i| / 2r)."""
    r = float(r)
    if not r > 0.0:
        raise ValueError(f"r must be > 0, got {r!r}")
    v = as_array(v)
    overlap = np.prod(np.maximum(0.0, 1.0 - np.abs(v) / (2.0 * r)))
    return TVResult.exact(1.0 - overlap)


def tv_uniform_box_worst_shift(r: float, d: int, eps: float) -> TVResult:
    """Largest tv(U_r, U_r + v) over ||v||_inf <= eps, attained at v = (eps, ..., eps)."""
    r, eps = float(r), float(eps)
    if not r > 0.0:
        raise ValueError(f"r must be > 0, got {r!r}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps!r}")
    z = eps / (2.0 * r)
    value = 1.0 if z >= 1.0 else min(1.0, -math.expm1(d * math.log1p(-z)))
    if eps <= r:
        lo = -math.expm1(-d * z)
        hi = 1.0 - 4.0 ** (-d * z)
        assert lo - 1e-12 <= value <= hi + 1e-12, (lo, value, hi)
    return TVResult.exact(value)


def _z_for(ci_level: float) -> float:
    return norm_ppf(0.5 + 0.5 * ci_level)


def tv_monte_carlo(dist: NoiseDistribution, v, n: int, seed, ci_level: float = 0.999) -> TVResult:
    """Estimate tv(D, D + v) = E_{x~D} max(0, 1 - q(x)/p(x)), q the density of D + v.

    Equals 1/2 E|1 - q/p| when D and D + v share a support, and stays
    correct when they do not (the uniform box).
    """
    v = as_array(v)
    if v.size != dist.d:
        raise ValueError(f"shift has dimension {v.size}, distribution has {dist.d}")
    if not dist.has_density():
        raise TypeError(
            "tv_monte_carlo needs a density ratio; this distribution only has a sampler "
            "(a classifier two-sample lower bound would be needed and is not provided)")
    if not np.any(v):
        return TVResult(0.0, 0.0, 0.0, MONTE_CARLO, n=n, ci_level=ci_level)
    total = 0.0
    total_sq = 0.0
    for rng, m in batched(seed, n):
        x = dist._draw(rng, m)
        if isinstance(dist, UniformBox):
            _, in_b, _ = kernels.box_counts(x, v, dist.r)
            # the ratio is 1 inside the shifted box and 0 outside
            term_sum = term_sq = float(m - in_b)
        else:
            log_ratio = dist.logpdf(x - v) - dist.logpdf(x)
            terms = np.maximum(0.0, -np.expm1(log_ratio))
            term_sum = float(terms.sum())
            term_sq = float(np.square(terms).sum())
        total += term_sum
        total_sq += term_sq
    mean = total / n
    var = max(0.0, total_sq / n - mean * mean)
    half = _z_for(ci_level) * math.sqrt(var / n) if n > 1 else 1.0
    value = min(1.0, max(0.0, mean))
    return TVResult(value, max(0.0, value - half), min(1.0, value + half), MONTE_CARLO,
                    n=n, ci_level=ci_level)


def tv_shift(dist: NoiseDistribution, v, allow_mc: bool = False, n: int = 200_000,
             seed=0, ci_level: float = 0.999) -> Optional[TVResult]:
    """tv(D, D + v): exact where a closed form exists, else Monte Carlo if allowed, else None."""
    v = as_array(v)
    if v.size != dist.d:
        raise ValueError(f"shift has dimension {v.size}, distribution has {dist.d}")
    if isinstance(dist, IsotropicGaussian):
        return tv_gaussian_shift(dist.sigma, float(np.linalg.norm(v)))
    if isinstance(dist, UniformBox):
        return tv_uniform_box_shift(dist.r, v)
    if isinstance(dist, IIDProduct):
        law = dist.marginal_law
        if isinstance(law, GaussianLaw):
            return tv_gaussian_shift(law.sigma, float(np.linalg.norm(v)))
        if isinstance(law, UniformLaw):
            return tv_uniform_box_shift(law.r, v)
        if dist.d == 1 and law.tv_shift(v[0]) is not None:
            return TVResult.exact(law.tv_shift(v[0]))
    if not allow_mc:
        return None
    return tv_monte_carlo(dist, v, n, seed, ci_level)


def tv_law_shift(law: OneDimLaw, eps: float, allow_mc: bool = True, n: int = 200_000,
                 seed=0) -> Optional[TVResult]:
    """tv(law, law + eps) for a one-dimensional law."""
    exact = law.tv_shift(eps)
    if exact is not None:
        return TVResult.exact(exact)
    return tv_shift(IIDProduct(law, 1), [eps], allow_mc=allow_mc, n=n, seed=seed)


# -- interval mass -------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _quantile_span(law: OneDimLaw, tail: float = 1e-12) -> tuple[float, float]:
    lo, hi = -1.0, 1.0
    while float(law.cdf(lo)) > tail and lo > -1e12:
        lo *= 2.0
    while float(law.cdf(hi)) < 1.0 - tail and hi < 1e12:
        hi *= 2.0
    return lo, hi


def _golden_max(f, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def max_interval_mass(law: OneDimLaw, eps: float, grid: int = 4001, tol: float = 1e-6) -> Estimate:
    """sup_a P(a <= X < a + eps).

    Laws with a cdf: grid search over left endpoints then golden-section
    refinement around the best cell. Laws known only by samples: the
    maximum over windows starting at sample points of the cached sample,
    reported as a Monte Carlo estimate.
    """
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError(f"eps must be > 0, got {eps!r}")
    if not law.has_cdf():
        xs = law._sorted
        counts = np.searchsorted(xs, xs + eps, side="left") - np.arange(xs.size)
        m = float(counts.max()) / xs.size
        return Estimate(m, exact=False, stderr=math.sqrt(max(m * (1 - m), 1.0 / xs.size) / xs.size),
                        n=xs.size)
    lo, hi = _quantile_span(law)
    grid = min(200_001, max(grid, int(20 * (hi - lo + eps) / eps)))
    starts = np.linspace(lo - eps, hi, grid)
    masses = np.asarray(law.cdf(starts + eps)) - np.asarray(law.cdf(starts))
    i = int(np.argmax(masses))
    a, b = starts[max(i - 1, 0)], starts[min(i + 1, grid - 1)]

    def mass(t):
        return float(law.cdf(t + eps)) - float(law.cdf(t))

    _, best = _golden_max(mass, a, b, tol * max(1.0, eps) * 1e-3)
    return Estimate(min(1.0, max(best, float(masses[i]))))
