"""Smoothing distributions: one-dimensional laws and d-dimensional noise.

All randomness goes through ``numpy.random.Generator`` objects built from
caller-supplied seeds. Sampling is split into fixed-size batches, each with
its own substream spawned from the master seed, so the output never
depends on how the batches are scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .norms import as_array, norm_cdf

SAMPLE_BATCH = 1 << 16


@dataclass(frozen=True)
class Estimate:
    """A scalar that is either exact or a Monte Carlo mean with standard error."""

    value: float
    exact: bool = True
    stderr: float = 0.0
    n: Optional[int] = None

    def __float__(self):
        return float(self.value)

    def ci(self, z: float = 3.0) -> tuple[float, float]:
        return self.value - z * self.stderr, self.value + z * self.stderr

    def as_dict(self):
        return {"value": self.value, "exact": self.exact, "stderr": self.stderr, "n": self.n}


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed, k: int) -> list[np.random.SeedSequence]:
    """Derive ``k`` independent child seeds from a master seed."""
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    elif isinstance(seed, np.random.Generator):
        ss = np.random.SeedSequence(int(seed.integers(2**63)))
    else:
        ss = np.random.SeedSequence(seed)
    return ss.spawn(k)


def batched(seed, n: int, batch: int = SAMPLE_BATCH):
    """Yield ``(generator, size)`` pairs covering ``n`` draws in fixed batches."""
    if n < 1:
        raise ValueError(f"need n >= 1 draws, got {n}")
    if isinstance(seed, np.random.Generator):
        yield seed, n
        return
    k = -(-n // batch)
    for i, child in enumerate(spawn_seeds(seed, k)):
        yield np.random.default_rng(child), min(batch, n - i * batch)


def _positive(name, value):
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite real > 0, got {value!r}")
    return value


def _dimension(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


# -- one-dimensional laws --------------------------------------------------

class OneDimLaw:
    """A law on the real line. Subclasses fill in what they know exactly."""

    name = "law"
    symmetric = True
    unimodal = True

    def sample(self, rng, size) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def has_cdf(self) -> bool:
        return True

    def has_density(self) -> bool:
        return True

    def logpdf(self, x):
        raise NotImplementedError

    def second_moment(self) -> Estimate:
        raise NotImplementedError

    def mean_abs(self) -> Estimate:
        raise NotImplementedError

    def tail(self, x):
        """P(|X| > x) for x >= 0."""
        x = np.asarray(x, dtype=float)
        return 1.0 - (np.asarray(self.cdf(x)) - np.asarray(self.cdf(-x)))

    def tv_shift(self, eps: float) -> Optional[float]:
        """Exact tv(law, law + eps) when a closed form is known, else None."""
        return None

    def spec(self) -> str:
        raise NotImplementedError


class GaussianLaw(OneDimLaw):
    name = "gauss"

    def __init__(self, sigma: float):
        self.sigma = _positive("sigma", sigma)

    def sample(self, rng, size):
        return rng.normal(0.0, self.sigma, size)

    def cdf(self, x):
        return norm_cdf(np.asarray(x, dtype=float) / self.sigma)

    def tail(self, x):
        return 2.0 * norm_cdf(-np.abs(np.asarray(x, dtype=float)) / self.sigma)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return -0.5 * (x / self.sigma) ** 2 - math.log(self.sigma * math.sqrt(2 * math.pi))

    def second_moment(self):
        return Estimate(self.sigma**2)

    def mean_abs(self):
        return Estimate(self.sigma * math.sqrt(2.0 / math.pi))

    def tv_shift(self, eps):
        return 2.0 * norm_cdf(abs(eps) / (2.0 * self.sigma)) - 1.0

    def spec(self):
        return f"gauss:sigma={self.sigma!r}"


class UniformLaw(OneDimLaw):
    """Uniform on [-r, r]."""

    name = "uniform"

    def __init__(self, r: float):
        self.r = _positive("r", r)

    def sample(self, rng, size):
        return rng.uniform(-self.r, self.r, size)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) + self.r) / (2 * self.r), 0.0, 1.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.r, -math.log(2 * self.r), -np.inf)

    def second_moment(self):
        return Estimate(self.r**2 / 3.0)

    def mean_abs(self):
        return Estimate(self.r / 2.0)

    def tv_shift(self, eps):
        return min(1.0, abs(eps) / (2.0 * self.r))

    def spec(self):
        return f"uniform:r={self.r!r}"


class LaplaceLaw(OneDimLaw):
    name = "laplace"

    def __init__(self, b: float):
        self.b = _positive("b", b)

    def sample(self, rng, size):
        return rng.laplace(0.0, self.b, size)

    def cdf(self, x):
        z = np.asarray(x, dtype=float) / self.b
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))

    def logpdf(self, x):
        return -np.abs(np.asarray(x, dtype=float)) / self.b - math.log(2 * self.b)

    def second_moment(self):
        return Estimate(2.0 * self.b**2)

    def mean_abs(self):
        return Estimate(self.b)

    def spec(self):
        return f"laplace:b={self.b!r}"


class ParetoTailLaw(OneDimLaw):
    """Symmetric law with P(|X| > x) = min(1, (scale/x)^k)."""

    name = "pareto"
    unimodal = False

    def __init__(self, k: float, scale: float = 1.0):
        self.k = _positive("k", k)
        self.scale = _positive("scale", scale)

    def sample(self, rng, size):
        mag = self.scale * rng.random(size) ** (-1.0 / self.k)
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * mag

    def tail(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, (self.scale / x) ** self.k)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        half = 0.5 * self.tail(x)
        return np.where(x < 0, half, 1.0 - half)

    def logpdf(self, x):
        a = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            val = (math.log(0.5 * self.k) + self.k * math.log(self.scale)
                   - (self.k + 1.0) * np.log(a))
        return np.where(a >= self.scale, val, -np.inf)

    def second_moment(self):
        if self.k <= 2:
            return Estimate(math.inf)
        return Estimate(self.k * self.scale**2 / (self.k - 2.0))

    def mean_abs(self):
        if self.k <= 1:
            return Estimate(math.inf)
        return Estimate(self.k * self.scale / (self.k - 1.0))

    def spec(self):
        return f"pareto:k={self.k!r},scale={self.scale!r}"


class EmpiricalLaw(OneDimLaw):
    """A law known only through a sampler ``sampler(rng, size) -> array``.

    Moments and the cdf come from a cached Monte Carlo sample and are never
    reported as exact.
    """

    name = "empirical"
    unimodal = False

    def __init__(self, sampler: Callable, n_cache: int = 100_000, seed=0, symmetric=False):
        self.sampler = sampler
        self.n_cache = int(n_cache)
        self.symmetric = symmetric
        draws = np.asarray(sampler(make_rng(seed), self.n_cache), dtype=float)
        self._sorted = np.sort(draws)
        sq = draws**2
        ab = np.abs(draws)
        self._m2 = Estimate(float(sq.mean()), False, float(sq.std(ddof=1) / math.sqrt(draws.size)), draws.size)
        self._m1 = Estimate(float(ab.mean()), False, float(ab.std(ddof=1) / math.sqrt(draws.size)), draws.size)

    def sample(self, rng, size):
        return np.asarray(self.sampler(rng, size), dtype=float)

    def has_cdf(self):
        return False

    def has_density(self):
        return False

    def cdf(self, x):
        """Empirical cdf of the cached sample (resolution 1/n_cache)."""
        return np.searchsorted(self._sorted, np.asarray(x, dtype=float), side="right") / self._sorted.size

    def logpdf(self, x):
        raise TypeError("an empirical law has no density")

    def second_moment(self):
        return self._m2

    def mean_abs(self):
        return self._m1

    def spec(self):
        return "empirical"


# -- d-dimensional smoothing distributions ---------------------------------

class NoiseDistribution:
    """A noise distribution on R^d. Immutable after construction."""

    kind = "noise"

    def __init__(self, d):
        self.d = _dimension(d)

    def _draw(self, rng, size) -> np.ndarray:
        raise NotImplementedError

    def sample(self, seed, n: int) -> np.ndarray:
        """Return an ``(n, d)`` array of i.i.d. draws; same seed, same bits."""
        return np.concatenate([self._draw(g, m) for g, m in batched(seed, n)], axis=0)

    def iter_samples(self, seed, n: int, batch: int = SAMPLE_BATCH):
        for g, m in batched(seed, n, batch):
            yield self._draw(g, m)

    def coord_second_moment(self) -> Estimate:
        raise NotImplementedError

    def second_moment(self) -> Estimate:
        """E ||eta||_2^2."""
        m = self.coord_second_moment()
        return Estimate(self.d * m.value, m.exact, self.d * m.stderr, m.n)

    def has_density(self) -> bool:
        return True

    def logpdf(self, x) -> np.ndarray:
        """Log density of each row of ``x``."""
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"


class IsotropicGaussian(NoiseDistribution):
    kind = "gauss"

    def __init__(self, sigma: float, d: int):
        super().__init__(d)
        self.sigma = _positive("sigma", sigma)

    def _draw(self, rng, size):
        return rng.normal(0.0, self.sigma, (size, self.d))

    def coord_second_moment(self):
        return Estimate(self.sigma**2)

    def logpdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (-0.5 * np.sum(x * x, axis=1) / self.sigma**2
                - self.d * math.log(self.sigma * math.sqrt(2 * math.pi)))

    def marginal(self) -> OneDimLaw:
        return GaussianLaw(self.sigma)

    def spec(self):
        return f"gauss:sigma={self.sigma!r},d={self.d}"


class UniformBox(NoiseDistribution):
    """Uniform on the l_inf ball of radius r."""

    kind = "box"

    def __init__(self, r: float, d: int):
        super().__init__(d)
        self.r = _positive("r", r)

    def _draw(self, rng, size):
        return rng.uniform(-self.r, self.r, (size, self.d))

    def coord_second_moment(self):
        return Estimate(self.r**2 / 3.0)

    def logpdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        inside = np.all(np.abs(x) <= self.r, axis=1)
        return np.where(inside, -self.d * math.log(2 * self.r), -np.inf)

    def marginal(self) -> OneDimLaw:
        return UniformLaw(self.r)

    def spec(self):
        return f"box:r={self.r!r},d={self.d}"


class IIDProduct(NoiseDistribution):
    """d i.i.d. copies of a one-dimensional law."""

    kind = "iid"

    def __init__(self, marginal: OneDimLaw, d: int):
        super().__init__(d)
        if not isinstance(marginal, OneDimLaw):
            raise TypeError("marginal must be a OneDimLaw")
        self.marginal_law = marginal

    def _draw(self, rng, size):
        return self.marginal_law.sample(rng, size * self.d).reshape(size, self.d)

    def coord_second_moment(self):
        return self.marginal_law.second_moment()

    def has_density(self):
        return self.marginal_law.has_density()

    def logpdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.sum(self.marginal_law.logpdf(x), axis=1)

    def marginal(self) -> OneDimLaw:
        return self.marginal_law

    def spec(self):
        return f"iid:{self.marginal_law.spec()},d={self.d}"


def sample(dist: NoiseDistribution, seed, n: int) -> np.ndarray:
    return dist.sample(seed, n)


def second_moment(dist: NoiseDistribution) -> Estimate:
    return dist.second_moment()


# -- spec strings ------------------------------------------------------------

def split_params(text: str) -> dict[str, str]:
    """Split ``k=v,k=[a,b],...`` into a dict; commas inside brackets are kept."""
    out, depth, cur = {}, 0, ""
    parts = []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        parts.append(cur)
    for part in parts:
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


_LAWS = {
    "gauss": (GaussianLaw, ("sigma",)),
    "gaussian": (GaussianLaw, ("sigma",)),
    "uniform": (UniformLaw, ("r",)),
    "laplace": (LaplaceLaw, ("b",)),
    "pareto": (ParetoTailLaw, ("k", "scale")),
}


def _pop(params, key, spec):
    try:
        return params.pop(key)
    except KeyError:
        raise ValueError(f"missing {key}= in {spec!r}") from None


def parse_distribution(spec: str) -> NoiseDistribution:
    """Build a distribution from e.g. ``gauss:sigma=0.12,d=3072``,
    ``box:r=1.5,d=64`` or ``iid:laplace:b=1,d=100``."""
    head, _, rest = spec.partition(":")
    head = head.strip().lower()
    if head == "iid":
        law_name, _, rest = rest.partition(":")
        law_name = law_name.strip().lower()
        if law_name not in _LAWS:
            raise ValueError(f"unknown marginal {law_name!r} in {spec!r}")
        cls, keys = _LAWS[law_name]
        params = split_params(rest)
        d = _pop(params, "d", spec)
        kwargs = {k: float(params.pop(k)) for k in keys if k in params}
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)} in {spec!r}")
        return IIDProduct(cls(**kwargs), int(d))
    params = split_params(rest)
    if head in ("gauss", "gaussian"):
        dist = IsotropicGaussian(float(_pop(params, "sigma", spec)), int(_pop(params, "d", spec)))
    elif head == "box":
        dist = UniformBox(float(_pop(params, "r", spec)), int(_pop(params, "d", spec)))
    else:
        raise ValueError(f"unknown distribution kind {head!r} in {spec!r}")
    if params:
        raise ValueError(f"unexpected parameters {sorted(params)} in {spec!r}")
    return dist


def parse_vector(text: str, d: Optional[int] = None) -> np.ndarray:
    """Parse ``1,2,3`` / ``[1,2,3]``; ``zeros`` or a single value broadcast to ``d``."""
    t = text.strip()
    if t.lower() == "zeros":
        if d is None:
            raise ValueError("'zeros' needs a known dimension")
        return np.zeros(d)
    t = t.strip("[]")
    vals = as_array([float(s) for s in t.replace(";", ",").split(",") if s.strip()])
    if d is not None and vals.size == 1 and d > 1:
        vals = np.full(d, vals[0])
    if d is not None and vals.size != d:
        raise ValueError(f"vector has {vals.size} entries, expected {d}")
    return vals
