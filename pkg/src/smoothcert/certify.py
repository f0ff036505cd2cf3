"""Smoothed classifiers: Monte Carlo scores, l_2 / l_inf certificates and
total-variation ball certificates.

A base classifier is any callable ``f(points, rng) -> labels`` taking an
``(n, d)`` array and returning ``n`` non-negative integer labels.
Deterministic classifiers ignore ``rng``. Labels are compared by their
natural integer order, and ties in an argmax go to the smaller label.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import beta as beta_dist

from . import kernels
from .noise import IsotropicGaussian, NoiseDistribution, batched, spawn_seeds, split_params
from .norms import as_array, norm_ppf
from .tv import TVResult, tv_shift


class Abstain(enum.Enum):
    ABSTAIN = "ABSTAIN"

    def __str__(self):
        return "ABSTAIN"


ABSTAIN = Abstain.ABSTAIN


# -- base classifiers ------------------------------------------------------------

class LinearClassifier:
    """Label 1 where w.x + b > 0, else 0."""

    num_classes = 2

    def __init__(self, w, b: float = 0.0):
        self.w = as_array(w)
        if not np.any(self.w):
            raise ValueError("w must be nonzero")
        self.b = float(b)

    def __call__(self, points, rng=None):
        return kernels.halfspace_labels(points, self.w, self.b)

    def margin(self, x) -> float:
        """Signed l_2 distance from x to the decision boundary."""
        return float((as_array(x) @ self.w + self.b) / np.linalg.norm(self.w))

    def spec(self):
        return f"linear:w=[{','.join(repr(float(t)) for t in self.w)}],b={self.b!r}"


class ConstantClassifier:
    def __init__(self, label: int = 0):
        self.label = int(label)
        self.num_classes = self.label + 1

    def __call__(self, points, rng=None):
        return np.full(np.shape(points)[0], self.label, dtype=np.int64)

    def spec(self):
        return f"constant:c={self.label}"


def parse_classifier(spec: str):
    """``linear:w=[1,-2],b=0.5`` or ``constant:c=1``."""
    head, _, rest = spec.partition(":")
    params = split_params(rest)
    head = head.strip().lower()
    if head == "linear":
        w = [float(t) for t in params.pop("w").strip("[]").replace(";", ",").split(",") if t.strip()]
        clf = LinearClassifier(w, float(params.pop("b", 0.0)))
    elif head == "constant":
        clf = ConstantClassifier(int(params.pop("c", 0)))
    else:
        raise ValueError(f"unknown classifier kind {head!r}")
    if params:
        raise ValueError(f"unexpected parameters {sorted(params)} in {spec!r}")
    return clf


# -- binomial confidence bounds ------------------------------------------------------

def cp_lower(k, n, alpha: float):
    """One-sided Clopper-Pearson lower bound at level 1 - alpha."""
    k = np.asarray(k)
    with np.errstate(invalid="ignore"):
        lo = beta_dist.ppf(alpha, k, n - k + 1)
    return np.where(k == 0, 0.0, lo)


def cp_upper(k, n, alpha: float):
    """One-sided Clopper-Pearson upper bound at level 1 - alpha."""
    k = np.asarray(k)
    with np.errstate(invalid="ignore"):
        hi = beta_dist.ppf(1.0 - alpha, k + 1, n - k)
    return np.where(k == n, 1.0, hi)


# -- scores ------------------------------------------------------------------------

@dataclass
class SmoothedScore:
    counts: np.ndarray
    n: int
    alpha: float
    lower: np.ndarray
    upper: np.ndarray
    top: int
    runner_up: int
    gap_lower: float

    @property
    def estimates(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def gap(self) -> float:
        return float(self.estimates[self.top] - self.estimates[self.runner_up])

    def as_dict(self):
        return {
            "counts": self.counts.tolist(),
            "n": self.n,
            "alpha": self.alpha,
            "estimates": self.estimates.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "top": self.top,
            "runner_up": self.runner_up,
            "gap": self.gap,
            "gap_lower": self.gap_lower,
        }


def _class_counts(f, dist: NoiseDistribution, x, n: int, seed, num_classes: int = 2) -> np.ndarray:
    x = as_array(x)
    if x.size != dist.d:
        raise ValueError(f"x has dimension {x.size}, noise has {dist.d}")
    counts = np.zeros(max(num_classes, 2), dtype=np.int64)
    for rng, m in batched(seed, n):
        labels = np.asarray(f(dist._draw(rng, m) + x, rng), dtype=np.int64)
        c = np.bincount(labels, minlength=counts.size)
        if c.size > counts.size:
            counts = np.concatenate([counts, np.zeros(c.size - counts.size, dtype=np.int64)])
        counts += c
    return counts


def _top_two(counts) -> tuple[int, int]:
    # np.argmax returns the first maximum, i.e. the smaller label on ties
    a = int(np.argmax(counts))
    rest = counts.astype(float).copy()
    rest[a] = -1.0
    return a, int(np.argmax(rest))


def scores_from_counts(counts, alpha: float) -> SmoothedScore:
    counts = np.asarray(counts, dtype=np.int64)
    n = int(counts.sum())
    lower = np.asarray(cp_lower(counts, n, alpha), dtype=float)
    upper = np.asarray(cp_upper(counts, n, alpha), dtype=float)
    a, b = _top_two(counts)
    return SmoothedScore(counts, n, alpha, lower, upper, a, b, float(lower[a] - upper[b]))


def smoothed_scores(f, dist: NoiseDistribution, x, n: int, alpha: float, seed,
                    num_classes: Optional[int] = None) -> SmoothedScore:
    """Count f(x + eta) over n noise draws and bound each class score."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = num_classes if num_classes is not None else getattr(f, "num_classes", 2)
    return scores_from_counts(_class_counts(f, dist, x, n, seed, k), alpha)


# -- l_2 / l_inf certificates -------------------------------------------------------

@dataclass(frozen=True)
class CertificationResult:
    predicted: Union[int, Abstain]
    l2_radius: float
    linf_radius: float
    confidence: float
    n0: int
    n: int
    sigma: float
    d: int
    p_a_lower: float = math.nan

    @property
    def abstained(self) -> bool:
        return self.predicted is ABSTAIN

    def as_dict(self):
        return {
            "predicted": str(self.predicted) if self.abstained else int(self.predicted),
            "l2_radius": self.l2_radius,
            "linf_radius": self.linf_radius,
            "confidence": self.confidence,
            "n0": self.n0,
            "n": self.n,
            "sigma": self.sigma,
            "d": self.d,
            "p_a_lower": self.p_a_lower,
        }


def gaussian_l2_radius(sigma: float, p_a: float, p_b: float) -> float:
    """sigma / 2 * (Phi^-1(p_a) - Phi^-1(p_b)); zero unless p_a > p_b."""
    if p_a <= p_b:
        return 0.0
    return 0.5 * sigma * (norm_ppf(p_a) - norm_ppf(p_b))


def certify_l2(f, sigma, x, n0: int = 100, n: int = 100_000, alpha: float = 0.001, seed=0,
               num_classes: Optional[int] = None) -> CertificationResult:
    """Gaussian-smoothing l_2 certificate.

    The top class is picked from ``n0`` draws; a one-sided Clopper-Pearson
    bound p_A on its score comes from ``n`` independent draws, and the
    runner-up score is bounded by 1 - p_A, giving radius sigma * Phi^-1(p_A).
    Abstains when p_A <= 1/2.
    """
    x = as_array(x)
    if isinstance(sigma, NoiseDistribution):
        if not isinstance(sigma, IsotropicGaussian):
            raise TypeError("the l_2 certificate is only valid for isotropic Gaussian noise")
        dist = sigma
    else:
        dist = IsotropicGaussian(sigma, x.size)
    if dist.d != x.size:
        raise ValueError(f"x has dimension {x.size}, noise has {dist.d}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = num_classes if num_classes is not None else getattr(f, "num_classes", 2)
    select_seed, estimate_seed = spawn_seeds(seed, 2)
    c_a = int(np.argmax(_class_counts(f, dist, x, n0, select_seed, k)))
    counts = _class_counts(f, dist, x, n, estimate_seed, k)
    n_a = int(counts[c_a]) if c_a < counts.size else 0
    p_a = float(cp_lower(n_a, n, alpha))
    if p_a <= 0.5:
        return CertificationResult(ABSTAIN, 0.0, 0.0, 1.0 - alpha, n0, n, dist.sigma, dist.d, p_a)
    radius = gaussian_l2_radius(dist.sigma, p_a, 1.0 - p_a)
    return CertificationResult(c_a, radius, radius / math.sqrt(dist.d), 1.0 - alpha,
                               n0, n, dist.sigma, dist.d, p_a)


def certify_linf(result: CertificationResult, d: Optional[int] = None) -> CertificationResult:
    """l_inf radius = l_2 radius / sqrt(d)."""
    d = result.d if d is None else int(d)
    if result.abstained:
        return replace(result, l2_radius=0.0, linf_radius=0.0, d=d)
    return replace(result, linf_radius=result.l2_radius / math.sqrt(d), d=d)


# -- total-variation ball certificates -------------------------------------------------

@dataclass
class ShiftVerdict:
    index: int
    status: str  # "certified" | "not-certified" | "unknown"
    tv: float = math.nan
    tv_upper: float = math.nan
    tv_provenance: str = ""
    margin: float = math.nan
    base_class: Optional[int] = None
    shifted_class: Optional[int] = None

    def as_dict(self):
        return dict(self.__dict__)


def tv_ball_certificate(dist: NoiseDistribution, f, x, gap_lower: float,
                        probe_shifts: Sequence, n: int = 0, seed=0, allow_mc: bool = True,
                        mc_n: int = 200_000) -> list[ShiftVerdict]:
    """Certify g(x + v) = g(x) for each probe shift v with gap_lower > 2 tv(D, D + v).

    Monte Carlo TV values enter through their upper confidence end. With
    ``n > 0`` and a classifier, the smoothed prediction at x and x + v is
    also estimated for cross-checking.
    """
    x = as_array(x)
    seeds = spawn_seeds(seed, 2 * len(probe_shifts) + 1)
    base = None
    if f is not None and n > 0:
        base = smoothed_scores(f, dist, x, n, 0.001, seeds[0]).top
    out = []
    for i, v in enumerate(probe_shifts):
        v = as_array(v)
        tv = tv_shift(dist, v, allow_mc=allow_mc, n=mc_n, seed=seeds[2 * i + 1])
        if tv is None:
            out.append(ShiftVerdict(i, "unknown", base_class=base))
            continue
        margin = gap_lower - 2.0 * tv.hi
        verdict = ShiftVerdict(i, "certified" if margin > 0 else "not-certified", tv.value, tv.hi,
                               tv.provenance, margin, base)
        if base is not None:
            verdict.shifted_class = smoothed_scores(f, dist, x + v, n, 0.001, seeds[2 * i + 2]).top
        out.append(verdict)
    return out


def gaussian_tv_ball_radius(sigma: float, gap_lower: float) -> float:
    """Largest ||v||_2 with 2 tv(N(0, s^2 I), N(v, s^2 I)) < gap_lower."""
    if gap_lower <= 0:
        return 0.0
    # 2 Phi(r / 2s) - 1 = gap / 2
    return 2.0 * sigma * norm_ppf(0.5 + 0.25 * min(gap_lower, 1.0))


@dataclass
class RobustnessCheck:
    precondition: bool
    gap_lower: float
    tv: float
    base_class: int
    shifted_class: int
    violation: bool

    def as_dict(self):
        return dict(self.__dict__)


def gap_vs_tv_robustness_check(dist: NoiseDistribution, f, x, v, n: int, seed,
                               alpha: float = 0.001, mc_n: int = 200_000) -> RobustnessCheck:
    """Empirically test: Delta(x) > 2 tv(D, D + v) implies g(x + v) = g(x).

    A violation is flagged only when the precondition holds and, at x + v,
    some other class scores significantly above g(x).
    """
    x, v = as_array(x), as_array(v)
    s_base, s_shift, s_tv = spawn_seeds(seed, 3)
    at_x = smoothed_scores(f, dist, x, n, alpha, s_base)
    tv = tv_shift(dist, v, allow_mc=True, n=mc_n, seed=s_tv)
    pre = at_x.gap_lower > 2.0 * tv.hi
    at_xv = smoothed_scores(f, dist, x + v, n, alpha, s_shift,
                            num_classes=at_x.counts.size)
    a = at_x.top
    k = max(at_xv.counts.size, a + 1)
    lower = np.zeros(k)
    lower[: at_xv.lower.size] = at_xv.lower
    upper_a = at_xv.upper[a] if a < at_xv.upper.size else 0.0
    others = np.delete(lower, a)
    beaten = bool(others.size and others.max() > upper_a)
    return RobustnessCheck(bool(pre), at_x.gap_lower, tv.value, a, at_xv.top, bool(pre and beaten))
