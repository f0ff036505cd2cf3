"""Adversarial witnesses: randomized binary classifiers whose smoothed
version has score gap above delta at 0 yet flips its prediction at v,
built whenever tv(D, D + v) > delta.

With S a set where D(S) - D'(S) > delta (D' = D + v), the classifier
outputs 1 with probability alpha on S and beta off S, where
alpha = 1 - D'(S)/2 and beta = 1/2 - D'(S)/2. Under any law P,
P(f = 1) = 1/2 + (P(S) - D'(S))/2, so G_1(0) > (1 + delta)/2 and G_1(v) = 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .certify import _class_counts, cp_lower, cp_upper
from .noise import GaussianLaw, IIDProduct, IsotropicGaussian, NoiseDistribution, UniformBox, UniformLaw, spawn_seeds
from .norms import as_array, norm_cdf
from .tv import tv_shift

TV_MATCH_TOL = 1e-9


class NoWitness(ValueError):
    """tv(D, D + v) <= delta, so no witness exists for this shift."""


@dataclass(frozen=True)
class WitnessClassifier:
    in_set: Callable[[np.ndarray], np.ndarray]
    alpha: float
    beta: float
    v: np.ndarray
    mass: float  # D(S)
    shifted_mass: float  # D'(S)
    tv: float
    set_kind: str

    num_classes = 2

    def __post_init__(self):
        if not (0.5 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 0.5):
            raise ValueError(f"alpha={self.alpha}, beta={self.beta} out of range")
        if not math.isclose(self.alpha - self.beta, 0.5, abs_tol=1e-12):
            raise ValueError("alpha - beta must equal 1/2")

    def __call__(self, points, rng):
        points = np.atleast_2d(points)
        p_one = np.where(self.in_set(points), self.alpha, self.beta)
        return (rng.random(points.shape[0]) < p_one).astype(np.int64)

    def score_one(self, mass_under_p: float) -> float:
        """P(f(Z) = 1) for Z ~ P with P(S) = mass_under_p."""
        return mass_under_p * (self.alpha - self.beta) + self.beta

    @property
    def expected_gap(self) -> float:
        return self.mass - self.shifted_mass

    def as_dict(self):
        return {
            "set": self.set_kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "v": self.v.tolist(),
            "mass": self.mass,
            "shifted_mass": self.shifted_mass,
            "tv": self.tv,
        }


def _gaussian_sigma(dist):
    if isinstance(dist, IsotropicGaussian):
        return dist.sigma
    if isinstance(dist, IIDProduct) and isinstance(dist.marginal_law, GaussianLaw):
        return dist.marginal_law.sigma
    return None


def _box_r(dist):
    if isinstance(dist, UniformBox):
        return dist.r
    if isinstance(dist, IIDProduct) and isinstance(dist.marginal_law, UniformLaw):
        return dist.marginal_law.r
    return None


def build_witness(dist: NoiseDistribution, v, delta: float) -> WitnessClassifier:
    """The witness for shift v at level delta; raises NoWitness when tv(D, D + v) <= delta."""
    v = as_array(v)
    if v.size != dist.d:
        raise ValueError(f"v has dimension {v.size}, distribution has {dist.d}")
    tv = tv_shift(dist, v)
    if tv is None:
        raise TypeError(f"no exact TV-achieving set is implemented for {dist!r}")
    if tv.value <= delta:
        raise NoWitness(f"tv(D, D+v) = {tv.value:.6g} <= delta = {delta:.6g}")
    sigma = _gaussian_sigma(dist)
    if sigma is not None:
        nv = float(np.linalg.norm(v))
        half = 0.5 * nv * nv
        vv = v.copy()

        def in_set(points):
            # likelihood-ratio halfspace: density of D exceeds that of D + v
            return points @ vv <= half

        mass = norm_cdf(nv / (2.0 * sigma))
        shifted = norm_cdf(-nv / (2.0 * sigma))
        kind = "halfspace"
    else:
        r = _box_r(dist)
        vv = v.copy()

        def in_set(points):
            in_a = np.all(np.abs(points) <= r, axis=1)
            in_b = np.all(np.abs(points - vv) <= r, axis=1)
            return in_a & ~in_b

        mass = tv.value
        shifted = 0.0
        kind = "box-difference"
    if abs((mass - shifted) - tv.value) > TV_MATCH_TOL:
        raise AssertionError(f"witness set mass gap {mass - shifted} != tv {tv.value}")
    return WitnessClassifier(in_set, 1.0 - shifted / 2.0, 0.5 - shifted / 2.0, vv,
                             mass, shifted, tv.value, kind)


@dataclass
class WitnessVerdict:
    delta: float
    n: int
    ci_level: float
    score_at_0: float
    score_at_0_ci: tuple
    expected_score_at_0: float
    score_at_v: float
    score_at_v_ci: tuple
    gap_lower: float
    prediction_at_0: int
    prediction_at_v: int
    score_matches: bool
    gap_exceeds_delta: bool
    flips_at_v: bool

    @property
    def passed(self) -> bool:
        return self.score_matches and self.gap_exceeds_delta and self.flips_at_v

    def as_dict(self):
        d = dict(self.__dict__)
        d["score_at_0_ci"] = list(self.score_at_0_ci)
        d["score_at_v_ci"] = list(self.score_at_v_ci)
        d["passed"] = self.passed
        return d


def verify_witness(w: WitnessClassifier, dist: NoiseDistribution, n: int, seed, delta: float,
                   ci_level: float = 0.999) -> WitnessVerdict:
    """Monte Carlo check that the smoothed witness is non-robust at v.

    Checks, each with two-sided Clopper-Pearson intervals at ``ci_level``:
    G_1(0) matches 1/2 + (D(S) - D'(S))/2; the lower bound on
    Delta(0) = 2 G_1(0) - 1 exceeds delta; and G_1(v) is consistent with
    exactly 1/2, so the tie at v goes to class 0 while g(0) = 1.
    """
    a = 0.5 * (1.0 - ci_level)
    s0, s1 = spawn_seeds(seed, 2)
    zero = np.zeros(dist.d)
    k0 = int(_class_counts(w, dist, zero, n, s0)[1])
    kv = int(_class_counts(w, dist, w.v, n, s1)[1])
    ci0 = (float(cp_lower(k0, n, a)), float(cp_upper(k0, n, a)))
    civ = (float(cp_lower(kv, n, a)), float(cp_upper(kv, n, a)))
    expected = w.score_one(w.mass)
    gap_lower = 2.0 * ci0[0] - 1.0
    pred0 = 1 if ci0[0] > 0.5 else 0
    # G_1(v) = 1/2 exactly; the lexicographic tie-break picks class 0
    predv = 0 if civ[0] <= 0.5 else 1
    return WitnessVerdict(
        delta, n, ci_level, k0 / n, ci0, expected, kv / n, civ, gap_lower, pred0, predv,
        ci0[0] <= expected <= ci0[1],
        gap_lower > delta,
        civ[0] <= 0.5 <= civ[1] and pred0 != predv,
    )
