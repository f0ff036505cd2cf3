"""Closed-form lower bounds on smoothing-noise magnitude, sizing formulas,
and numerical checks of those bounds against concrete distributions.

Conventions: ``eps`` is the l_p attack radius, ``delta`` the allowed total
variation between D and any admissible translate (equivalently the score
gap that must be exceeded), ``h(delta) = (1 - delta) / delta``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, special

from . import kernels
from .noise import Estimate, NoiseDistribution, OneDimLaw, batched, make_rng
from .norms import INF, Order, as_array, inv_p, l2_exponent, p_label, parse_p
from .tv import tv_shift, tv_uniform_box_worst_shift, tv_gaussian_shift

TAIL_CONSTANT = 1.0 / 24.0
DEFAULT_FRACTION = 0.99
FORMULA_RTOL = 1e-9


def _check_eps(eps):
    eps = float(eps)
    if not (eps >= 0.0 and math.isfinite(eps)):
        raise ValueError(f"eps must be finite and >= 0, got {eps!r}")
    return eps


def _check_delta(delta):
    delta = float(delta)
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    return delta


def h(delta: float) -> float:
    delta = _check_delta(delta)
    return (1.0 - delta) / delta


@dataclass(frozen=True)
class BoundConfig:
    p: Order
    d: int
    eps: float
    delta: float

    def __post_init__(self):
        p = parse_p(self.p)
        if p is not INF and p < 2:
            raise ValueError(f"p must be >= 2 or inf, got {p}")
        object.__setattr__(self, "p", p)
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        eps = _check_eps(self.eps)
        if eps == 0.0:
            raise ValueError("eps must be > 0")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "delta", _check_delta(self.delta))

    def as_dict(self):
        return {"p": p_label(self.p), "d": self.d, "eps": self.eps, "delta": self.delta}


# -- one-dimensional bounds ----------------------------------------------------

def onedim_bound_chebyshev(eps: float, delta: float) -> float:
    """E|eta|^2 >= eps^2 (1 - delta) / 8."""
    eps, delta = _check_eps(eps), _check_delta(delta)
    return eps**2 * (1.0 - delta) / 8.0


def markov_tau_star(eps: float, delta: float) -> float:
    """Threshold maximizing tau (1 - delta) - 2 delta tau^2 / eps."""
    eps, delta = _check_eps(eps), _check_delta(delta)
    return eps * (1.0 - delta) / (4.0 * delta)


def onedim_bound_markov(eps: float, delta: float) -> tuple[float, float]:
    """(first, second) moment bounds from the interval-mass argument:
    E|eta| >= eps (1-delta)^2 / (8 delta) and its square, E|eta|^2 >= eps^2 (1-delta)^4 / (64 delta^2).
    """
    eps, delta = _check_eps(eps), _check_delta(delta)
    tau = markov_tau_star(eps, delta)
    first = tau * (1.0 - delta) - 2.0 * delta * tau * tau / eps if eps > 0 else 0.0
    second = eps**2 * (1.0 - delta) ** 4 / (64.0 * delta**2)
    direct = eps * (1.0 - delta) ** 2 / (8.0 * delta)
    assert math.isclose(first, direct, rel_tol=FORMULA_RTOL, abs_tol=1e-300), (first, direct)
    return direct, second


def onedim_bound_combined(eps: float, delta: float) -> float:
    """E|eta|^2 >= eps^2 (1 - delta) / (200 delta^2)."""
    eps, delta = _check_eps(eps), _check_delta(delta)
    value = eps**2 * (1.0 - delta) / (200.0 * delta**2)
    dominating = max(onedim_bound_chebyshev(eps, delta), onedim_bound_markov(eps, delta)[1])
    assert value <= dominating * (1 + FORMULA_RTOL) + 1e-300, (eps, delta, value, dominating)
    return value


def onedim_first_moment_markov(eps: float, delta: float) -> float:
    """E|eta| >= eps (1 - delta) / 4."""
    eps, delta = _check_eps(eps), _check_delta(delta)
    return eps * (1.0 - delta) / 4.0


def onedim_first_moment_bound(eps: float, delta: float) -> float:
    """E|eta| >= eps (1 - delta) / (12 delta)."""
    eps, delta = _check_eps(eps), _check_delta(delta)
    value = eps * (1.0 - delta) / (12.0 * delta)
    dominating = max(onedim_first_moment_markov(eps, delta), onedim_bound_markov(eps, delta)[0])
    assert value <= dominating * (1 + FORMULA_RTOL) + 1e-300, (eps, delta, value, dominating)
    return value


# -- d-dimensional bounds --------------------------------------------------------

def theorem_lower_bound_l2sq(cfg: BoundConfig) -> float:
    """E||eta||_2^2 >= eps^2 d^(2 - 2/p) / 800 * (1 - delta) / delta^2."""
    return cfg.eps**2 * cfg.d ** (2.0 - 2.0 * inv_p(cfg.p)) / 800.0 * (1.0 - cfg.delta) / cfg.delta**2


def first_moment_lower_bound(cfg: BoundConfig) -> float:
    """E||eta||_2 >= eps d^(1 - 1/p) / 24 * (1 - delta) / delta."""
    return cfg.eps * cfg.d ** (1.0 - inv_p(cfg.p)) / 24.0 * h(cfg.delta)


def peeling_entry(cfg: BoundConfig, i: int) -> float:
    """Lower bound on the i-th largest coordinate second moment (1-based)."""
    if not 1 <= i <= cfg.d:
        raise ValueError(f"index must lie in 1..{cfg.d}, got {i}")
    return (cfg.eps**2 * (cfg.d - i + 1) ** (1.0 - 2.0 * inv_p(cfg.p)) / 800.0
            * (1.0 - cfg.delta) / cfg.delta**2)


def peeling_bounds(cfg: BoundConfig) -> np.ndarray:
    """Entry i-1 bounds the i-th largest E[eta_j^2] from below; nonincreasing for p >= 2."""
    remaining = np.arange(cfg.d, 0, -1, dtype=float)
    return (cfg.eps**2 * remaining ** (1.0 - 2.0 * inv_p(cfg.p)) / 800.0
            * (1.0 - cfg.delta) / cfg.delta**2)


def peeling_floor(cfg: BoundConfig, quantile: float = 0.01) -> float:
    """The peeling entry at rank ceil(quantile * d).

    This is the variance floor reported in scaling sweeps; it holds for the
    top ceil(quantile * d) coordinates. See :func:`coverage_floor` for the
    floor that holds for a given fraction of all coordinates.
    """
    if not 0.0 < quantile <= 1.0:
        raise ValueError(f"quantile must lie in (0, 1], got {quantile}")
    return peeling_entry(cfg, max(1, math.ceil(quantile * cfg.d)))


def coverage_floor(cfg: BoundConfig, fraction: float = DEFAULT_FRACTION) -> float:
    """A floor met by at least ``fraction`` of the coordinates' second moments."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    return peeling_entry(cfg, max(1, math.ceil(fraction * cfg.d)))


# -- heavy tails -----------------------------------------------------------------

def tail_exponent(p: Order) -> float:
    """2p / (p - 2); equals 2 at p = inf."""
    p = parse_p(p)
    if p is INF:
        return 2.0
    if p <= 2:
        raise ValueError(f"heavy tails are only forced for p > 2, got p = {p}")
    return 2.0 * p / (p - 2.0)


def heavy_tail_threshold(eps: float, delta: float, p, c: float = TAIL_CONSTANT) -> tuple[float, float]:
    """(tail exponent 2p/(p-2), scale c * eps * h(delta)).

    The tail of each i.i.d. coordinate must exceed (scale / s)^exponent at
    some s > scale.
    """
    k = tail_exponent(p)
    return k, c * _check_eps(eps) * h(delta)


def gamma_ratio_bound(d: int, p, scale: float) -> float:
    """scale * Gamma((p+2)/2p) * Gamma(d+1) / Gamma(d + (p+2)/2p).

    This is E max_i |X_i| for d i.i.d. variables with P(|X| > x) = min(1, (scale/x)^k),
    k = 2p/(p-2), and so an upper bound on E max whenever the tail is dominated by that law.
    """
    k = tail_exponent(p)
    a = 1.0 - 1.0 / k
    return scale * math.exp(special.gammaln(a) + special.gammaln(d + 1.0) - special.gammaln(d + a))


def expected_max_abs(law: OneDimLaw, d: int) -> float:
    """E max_{i<=d} |X_i| by quadrature of 1 - (1 - G(x))^d, G the tail of |X|."""
    def integrand(x):
        g = min(1.0, float(law.tail(x)))
        return 1.0 if g >= 1.0 else -math.expm1(d * math.log1p(-g))

    val, _ = integrate.quad(integrand, 0.0, np.inf, limit=500)
    return val


@dataclass
class HeavyTailVerdict:
    d: int
    p: Order
    mc_mean: float
    mc_stderr: float
    n_mc: int
    growth_reference: float
    ratio: float
    tail_exponent: float
    tail_scale: float
    gamma_bound: float
    tail_condition: Optional[bool]
    contrapositive_ok: Optional[bool]

    def as_dict(self):
        d = dict(self.__dict__)
        d["p"] = p_label(self.p)
        return d


def tail_condition_holds(law: OneDimLaw, k: float, scale: float, n_grid: int = 2000) -> Optional[bool]:
    """Whether P(|X| > x) <= (scale/x)^k for all x > scale, on a log grid.

    None for laws without a usable cdf.
    """
    if not law.has_cdf():
        return None
    xs = scale * np.logspace(0.0, 8.0, n_grid)[1:]
    return bool(np.all(np.asarray(law.tail(xs)) <= (scale / xs) ** k * (1 + 1e-12)))


def mc_expected_max_abs(law: OneDimLaw, d: int, n_mc: int, seed) -> Estimate:
    """Monte Carlo E max_{i<=d} |X_i| over ``n_mc`` batches of d draws."""
    total = 0.0
    total_sq = 0.0
    batch = max(1, (1 << 20) // max(d, 1))
    for rng, m in batched(seed, n_mc, batch):
        x = law.sample(rng, m * d).reshape(m, d)
        mx = kernels.max_abs_rows(x)
        total += float(mx.sum())
        total_sq += float(np.square(mx).sum())
    mean = total / n_mc
    var = max(0.0, total_sq / n_mc - mean * mean) * n_mc / max(n_mc - 1, 1)
    return Estimate(mean, exact=False, stderr=math.sqrt(var / n_mc), n=n_mc)


def heavy_tail_test(law: OneDimLaw, d: int, cfg: BoundConfig, n_mc: int, seed,
                    c: float = TAIL_CONSTANT, z: float = 3.29) -> HeavyTailVerdict:
    """Compare E max |X_i| against d^(1/2-1/p) eps h(delta) and the Gamma-ratio bound.

    When the tail condition P(|X| > x) <= (c eps h / x)^k holds for all
    x > c eps h, E max |X_i| must stay below the Gamma-ratio expression; that
    direction is checked (with ``z`` standard errors of slack). The ratio to
    the growth reference is reported, not judged.
    """
    k, scale = heavy_tail_threshold(cfg.eps, cfg.delta, cfg.p, c)
    est = mc_expected_max_abs(law, d, n_mc, seed)
    reference = d ** l2_exponent(cfg.p) * cfg.eps * h(cfg.delta)
    bound = gamma_ratio_bound(d, cfg.p, scale) if scale > 0 else 0.0
    cond = tail_condition_holds(law, k, scale) if scale > 0 else None
    ok = None
    if cond:
        ok = est.value - z * est.stderr <= bound
    return HeavyTailVerdict(d, cfg.p, est.value, est.stderr, n_mc, reference,
                            est.value / reference if reference > 0 else math.inf,
                            k, scale, bound, cond, ok)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


# -- sizing ---------------------------------------------------------------------

def gaussian_sizing(cfg: BoundConfig) -> float:
    """sigma = 9/2 * eps / delta * d^(1/2 - 1/p); keeps every admissible shift at TV <= delta."""
    return 4.5 * cfg.eps / cfg.delta * cfg.d ** l2_exponent(cfg.p)


def gaussian_sizing_moments(cfg: BoundConfig) -> dict:
    sigma = gaussian_sizing(cfg)
    return {
        "sigma": sigma,
        "coord_var": sigma**2,
        "coord_var_formula": 4.5**2 * cfg.eps**2 / cfg.delta**2 * cfg.d ** (1.0 - 2.0 * inv_p(cfg.p)),
        "norm_mean_exact": sigma * math.sqrt(2.0) * math.exp(
            special.gammaln((cfg.d + 1) / 2.0) - special.gammaln(cfg.d / 2.0)),
        "norm_mean_upper": 4.5 * cfg.eps / cfg.delta * cfg.d ** (1.0 - inv_p(cfg.p)),
        "worst_shift_tv": tv_gaussian_shift(sigma, cfg.eps * cfg.d ** l2_exponent(cfg.p)).value,
    }


def uniform_box_sizing(cfg: BoundConfig) -> float:
    """r = eps d log(4) / (2 delta) for l_inf attacks; worst-shift TV is then <= delta."""
    if cfg.p is not INF:
        raise ValueError("uniform box sizing is defined for p = inf only")
    r = 0.5 * cfg.eps / cfg.delta * cfg.d * math.log(4.0)
    tv = tv_uniform_box_worst_shift(r, cfg.d, cfg.eps).value
    assert tv <= cfg.delta * (1 + FORMULA_RTOL), (cfg, r, tv)
    return r


# -- directional second-moment check -----------------------------------------

@dataclass
class DirectionMomentCheck:
    status: str  # "holds" | "violated" | "skipped"
    lhs: float = math.nan
    lhs_stderr: float = 0.0
    rhs: float = math.nan
    delta: float = math.nan
    ratio: float = math.nan
    reason: str = ""

    def as_dict(self):
        return dict(self.__dict__)


def verify_direction_moment(dist: NoiseDistribution, v, n_mc: int, seed, z: float = 3.29,
                            tv_seed=None) -> DirectionMomentCheck:
    """Check E|v.eta|^2 / ||v||^2 >= ||v||^2 / 200 * (1 - delta) / delta^2, delta = tv(D, D + v)."""
    v = as_array(v)
    nv2 = float(v @ v)
    if nv2 == 0.0:
        return DirectionMomentCheck("skipped", reason="zero shift: both sides degenerate")
    tv = tv_shift(dist, v, allow_mc=True, seed=tv_seed if tv_seed is not None else seed)
    delta = tv.hi
    if delta == 0.0:
        return DirectionMomentCheck("skipped", reason="zero total variation")
    total = 0.0
    total_sq = 0.0
    for x in dist.iter_samples(seed, n_mc):
        proj = np.square(x @ v) / nv2
        total += float(proj.sum())
        total_sq += float(np.square(proj).sum())
    mean = total / n_mc
    var = max(0.0, total_sq / n_mc - mean * mean)
    se = math.sqrt(var / n_mc)
    rhs = nv2 / 200.0 * (1.0 - delta) / delta**2
    status = "holds" if mean + z * se >= rhs else "violated"
    return DirectionMomentCheck(status, mean, se, rhs, tv.value,
                                mean / rhs if rhs > 0 else math.inf)


# -- reports --------------------------------------------------------------------

@dataclass
class BoundReport:
    config: BoundConfig
    values: dict = field(default_factory=dict)

    def rows(self):
        c = self.config
        for key, val in self.values.items():
            yield [p_label(c.p), c.d, repr(c.eps), repr(c.delta), key, repr(float(val))]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["p", "d", "eps", "delta", "bound_id", "value"])
        w.writerows(self.rows())
        return buf.getvalue()

    def as_dict(self):
        return {"config": self.config.as_dict(), "bounds": {k: float(v) for k, v in self.values.items()}}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False)


def bound_report(cfg: BoundConfig, fraction: float = DEFAULT_FRACTION, quantile: float = 0.01) -> BoundReport:
    """Every closed-form bound and sizing value for one configuration."""
    first, second = onedim_bound_markov(cfg.eps, cfg.delta)
    vals = {
        "onedim_chebyshev": onedim_bound_chebyshev(cfg.eps, cfg.delta),
        "onedim_markov_first": first,
        "onedim_markov_second": second,
        "onedim_markov_tau": markov_tau_star(cfg.eps, cfg.delta),
        "onedim_combined": onedim_bound_combined(cfg.eps, cfg.delta),
        "onedim_first_moment": onedim_first_moment_bound(cfg.eps, cfg.delta),
        "theorem_l2sq": theorem_lower_bound_l2sq(cfg),
        "first_moment": first_moment_lower_bound(cfg),
        "peeling_top": peeling_entry(cfg, 1),
        "peeling_quantile_floor": peeling_floor(cfg, quantile),
        "coverage_floor": coverage_floor(cfg, fraction),
        "gaussian_sigma": gaussian_sizing(cfg),
        "gaussian_coord_var": gaussian_sizing(cfg) ** 2,
        "gaussian_norm_mean_upper": 4.5 * cfg.eps / cfg.delta * cfg.d ** (1.0 - inv_p(cfg.p)),
    }
    if cfg.p is INF:
        r = uniform_box_sizing(cfg)
        vals["uniform_box_r"] = r
        vals["uniform_box_coord_var"] = r * r / 3.0
    if cfg.p is INF or cfg.p > 2:
        k, scale = heavy_tail_threshold(cfg.eps, cfg.delta, cfg.p)
        vals["heavy_tail_exponent"] = k
        vals["heavy_tail_scale"] = scale
    return BoundReport(cfg, vals)
