import math

import numpy as np
import pytest
from scipy import integrate, stats

from smoothcert.noise import GaussianLaw, IIDProduct, IsotropicGaussian, LaplaceLaw, ParetoTailLaw, UniformBox, UniformLaw
from smoothcert.tv import (
    TVResult,
    gaussian_bracket,
    max_interval_mass,
    tv_gaussian_shift,
    tv_law_shift,
    tv_monte_carlo,
    tv_shift,
    tv_uniform_box_shift,
    tv_uniform_box_worst_shift,
)


def trapezoid_gauss_tv(sigma, a, step=1e-4):
    """1/2 int |phi_s(x) - phi_s(x - a)| dx on a wide grid."""
    lo, hi = -10 * sigma, a + 10 * sigma
    x = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    g = np.abs(stats.norm.pdf(x, scale=sigma) - stats.norm.pdf(x, loc=a, scale=sigma))
    return 0.5 * integrate.trapezoid(g, x)


def test_gaussian_tv_examples():
    assert tv_gaussian_shift(1.0, 0.0).value == 0.0
    r = tv_gaussian_shift(1.0, 2.0)
    assert r.is_exact
    assert r.value == pytest.approx(0.682689492137086, abs=1e-12)
    assert r.value == pytest.approx(trapezoid_gauss_tv(1.0, 2.0), abs=1e-6)
    one = tv_gaussian_shift(1.0, 1.0).value
    assert 1 / 200 <= one / 1.0 <= 9 / 2


def test_gaussian_bracket_values():
    lo, hi = gaussian_bracket(2.0, 1.0)
    assert (lo, hi) == pytest.approx((0.5 / 200, 4.5 * 0.5))


def test_gaussian_tv_large_shift_saturates():
    assert tv_gaussian_shift(1.0, 80.0).value == 1.0
    assert 1 - tv_gaussian_shift(1.0, 16.0).value == pytest.approx(2 * stats.norm.sf(8.0), rel=1e-6)


@pytest.mark.parametrize("v, want", [([0.5], 0.25), ([1.0, 1.0], 0.75), ([0.1, 2.5, 0.0], 1.0), ([2.0], 1.0)])
def test_box_tv_examples(v, want):
    assert tv_uniform_box_shift(1.0, v).value == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("r, d, eps, want", [(1.0, 1, 1.0, 0.5), (3.0, 5, 0.0, 0.0), (1.0, 4, 0.5, 0.68359375)])
def test_box_worst_shift_examples(r, d, eps, want):
    assert tv_uniform_box_worst_shift(r, d, eps).value == pytest.approx(want, abs=1e-15)


def test_box_worst_shift_sandwich():
    for r in (0.5, 1.0, 4.0):
        for d in (1, 3, 17, 400):
            for eps in np.linspace(0.01, r, 9):
                z = eps / (2 * r)
                tv = tv_uniform_box_worst_shift(r, d, eps).value
                assert 1 - math.exp(-d * z) - 1e-12 <= tv <= 1 - 4 ** (-d * z) + 1e-12


def test_mc_gaussian_against_exact():
    r = tv_monte_carlo(IsotropicGaussian(1.0, 2), [2.0, 0.0], 1_000_000, 42)
    assert r.provenance == "monte-carlo"
    assert abs(r.value - 0.682689) < 0.005
    assert r.lo <= 0.682689 <= r.hi


def test_mc_zero_shift_is_zero():
    r = tv_monte_carlo(IsotropicGaussian(1.0, 3), np.zeros(3), 1000, 1)
    assert r.value == r.lo == r.hi == 0.0


def test_mc_box_disjoint_support():
    r = tv_monte_carlo(UniformBox(1.0, 2), [2.5, 0.0], 10_000, 1)
    assert r.value == 1.0


def test_mc_box_against_exact():
    r = tv_monte_carlo(UniformBox(1.0, 2), [1.0, 1.0], 400_000, 3)
    assert abs(r.value - 0.75) < 0.005


def test_mc_laplace_against_closed_form():
    # 1-D Laplace: tv = 1 - exp(-eps / (2b))
    r = tv_shift(IIDProduct(LaplaceLaw(1.0), 1), [1.0], allow_mc=True, n=400_000, seed=4)
    assert r.provenance == "monte-carlo"
    assert abs(r.value - (1 - math.exp(-0.5))) < 0.005


def test_mc_is_deterministic():
    d = IIDProduct(LaplaceLaw(1.0), 3)
    a = tv_monte_carlo(d, [0.2, 0.1, 0.0], 100_000, 42)
    b = tv_monte_carlo(d, [0.2, 0.1, 0.0], 100_000, 42)
    assert a == b


def test_mc_needs_density():
    from smoothcert.noise import EmpiricalLaw

    d = IIDProduct(EmpiricalLaw(lambda g, n: g.normal(size=n), n_cache=1000), 2)
    with pytest.raises(TypeError):
        tv_monte_carlo(d, [0.1, 0.0], 1000, 0)


def test_tv_shift_dispatch():
    assert tv_shift(IIDProduct(GaussianLaw(1.0), 2), [2.0, 0.0]).value == pytest.approx(0.682689492137086)
    assert tv_shift(IIDProduct(UniformLaw(1.0), 2), [1.0, 1.0]).value == pytest.approx(0.75)
    assert tv_shift(IIDProduct(LaplaceLaw(1.0), 2), [1.0, 0.0]) is None
    with pytest.raises(ValueError):
        tv_shift(IsotropicGaussian(1.0, 2), [1.0])


def test_tv_result_invariants():
    with pytest.raises(ValueError):
        TVResult(0.5, 0.6, 0.7, "monte-carlo")
    with pytest.raises(ValueError):
        TVResult(0.5, 0.4, 0.6, "exact")


def test_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.normal(size=3)
        assert tv_uniform_box_shift(1.3, v).value == tv_uniform_box_shift(1.3, -v).value
        assert tv_shift(IsotropicGaussian(0.7, 3), v).value == tv_shift(IsotropicGaussian(0.7, 3), -v).value


def test_symmetry_mc_within_ci():
    d = IIDProduct(LaplaceLaw(1.0), 2)
    a = tv_monte_carlo(d, [0.5, 0.2], 200_000, 1)
    b = tv_monte_carlo(d, [-0.5, -0.2], 200_000, 2)
    assert max(a.lo, b.lo) <= min(a.hi, b.hi)


def test_monotone_in_each_coordinate():
    grid = np.linspace(0, 3, 31)
    for i in range(3):
        prev_box = prev_gauss = -1.0
        for t in grid:
            v = np.array([0.3, 0.2, 0.1])
            v[i] = t
            b = tv_uniform_box_shift(1.0, v).value
            g = tv_shift(IsotropicGaussian(1.0, 3), v).value
            assert b >= prev_box and g >= prev_gauss
            prev_box, prev_gauss = b, g


def test_bracket_containment_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        sigma, a = rng.uniform(0.05, 5), rng.uniform(0, 10)
        r = tv_gaussian_shift(sigma, a)
        lo, hi = gaussian_bracket(sigma, a)
        assert lo <= r.value <= hi


def test_max_interval_mass_examples():
    g = max_interval_mass(GaussianLaw(1.0), 1.0)
    assert g.value == pytest.approx(stats.norm.cdf(0.5) - stats.norm.cdf(-0.5), abs=1e-9)
    assert g.value == pytest.approx(tv_law_shift(GaussianLaw(1.0), 1.0).value, abs=1e-6)
    assert max_interval_mass(UniformLaw(1.0), 2.0).value == pytest.approx(1.0)
    assert max_interval_mass(GaussianLaw(1.0), 1e-6).value < 1e-5


def test_max_interval_mass_below_tv_random():
    rng = np.random.default_rng(2)
    laws = [GaussianLaw(1.0), UniformLaw(1.0), LaplaceLaw(1.0), GaussianLaw(0.3), LaplaceLaw(2.0), UniformLaw(0.2)]
    for i in range(20):
        law = laws[i % len(laws)]
        eps = float(rng.uniform(0.05, 3.0))
        tv = tv_law_shift(law, eps, n=400_000, seed=i)
        assert max_interval_mass(law, eps).value <= tv.hi + 1e-4


def test_max_interval_mass_pareto_off_center():
    # Pareto-tail law has no mass in (-s, s): the best interval sits off-center
    law = ParetoTailLaw(4.0, 1.0)
    m = max_interval_mass(law, 0.5).value
    want = 0.5 * (1 - 1.5**-4)
    assert m == pytest.approx(want, abs=1e-6)
