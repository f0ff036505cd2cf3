import math

import numpy as np
import pytest

from smoothcert import noise
from smoothcert.noise import (
    EmpiricalLaw,
    GaussianLaw,
    IIDProduct,
    IsotropicGaussian,
    LaplaceLaw,
    ParetoTailLaw,
    UniformBox,
    UniformLaw,
    parse_distribution,
    parse_vector,
)
from smoothcert.norms import INF, DenseVector, lp_norm, parse_p


def test_box_samples_in_support():
    x = noise.sample(UniformBox(1.0, 3), 7, 5000)
    assert x.shape == (5000, 3)
    assert np.all(np.abs(x) <= 1.0)


def test_gaussian_norm_squared_mean():
    x = noise.sample(IsotropicGaussian(1.0, 2), 42, 100_000)
    sq = np.sum(x * x, axis=1)
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    assert abs(sq.mean() - 2.0) < 3 * se


@pytest.mark.parametrize("sigma", [0.0, -1.0, math.nan, math.inf])
def test_gaussian_rejects_bad_sigma(sigma):
    with pytest.raises(ValueError):
        IsotropicGaussian(sigma, 2)


@pytest.mark.parametrize("d", [0, -3, 2.5])
def test_rejects_bad_dimension(d):
    with pytest.raises(ValueError):
        UniformBox(1.0, d)


@pytest.mark.parametrize("dist, want", [
    (IsotropicGaussian(2.0, 5), 20.0),
    (UniformBox(1.0, 3), 1.0),
    (IsotropicGaussian(1.0, 1), 1.0),
    (IIDProduct(LaplaceLaw(1.0), 4), 8.0),
])
def test_second_moment_closed_forms(dist, want):
    m = noise.second_moment(dist)
    assert m.exact
    assert m.value == pytest.approx(want, rel=1e-12)


def test_seed_determinism():
    d = IIDProduct(LaplaceLaw(0.5), 3)
    a, b = noise.sample(d, 11, 70_000), noise.sample(d, 11, 70_000)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, noise.sample(d, 12, 70_000))


def test_prefix_stable_across_batches():
    d = IsotropicGaussian(1.0, 2)
    short = noise.sample(d, 3, 100)
    long = noise.sample(d, 3, noise.SAMPLE_BATCH + 5)
    np.testing.assert_array_equal(short, long[:100])


def test_shift_consistency():
    d = UniformBox(1.0, 4)
    v = np.array([0.3, -0.2, 1.0, 0.0])
    x = noise.sample(d, 5, 200_000) + v
    se = x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])
    assert np.all(np.abs(x.mean(axis=0) - v) < 4 * se)


def test_norm_duality():
    rng = np.random.default_rng(0)
    for p in (2, 4, INF):
        e = 0.5 - (0 if p is INF else 1 / p)
        for _ in range(2000):
            d = int(rng.integers(1, 40))
            v = rng.standard_normal(d) * rng.exponential()
            assert lp_norm(v, 2) <= d**e * lp_norm(v, p) * (1 + 1e-12)


def test_dense_vector_read_only():
    v = DenseVector([3.0, 4.0])
    assert v.dim == 2 and v.lp_norm(2) == 5.0 and v.lp_norm("inf") == 4.0
    with pytest.raises(ValueError):
        v.entries[0] = 1.0


def test_parse_p():
    assert parse_p("inf") is INF and parse_p(math.inf) is INF and parse_p("4") == 4.0
    with pytest.raises(ValueError):
        parse_p("abc")


@pytest.mark.parametrize("law, m2, m1", [
    (GaussianLaw(2.0), 4.0, 2.0 * math.sqrt(2 / math.pi)),
    (UniformLaw(3.0), 3.0, 1.5),
    (LaplaceLaw(0.5), 0.5, 0.5),
])
def test_law_moments_against_samples(law, m2, m1):
    x = law.sample(np.random.default_rng(9), 400_000)
    assert law.second_moment().value == pytest.approx(m2)
    assert law.mean_abs().value == pytest.approx(m1)
    assert np.mean(x * x) == pytest.approx(m2, rel=0.02)
    assert np.mean(np.abs(x)) == pytest.approx(m1, rel=0.01)


def test_pareto_tail_law():
    law = ParetoTailLaw(4.0, 1.0)
    x = np.abs(law.sample(np.random.default_rng(1), 400_000))
    for t in (1.5, 2.0, 4.0):
        assert np.mean(x > t) == pytest.approx(law.tail(t), rel=0.05)
    assert law.second_moment().value == pytest.approx(2.0)  # k s^2 / (k - 2)


def test_empirical_law_moments():
    law = EmpiricalLaw(lambda rng, n: rng.normal(0, 1, n), n_cache=200_000, seed=1)
    assert not law.has_density()
    m = law.second_moment()
    assert not m.exact
    assert abs(m.value - 1.0) < 4 * m.stderr


def test_parse_distribution_round_trip():
    for spec in ("gauss:sigma=0.12,d=3072", "box:r=1.5,d=64", "iid:laplace:b=1,d=100"):
        dist = parse_distribution(spec)
        assert parse_distribution(dist.spec()).spec() == dist.spec()
    assert isinstance(parse_distribution("iid:laplace:b=1,d=100").marginal(), LaplaceLaw)


@pytest.mark.parametrize("spec", ["gauss:sigma=1", "foo:d=2", "box:r=1,d=2,q=3", "iid:cauchy:s=1,d=2",
                                  "gauss:sigma=-1,d=2", "gauss:sigma=x,d=2"])
def test_parse_distribution_rejects(spec):
    with pytest.raises(ValueError):
        parse_distribution(spec)


def test_parse_vector():
    np.testing.assert_array_equal(parse_vector("[1,2,3]"), [1, 2, 3])
    np.testing.assert_array_equal(parse_vector("0.5", 3), [0.5, 0.5, 0.5])
    np.testing.assert_array_equal(parse_vector("zeros", 2), [0, 0])
    with pytest.raises(ValueError):
        parse_vector("1,2", 3)
