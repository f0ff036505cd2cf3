import numpy as np
import pytest
from scipy import stats

from smoothcert.noise import GaussianLaw, IIDProduct, IsotropicGaussian, LaplaceLaw, UniformBox
from smoothcert.tv import tv_gaussian_shift
from smoothcert.witness import NoWitness, WitnessClassifier, build_witness, verify_witness


def test_gaussian_witness_example():
    w = build_witness(IsotropicGaussian(1.0, 2), [2.0, 0.0], 0.5)
    assert w.set_kind == "halfspace"
    assert w.mass == pytest.approx(stats.norm.cdf(1.0), abs=1e-12)
    assert w.shifted_mass == pytest.approx(stats.norm.cdf(-1.0), abs=1e-12)
    assert w.alpha == pytest.approx(0.920672, abs=1e-6)
    assert w.beta == pytest.approx(0.420672, abs=1e-6)


def test_verify_gaussian_witness_example():
    d = IsotropicGaussian(1.0, 2)
    w = build_witness(d, [2.0, 0.0], 0.5)
    res = verify_witness(w, d, 1_000_000, 42, 0.5)
    assert res.passed
    assert res.prediction_at_0 == 1 and res.prediction_at_v == 0
    assert w.expected_gap == pytest.approx(0.682689, abs=1e-6)
    assert abs(res.score_at_0 - (0.5 + w.expected_gap / 2)) < 0.003


def test_zero_shift_refused():
    with pytest.raises(NoWitness):
        build_witness(IsotropicGaussian(1.0, 3), np.zeros(3), 0.1)


def test_refuses_at_boundary():
    d = IsotropicGaussian(1.0, 2)
    tv = tv_gaussian_shift(1.0, 2.0).value
    with pytest.raises(NoWitness):
        build_witness(d, [2.0, 0.0], tv)
    build_witness(d, [2.0, 0.0], tv - 1e-9)


def test_box_witness_example():
    d = UniformBox(1.0, 1)
    w = build_witness(d, [0.5], 0.2)
    assert w.expected_gap == pytest.approx(0.25)
    assert (w.alpha, w.beta) == (1.0, 0.5)
    assert verify_witness(w, d, 200_000, 1, 0.2).passed


def test_box_witness_multidim():
    d = UniformBox(1.0, 3)
    w = build_witness(d, [0.5, -0.4, 0.2], 0.3)
    res = verify_witness(w, d, 400_000, 2, 0.3)
    assert res.passed


def test_iid_gaussian_marginal_uses_halfspace():
    w = build_witness(IIDProduct(GaussianLaw(2.0), 3), [1.0, 2.0, 2.0], 0.2)
    assert w.set_kind == "halfspace"


def test_unsupported_family():
    with pytest.raises(TypeError):
        build_witness(IIDProduct(LaplaceLaw(1.0), 2), [3.0, 0.0], 0.1)


def test_score_identity_under_both_laws():
    d = IsotropicGaussian(0.7, 4)
    v = np.array([0.5, -0.3, 0.8, 0.1])
    w = build_witness(d, v, 0.1)
    for shift, mass in ((np.zeros(4), w.mass), (v, w.shifted_mass)):
        pts = d.sample(5, 400_000) + shift
        got = w(pts, np.random.default_rng(1)).mean()
        se = np.sqrt(0.25 / pts.shape[0])
        assert abs(got - (0.5 + (mass - w.shifted_mass) / 2)) < 4 * se


def test_classifier_invariants():
    with pytest.raises(ValueError):
        WitnessClassifier(lambda x: x[:, 0] > 0, 0.9, 0.5, np.zeros(1), 0.5, 0.1, 0.4, "halfspace")
    with pytest.raises(ValueError):
        WitnessClassifier(lambda x: x[:, 0] > 0, 1.2, 0.7, np.zeros(1), 0.5, 0.1, 0.4, "halfspace")


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        build_witness(IsotropicGaussian(1.0, 3), [1.0, 0.0], 0.1)


def test_verify_is_deterministic():
    d = IsotropicGaussian(1.0, 2)
    w = build_witness(d, [1.5, 0.5], 0.3)
    assert verify_witness(w, d, 50_000, 9, 0.3).as_dict() == verify_witness(w, d, 50_000, 9, 0.3).as_dict()
