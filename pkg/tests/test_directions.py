import numpy as np
import pytest

from smoothcert.directions import (
    CapacityError,
    bad_directions,
    gram_int,
    hadamard_signs,
    largest_power_of_two,
    project_coefficients,
)
from smoothcert.norms import lp_norm


def brute_gram(rows):
    return [[sum(int(a) * int(b) for a, b in zip(r, s)) for s in rows] for r in rows]


def test_signs_small_cases():
    np.testing.assert_array_equal(hadamard_signs(0), [[1]])
    assert {tuple(r) for r in hadamard_signs(1)} == {(1, 1), (1, -1)}
    h3 = hadamard_signs(3)
    assert h3.shape == (8, 8)
    assert brute_gram(h3.tolist()) == (8 * np.eye(8, dtype=int)).tolist()


@pytest.mark.parametrize("n", range(11))
def test_exact_integer_orthogonality(n):
    h = hadamard_signs(n)
    assert h.dtype == np.int8
    m = 1 << n
    np.testing.assert_array_equal(gram_int(h), m * np.eye(m, dtype=np.int64))


def test_capacity_limit():
    with pytest.raises(CapacityError):
        hadamard_signs(14)
    with pytest.raises(ValueError):
        hadamard_signs(-1)


def test_b_exceeds_half_d():
    for d in range(1, 4097):
        b = largest_power_of_two(d)
        assert b <= d < 2 * b


def test_examples():
    fam = bad_directions(2, "inf", 1.0)
    assert fam.b == 2
    for v in fam:
        assert lp_norm(v, "inf") == 1.0 and lp_norm(v, 2) == pytest.approx(np.sqrt(2))
    fam = bad_directions(3, 2, 1.0)
    assert fam.b == 2
    for v in fam:
        assert lp_norm(v, 2) == pytest.approx(1.0) and v[2] == 0.0
    fam = bad_directions(1024, 4, 0.5)
    assert fam.b == 1024
    assert lp_norm(fam.vectors[7], 2) == pytest.approx(2.8284271247461903, abs=1e-12)


def test_rejects_p_below_two():
    with pytest.raises(ValueError):
        bad_directions(8, 1.5)


def test_permutation_places_support():
    perm = np.random.default_rng(0).permutation(6)
    fam = bad_directions(6, 4, 1.0, permutation=perm)
    support = set(np.flatnonzero(np.any(fam.vectors != 0, axis=0)).tolist())
    assert support == set(perm[:4].tolist())
    np.testing.assert_allclose(fam.vectors @ fam.vectors.T, fam.target_l2**2 * np.eye(4), atol=1e-12)


def test_projection_examples():
    fam = bad_directions(8, "inf", 1.0)
    np.testing.assert_array_equal(project_coefficients(fam, np.zeros(8)), np.zeros(8))
    c = project_coefficients(fam, fam.vectors[0])
    assert c[0] == pytest.approx(fam.target_l2) and np.allclose(c[1:], 0.0)
    x = np.random.default_rng(1).standard_normal(8)
    assert np.sum(project_coefficients(fam, x) ** 2) <= x @ x + 1e-12


def test_pythagorean_in_span():
    rng = np.random.default_rng(2)
    fam = bad_directions(12, 4, 0.7)
    for _ in range(20):
        x = rng.standard_normal(fam.b) @ fam.vectors
        assert np.sum(project_coefficients(fam, x) ** 2) == pytest.approx(x @ x, abs=1e-9)
