import mpmath
import numpy as np
import pytest
from scipy import special

from smoothcert import kernels

mpmath.mp.dps = 40


def mp_ndtr(x):
    return float(mpmath.ncdf(x))


def mp_ndtri(p):
    # 2p - 1 must not round to -1 for tiny p
    with mpmath.workdps(360):
        return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))


def test_ndtr_matches_mpmath(backend):
    xs = np.concatenate([np.linspace(-8, 8, 161), [-37.5, -20.0, 0.0, 20.0]])
    got = kernels.ndtr(xs, backend)
    want = np.array([mp_ndtr(x) for x in xs])
    np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-300)


def test_ndtri_matches_mpmath(backend):
    ps = np.concatenate([np.linspace(0.001, 0.999, 199), [1e-300, 1e-100, 1e-20, 1e-8, 0.5, 1 - 1e-12]])
    got = kernels.ndtri(ps, backend)
    want = np.array([mp_ndtri(p) for p in ps])
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_ndtri_known_values(backend):
    assert kernels.ndtri([0.5], backend)[0] == 0.0
    assert kernels.ndtri([0.8413447460685429], backend)[0] == pytest.approx(1.0, abs=1e-12)
    assert kernels.ndtri([0.975], backend)[0] == pytest.approx(1.959963984540054, abs=1e-12)


def test_ndtri_edges(backend):
    out = kernels.ndtri([0.0, 1.0, -0.1, 1.1, np.nan], backend)
    assert out[0] == -np.inf and out[1] == np.inf
    assert np.isnan(out[2:]).all()


def test_ndtri_inverts_ndtr(backend):
    # above ~5 the round trip is limited by Phi rounding to 1, not by the inverse
    x = np.linspace(-30, 5, 3001)
    back = kernels.ndtri(kernels.ndtr(x, backend), backend)
    np.testing.assert_allclose(back, x, rtol=1e-10, atol=1e-9)


def test_ndtri_agrees_with_scipy(backend):
    p = np.random.default_rng(0).uniform(0, 1, 5000)
    np.testing.assert_allclose(kernels.ndtri(p, backend), special.ndtri(p), rtol=1e-12, atol=1e-13)


def test_box_counts_brute_force(backend):
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1.5, 1.5, (2000, 3))
    shift = np.array([0.4, -0.3, 0.1])
    a, b, both = kernels.box_counts(pts, shift, 1.0, backend)
    in_a = np.all(np.abs(pts) <= 1.0, axis=1)
    in_b = np.all(np.abs(pts - shift) <= 1.0, axis=1)
    assert (a, b, both) == (in_a.sum(), in_b.sum(), (in_a & in_b).sum())


def test_max_abs_rows(backend):
    x = np.random.default_rng(1).standard_normal((500, 17))
    np.testing.assert_array_equal(kernels.max_abs_rows(x, backend), np.abs(x).max(axis=1))


def test_halfspace_labels(backend):
    rng = np.random.default_rng(2)
    x, w = rng.standard_normal((1000, 5)), rng.standard_normal(5)
    np.testing.assert_array_equal(kernels.halfspace_labels(x, w, 0.3, backend), (x @ w + 0.3 > 0).astype(np.int64))


def test_backends_agree():
    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    p = np.random.default_rng(5).uniform(0, 1, 10000)
    np.testing.assert_allclose(kernels.ndtri(p, "compiled"), kernels.ndtri(p, "python"), rtol=1e-13, atol=1e-14)
    x = np.linspace(-10, 10, 1001)
    np.testing.assert_allclose(kernels.ndtr(x, "compiled"), kernels.ndtr(x, "python"), rtol=1e-14)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SMOOTHCERT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import smoothcert; print(smoothcert.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
