import numpy as np
import pytest
from scipy import integrate, linalg

from mncc.basis import BasisSpec
from mncc.data import Sample
from mncc.estimator import (
    ConditionalMoments,
    SingularMoments,
    estimate_moments,
    g_matrix,
    rho_hat,
    rho_hat_eigen,
    rho_population_bvn,
)
from mncc.kernel import KernelConfig


def random_moments(rng, p=2, q=2, floor=0.02):
    """Moments of a random weighted one-hot sample: a joint (p, q) table."""
    joint = rng.random((p, q)) + floor
    joint /= joint.sum()
    return ConditionalMoments(v11=np.diag(joint.sum(axis=1)),
                              v12=joint,
                              v22=np.diag(joint.sum(axis=0)))


def test_moments_single_row():
    sample = Sample(x=np.array([0.2]), y=np.array([0.8]), z=np.array([0.5]))
    m = estimate_moments(sample, BasisSpec(1, 2), BasisSpec(1, 2), 0.5, KernelConfig(0.1))
    np.testing.assert_allclose(m.v12, [[0.0, 1.0], [0.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(m.v11, np.diag([1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(m.v22, np.diag([0.0, 1.0]), atol=1e-15)


def test_moment_row_sums_match_marginals():
    rng = np.random.default_rng(0)
    sample = Sample(x=rng.random(200), y=rng.random(200), z=rng.random(200))
    m = estimate_moments(sample, BasisSpec(1, 3), BasisSpec(1, 4), 0.4, KernelConfig(0.1))
    np.testing.assert_allclose(m.v12.sum(axis=1), np.diag(m.v11), atol=1e-12)
    np.testing.assert_allclose(m.v12.sum(axis=0), np.diag(m.v22), atol=1e-12)
    assert np.trace(m.v11) == pytest.approx(1.0, abs=1e-10)
    assert np.trace(m.v22) == pytest.approx(1.0, abs=1e-10)


def test_moments_match_weighted_count_oracle():
    import math

    rng = np.random.default_rng(1)
    n, h, z0 = 60, 0.13, 0.37
    x, y, z = rng.random(n), rng.random(n), rng.random(n)
    sample = Sample(x=x, y=y, z=z)
    m = estimate_moments(sample, BasisSpec(1, 2), BasisSpec(1, 2), z0, KernelConfig(h))
    # brute-force re-count with plain python
    w = [math.exp(-0.5 * ((z0 - zi) / h) ** 2) for zi in z]
    s = sum(w)
    expected = np.zeros((2, 2))
    for wi, xi, yi in zip(w, x, y):
        expected[0 if xi <= 0.5 else 1, 0 if yi <= 0.5 else 1] += wi / s
    np.testing.assert_allclose(m.v12, expected, atol=1e-12)


def test_g_matrix_identity_case_hand_checked():
    p = 3
    eye = np.eye(p) / p
    m = ConditionalMoments(v11=eye, v12=eye, v22=eye)
    got = g_matrix(m, np.ones(p), ridge=0.0)
    # direct arithmetic: (I/p)(pI)(I/p)(pI) - (I/p) 11^T = I - J/p
    expected = np.eye(p) - np.ones((p, p)) / p
    np.testing.assert_allclose(got, expected, atol=1e-12)
    assert max(np.linalg.eigvalsh((got + got.T) / 2)) == pytest.approx(1.0, abs=1e-10)


def test_g_matrix_vanishes_under_product_structure():
    rng = np.random.default_rng(2)
    px = rng.dirichlet(np.ones(3) * 5)
    py = rng.dirichlet(np.ones(4) * 5)
    m = ConditionalMoments(v11=np.diag(px), v12=np.outer(px, py), v22=np.diag(py))
    g = g_matrix(m, np.ones(3), ridge=0.0)
    assert np.max(np.abs(np.linalg.eigvals(g))) < 1e-10


def test_g_matrix_eigenvalues_match_independent_assembly():
    rng = np.random.default_rng(3)
    for _ in range(25):
        m = random_moments(rng, p=3, q=3)
        g = g_matrix(m, np.ones(3), ridge=0.0)
        # assemble the product independently and use a different eigensolver
        direct = m.v12 @ np.linalg.inv(m.v22) @ m.v12.T @ np.linalg.inv(m.v11) \
            - m.v11 @ np.outer(np.ones(3), np.ones(3))
        ours = np.sort(np.linalg.eigvals(g).real)
        ref = np.sort(linalg.eigvals(direct).real)
        np.testing.assert_allclose(ours, ref, atol=1e-8)


def test_singular_moments_raised():
    m = ConditionalMoments(v11=np.diag([1.0, 0.0]), v12=np.zeros((2, 2)), v22=np.diag([0.5, 0.5]))
    with pytest.raises(SingularMoments):
        g_matrix(m, np.ones(2), ridge=0.0)


def test_rho_is_one_for_identical_variables():
    rng = np.random.default_rng(4)
    x = rng.random(100)
    sample = Sample(x=x, y=x, z=rng.random(100))
    m = estimate_moments(sample, BasisSpec(1, 2), BasisSpec(1, 2), 0.5, KernelConfig(0.1))
    rho, _ = rho_hat(m, np.ones(2))
    assert rho == pytest.approx(1.0, abs=1e-8)


def test_rho_is_zero_under_empirical_product_weights():
    px = np.array([0.3, 0.7])
    py = np.array([0.45, 0.55])
    m = ConditionalMoments(v11=np.diag(px), v12=np.outer(px, py), v22=np.diag(py))
    rho, _ = rho_hat(m, np.ones(2), ridge=0.0)
    assert rho == pytest.approx(0.0, abs=1e-8)


def test_eigen_and_svd_routes_agree():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p, q = rng.integers(2, 5, size=2)
        m = random_moments(rng, p=int(p), q=int(q))
        _, raw = rho_hat(m, np.ones(int(p)), ridge=0.0)
        eig = rho_hat_eigen(m, np.ones(int(p)), ridge=0.0)
        assert raw == pytest.approx(eig, abs=1e-8)


def test_rho_bounds_on_well_conditioned_inputs():
    rng = np.random.default_rng(6)
    for _ in range(300):
        m = random_moments(rng, p=3, q=2)
        rho, raw = rho_hat(m, np.ones(3))
        assert 0.0 <= rho <= 1.0
        assert -1e-6 <= raw <= 1.0 + 1e-6
        assert rho == pytest.approx(np.sqrt(min(1.0, max(0.0, raw))), abs=1e-15)


def test_rho_symmetric_in_x_and_y():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = random_moments(rng, p=3, q=4)
        swapped = ConditionalMoments(v11=m.v22, v12=m.v12.T, v22=m.v11)
        r1, _ = rho_hat(m, np.ones(3), ridge=0.0)
        r2, _ = rho_hat(swapped, np.ones(4), ridge=0.0)
        assert r1 == pytest.approx(r2, abs=1e-10)


def test_rho_invariant_under_cell_relabeling():
    rng = np.random.default_rng(8)
    for _ in range(50):
        m = random_moments(rng, p=4, q=3)
        pi = rng.permutation(4)
        sigma = rng.permutation(3)
        permuted = ConditionalMoments(
            v11=m.v11[np.ix_(pi, pi)],
            v12=m.v12[np.ix_(pi, sigma)],
            v22=m.v22[np.ix_(sigma, sigma)],
        )
        r1, _ = rho_hat(m, np.ones(4), ridge=0.0)
        r2, _ = rho_hat(permuted, np.ones(4), ridge=0.0)
        assert r1 == pytest.approx(r2, abs=1e-10)


def test_rho_bit_identical_under_boundary_fixing_monotone_map():
    rng = np.random.default_rng(9)
    x, y, z = rng.random(300), rng.random(300), rng.random(300)

    def warp(t):
        # strictly increasing on [0,1], fixes the cell boundary 0.5
        upper = np.clip(2 * (t - 0.5), 0.0, 1.0)
        return np.where(t <= 0.5, 0.5 * (2 * t) ** 2, 0.5 + 0.5 * upper**0.7)

    cfgk = KernelConfig(0.09)
    bx = by = BasisSpec(1, 2)
    m1 = estimate_moments(Sample(x=x, y=y, z=z), bx, by, 0.6, cfgk)
    m2 = estimate_moments(Sample(x=warp(x), y=y, z=z), bx, by, 0.6, cfgk)
    r1 = rho_hat(m1, np.ones(2))
    r2 = rho_hat(m2, np.ones(2))
    assert r1 == r2  # bitwise: only cell memberships enter


def test_population_rho_endpoints():
    assert rho_population_bvn(0.0) == 0.0
    assert rho_population_bvn(1.0) == pytest.approx(1.0, abs=1e-12)
    assert rho_population_bvn(-1.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        rho_population_bvn(1.5)


def test_population_rho_against_orthant_probability():
    # oracle: 2-d quadrature of the bivariate normal orthant mass
    from scipy.stats import multivariate_normal

    for r in (0.2, 0.5, -0.7):
        mvn = multivariate_normal(mean=[0, 0], cov=[[1, r], [r, 1]])
        p00 = mvn.cdf([0.0, 0.0])
        corr = (p00 - 0.25) / 0.25
        assert rho_population_bvn(r) == pytest.approx(abs(corr), abs=1e-7)


def test_population_rho_average_matches_reference_at_small_a():
    val, _ = integrate.quad(lambda u: rho_population_bvn(0.1 * abs(1 - 2 * u)) ** 2, 0, 1)
    assert val == pytest.approx(0.001345575, rel=0.02)
