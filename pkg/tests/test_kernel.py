import math

import numpy as np
import pytest
from scipy import integrate

from mncc.kernel import (
    DegenerateWeights,
    KernelConfig,
    c_K,
    cond_expect,
    gaussian_product_kernel,
    kde,
    normalized_weights,
)


def test_kernel_at_origin():
    assert gaussian_product_kernel(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)
    assert gaussian_product_kernel((0.0, 0.0)) == pytest.approx(1 / (2 * math.pi), abs=1e-12)


def test_kernel_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = rng.normal(size=3)
        assert gaussian_product_kernel(u) == gaussian_product_kernel(-u)


def test_ck_one_dimensional_value():
    assert c_K(1) == pytest.approx(2 * math.sqrt(math.pi), abs=1e-10)
    assert c_K(2) == pytest.approx(4 * math.pi, abs=1e-10)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_ck_matches_quadrature_of_squared_kernel(d):
    # independent oracle: numerically integrate k0^2 over R^d
    if d == 1:
        val, _ = integrate.quad(lambda u: gaussian_product_kernel(u) ** 2, -np.inf, np.inf)
    else:
        val, _ = integrate.nquad(
            lambda *u: gaussian_product_kernel(np.array(u)) ** 2,
            [(-8.0, 8.0)] * d,
        )
    assert 1.0 / c_K(d) == pytest.approx(val, abs=1e-8)


def test_kde_single_point():
    cfg = KernelConfig(bandwidth=0.1, z_dim=1)
    val = kde(0.4, np.array([0.4]), cfg)
    assert val == pytest.approx((1 / 0.1) / math.sqrt(2 * math.pi), abs=1e-12)


def test_kde_total_mass_integrates_to_one_on_the_line():
    rng = np.random.default_rng(3)
    zs = rng.random(1000)
    cfg = KernelConfig(bandwidth=0.08)
    total, _ = integrate.quad(lambda z: kde(z, zs, cfg), -np.inf, np.inf, limit=300)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_kde_mass_on_unit_interval_loses_boundary_spill():
    # For uniform data the expected mass on [0,1] is 1 - 2 h / sqrt(2 pi) up to
    # exponentially small terms: each kernel sheds about half of what the
    # boundary cuts off.  At h=0.08 that is ~0.936, not 1.
    rng = np.random.default_rng(4)
    zs = rng.random(1000)
    h = 0.08
    cfg = KernelConfig(bandwidth=h)
    mass, _ = integrate.quad(lambda z: kde(z, zs, cfg), 0.0, 1.0, limit=300)
    expected = 1.0 - 2.0 * h / math.sqrt(2 * math.pi)
    assert mass == pytest.approx(expected, abs=0.02)


def test_kde_shift_equivariance():
    rng = np.random.default_rng(5)
    zs = rng.random(50)
    cfg = KernelConfig(bandwidth=0.2)
    for c in (-3.0, 0.7, 12.0):
        assert kde(0.3 + c, zs + c, cfg) == pytest.approx(kde(0.3, zs, cfg), rel=1e-12)


def test_kde_nonnegative_and_monotone_in_proximity():
    cfg = KernelConfig(bandwidth=0.1)
    rng = np.random.default_rng(11)
    zs = rng.random(20)
    for z in (0.05, 0.5, 0.95):
        before = kde(z, zs, cfg)
        assert before >= 0
        assert kde(z, np.append(zs, z), cfg) > before


def test_cond_expect_constant_is_exact():
    rng = np.random.default_rng(6)
    zs = rng.random(40)
    cfg = KernelConfig(bandwidth=0.05)
    for z in (0.01, 0.4, 0.99):
        assert cond_expect(np.full(40, 2.5), z, zs, cfg) == pytest.approx(2.5, abs=1e-12)


def test_cond_expect_symmetric_two_point():
    cfg = KernelConfig(bandwidth=0.3)
    z = 0.5
    val = cond_expect(np.array([0.0, 1.0]), z, np.array([z - 0.2, z + 0.2]), cfg)
    assert val == pytest.approx(0.5, abs=1e-12)


def test_cond_expect_matches_brute_force():
    # independent reimplementation with plain python floats
    rng = np.random.default_rng(7)
    zs = rng.random(30)
    g = rng.normal(size=30)
    h, z = 0.07, 0.42
    weights = [math.exp(-0.5 * ((z - zi) / h) ** 2) for zi in zs]
    expected = sum(w * gi for w, gi in zip(weights, g)) / sum(weights)
    got = cond_expect(g, z, zs, KernelConfig(bandwidth=h))
    assert got == pytest.approx(expected, abs=1e-12)


def test_weights_normalized_and_nonnegative():
    rng = np.random.default_rng(8)
    cfg = KernelConfig(bandwidth=0.11, z_dim=2)
    zs = rng.random((60, 2))
    for _ in range(20):
        w = normalized_weights(rng.random(2), zs, cfg)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_cond_expect_linear_in_g():
    rng = np.random.default_rng(9)
    zs = rng.random(50)
    cfg = KernelConfig(bandwidth=0.09)
    g1, g2 = rng.normal(size=50), rng.normal(size=50)
    for _ in range(20):
        z = rng.random()
        a, b = rng.normal(size=2)
        lhs = cond_expect(a * g1 + b * g2, z, zs, cfg)
        rhs = a * cond_expect(g1, z, zs, cfg) + b * cond_expect(g2, z, zs, cfg)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_cond_expect_stays_in_range():
    rng = np.random.default_rng(10)
    zs = rng.random(25)
    g = rng.normal(size=25)
    cfg = KernelConfig(bandwidth=0.2)
    val = cond_expect(g, 0.5, zs, cfg)
    assert g.min() - 1e-12 <= val <= g.max() + 1e-12


def test_degenerate_weights_raised_on_underflow():
    cfg = KernelConfig(bandwidth=0.005)
    with pytest.raises(DegenerateWeights) as exc:
        cond_expect(np.array([1.0]), 10.0, np.array([0.0]), cfg)
    assert exc.value.z[0] == 10.0


def test_config_validation():
    with pytest.raises(ValueError):
        KernelConfig(bandwidth=0.0)
    with pytest.raises(ValueError):
        KernelConfig(bandwidth=0.1, z_dim=0)
