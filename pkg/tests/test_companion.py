import math

import numpy as np
import pytest

from sunsebdf.numerics.constants import MU_STAR, QUOTED_R3
from sunsebdf.numerics.exceptions import InvalidArgument
from sunsebdf.numerics.kernels import d_coeff
from sunsebdf.stability import (
    Companion2x2,
    HNormConfig,
    alpha,
    alpha_partials,
    beta,
    beta_partials,
    disk_condition,
    eigen_moduli,
    g_function,
    h0_norm,
    h_norm,
    h_norm_direct,
)


def test_uniform_coefficients():
    assert alpha(1.0, 1.0) == pytest.approx(7 / 11, rel=1e-15)
    assert beta(1.0, 1.0) == pytest.approx(2 / 11, rel=1e-15)


def test_bdf2_limit():
    r = np.array([0.5, 1.0, 4.0])
    np.testing.assert_allclose(alpha(r, 0.0), r / (1 + 2 * r), rtol=1e-15)
    np.testing.assert_array_equal(beta(r, 0.0), 0.0)


def test_closed_forms_match_coefficient_ratios():
    rng = np.random.default_rng(3)
    x, y = rng.uniform(0.01, 5.0, (2, 500))
    d0 = d_coeff(0, x, y)
    np.testing.assert_allclose(alpha(x, y), -d_coeff(1, x, y) / d0, rtol=1e-12)
    np.testing.assert_allclose(beta(x, y), d_coeff(2, x, y) / d0, rtol=1e-12)


def test_negative_ratios_are_rejected():
    with pytest.raises(InvalidArgument):
        alpha(-0.1, 1.0)
    with pytest.raises(InvalidArgument):
        g_function(1.0, -2.0)


def test_partials_match_central_differences():
    rng = np.random.default_rng(11)
    x, y = rng.uniform(0.1, 3.0, (2, 50))
    h = 1e-6
    for fn, partials in ((alpha, alpha_partials), (beta, beta_partials)):
        dx, dy = partials(x, y)
        np.testing.assert_allclose(dx, (fn(x + h, y) - fn(x - h, y)) / (2 * h), rtol=1e-6)
        np.testing.assert_allclose(dy, (fn(x, y + h) - fn(x, y - h)) / (2 * h), rtol=1e-6)


def test_closed_norm_matches_matrix_norm():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        a, b = rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0)
        mu = complex(rng.uniform(-1.0, 1.0), rng.uniform(0.05, 1.0))
        A = Companion2x2(a, b)
        assert h_norm(A, mu) == pytest.approx(h_norm_direct(A, mu), abs=1e-12)


@pytest.mark.parametrize("r", [0.1, 1.0, 5.0, 40.0])
def test_bdf2_special_parameters(r):
    A = Companion2x2.from_ratios(r, 0.0)
    a = A.alpha
    assert h_norm(A, 0.5j) == pytest.approx(math.sqrt(a * a + 0.25), rel=1e-13)
    assert h_norm(A, 0.25 + 0.25j) == pytest.approx(math.sqrt(2 * a * a - a + 0.25), rel=1e-13)
    assert 0.5 <= h_norm(A, 0.5j) < 1 / math.sqrt(2)


def test_transform_norms():
    cfg = HNormConfig()
    assert cfg.mu == MU_STAR
    assert cfg.h_inf == pytest.approx(2.0)
    assert cfg.h_inv_inf == pytest.approx(1 + math.sqrt(2) / 2)
    np.testing.assert_allclose(cfg.H @ cfg.H_inv, np.eye(2), atol=1e-15)


def test_real_parameter_is_rejected():
    with pytest.raises(InvalidArgument):
        HNormConfig(0.5)
    with pytest.raises(InvalidArgument):
        h_norm(Companion2x2(0.5, 0.1), 2.0)


def test_contraction_below_threshold(roots):
    grid = np.linspace(0.01, roots.r3 - 0.01, 60)
    worst = max(h_norm(Companion2x2.from_ratios(x, y)) for x in grid for y in grid)
    assert worst < 1


def test_uniform_norm():
    assert h_norm(Companion2x2.from_ratios(1.0, 1.0)) == pytest.approx(0.71, abs=0.01)


def test_norm_reaches_one_at_threshold(roots):
    A = Companion2x2.from_ratios(roots.r3, roots.r3)
    assert h_norm(A) == pytest.approx(1.0, abs=1e-10)


def test_lower_triangular_norm(roots):
    assert h0_norm(Companion2x2.from_ratios(1.0, 1.0)) == pytest.approx(8 / 11, rel=1e-14)
    assert h0_norm(Companion2x2.from_ratios(roots.r30, roots.r30)) == pytest.approx(1.0, abs=1e-12)
    grid = np.linspace(0.05, roots.r30 - 0.05, 30)
    assert max(h0_norm(Companion2x2.from_ratios(x, y)) for x in grid for y in grid) < 1


def test_eigen_moduli():
    big, small = eigen_moduli(Companion2x2.from_ratios(1.0, 1.0))
    assert big == pytest.approx(math.sqrt(2 / 11))
    assert small == pytest.approx(math.sqrt(2 / 11))
    assert eigen_moduli(Companion2x2(0.5, 0.0)) == pytest.approx((0.5, 0.0))


def test_companion_matrix():
    A = Companion2x2(0.3, 0.1)
    np.testing.assert_array_equal(A.matrix(), [[0.3, -0.1], [1.0, 0.0]])


def test_disk_margins(roots):
    assert disk_condition(MU_STAR, roots.r3, roots.r3) == pytest.approx(0.0, abs=1e-9)
    assert disk_condition(MU_STAR, 1.0, 1.0) > 0
    # 𝔇(0, 0) is centred at i/2 with radius 1/2
    assert disk_condition(0.5j, 0.0, 0.0) == pytest.approx(0.5)
    assert disk_condition(0.0, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert disk_condition(MU_STAR, 3.0, 3.0) < 0


def test_disk_matches_norm_for_complex_roots():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(5_000):
        x, y = rng.uniform(0.05, 3.4, 2)
        A = Companion2x2.from_ratios(x, y)
        if A.alpha**2 >= 4 * A.beta:
            continue
        mu = complex(rng.uniform(-0.5, 1.5), rng.uniform(0.01, 1.5))
        margin = disk_condition(mu, x, y)
        norm = h_norm(A, mu)
        if abs(margin) < 1e-9 or abs(norm - 1) < 1e-9:
            continue
        assert (margin > 0) == (norm < 1)
        checked += 1
    assert checked > 1000


def test_g_special_values():
    assert g_function(1.0, 1.0) == pytest.approx(-28 / 121, rel=1e-14)
    x = np.array([0.0, 0.5, 3.0])
    np.testing.assert_allclose(g_function(x, 0.0), -2 / (2 * x + 1) ** 2, rtol=1e-14)
    y = np.array([0.0, 1.0, 4.0])
    np.testing.assert_allclose(g_function(0.0, y), -(4 * y + 2) / (y + 1), rtol=1e-14)


@pytest.mark.parametrize("x,y", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3), (2.4, 2.5)])
def test_g_matches_coefficient_form(x, y):
    a, b = alpha(x, y), beta(x, y)
    expected = (2 * a * a + 3 * b * b - 4 * a * b - 2 * a + 2 * b) / (x * (x + 1))
    assert g_function(x, y) == pytest.approx(expected, rel=1e-9)


def test_g_near_threshold(roots):
    assert g_function(QUOTED_R3, QUOTED_R3) == pytest.approx(-2.77e-5, rel=0.05)
    assert abs(g_function(roots.r3, roots.r3)) < 1e-10


def test_vanishing_first_ratio():
    y = np.array([0.0, 0.7, 3.0])
    np.testing.assert_array_equal(alpha(0.0, y), 0.0)
    np.testing.assert_array_equal(beta(0.0, y), 0.0)
    assert h0_norm(Companion2x2(0.0, 0.0)) == 1.0


def test_roots_inside_unit_circle(roots):
    grid = np.linspace(0.02, roots.r3_hat - 0.02, 40)
    assert max(eigen_moduli(Companion2x2.from_ratios(x, y))[0] for x in grid for y in grid) < 1
