import math

import numpy as np
import pytest

from gravpert.green_kernel import SurfaceCollisionError, green_values
from gravpert.harmonics import eval_surface_harmonic
from gravpert.quadrature import (G7_WEIGHTS, GK_NODES, GK_WEIGHTS, QuadratureConfig,
                                 ToleranceNotMet, adaptive_integrate_1d, gauss_legendre,
                                 nested_surface_integrals, rotation_to,
                                 surface_integral_2d_rotated, surface_integral_nested)
from gravpert.sphere_geom import (SphericalPoint, cart_to_sph_array, one_minus_cos_gamma,
                                  sph_to_cart_array)

FOUR_PI = 4.0 * math.pi


def kernel(p, density=None):
    def F(phi, theta):
        g = green_values(p.r, one_minus_cos_gamma(p.phi, p.theta, phi, theta))
        return g if density is None else g * density(phi, theta)
    return F


def y11_times_two(phi, theta):
    return 2.0 * np.sin(theta) * np.exp(1j * phi)


# ---------------------------------------------------------------- Gauss-Legendre

def test_two_point_rule():
    x, w = gauss_legendre(2)
    np.testing.assert_allclose(x, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(w, [1.0, 1.0], atol=1e-15)


def test_five_point_rule():
    x, w = gauss_legendre(5)
    assert 0.0 in x
    assert w.sum() == pytest.approx(2.0, abs=1e-14)
    assert np.all(w > 0)
    assert (w @ x ** 8) == pytest.approx(2 / 9, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3, 5, 8, 13, 20, 33, 64])
def test_matches_numpy_leggauss(n):
    x, w = gauss_legendre(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(x, xr, atol=2e-15)
    np.testing.assert_allclose(w, wr, atol=2e-15)
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("n", [2, 3, 5, 7, 10, 16])
def test_exactness_degree(n):
    x, w = gauss_legendre(n)
    for k in range(2 * n):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        got = w @ x ** k
        assert abs(got - exact) <= 1e-13 * max(1.0, abs(exact))
    # for x^(2n) the rule's error equals the classical remainder exactly
    k = 2 * n
    remainder = (2 ** (2 * n + 1) * math.factorial(n) ** 4
                 / ((2 * n + 1) * math.factorial(2 * n) ** 2))
    assert 2.0 / (k + 1) - w @ x ** k == pytest.approx(remainder, rel=1e-6)


@pytest.mark.parametrize("n", [0, 1, 65])
def test_order_out_of_range(n):
    with pytest.raises(ValueError):
        gauss_legendre(n)


def test_kronrod_constants():
    assert GK_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert G7_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    for k in range(23):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert GK_WEIGHTS @ GK_NODES ** k == pytest.approx(exact, abs=1e-15)
    g7 = G7_WEIGHTS != 0
    xr, wr = np.polynomial.legendre.leggauss(7)
    np.testing.assert_allclose(GK_NODES[g7], xr, atol=1e-15)
    np.testing.assert_allclose(G7_WEIGHTS[g7], wr, atol=1e-15)


# ---------------------------------------------------------------- adaptive 1-D

def test_full_period_oscillation():
    res = adaptive_integrate_1d(lambda x: np.exp(1j * x), 0, 2 * math.pi)
    assert abs(res.value.real) <= 1e-12 and abs(res.value.imag) <= 1e-12


def test_constant():
    res = adaptive_integrate_1d(lambda x: np.ones_like(x), 0, 2 * math.pi)
    assert res.value == pytest.approx(2 * math.pi, abs=1e-14)
    assert res.evaluations == 15


def test_endpoint_singularity():
    res = adaptive_integrate_1d(lambda x: 1 / np.sqrt(x), 0, 1)
    assert abs(res.value - 2.0) <= 1e-6


def test_smooth_meets_tolerance():
    cfg = QuadratureConfig(inner_abs_tol=1e-12, inner_rel_tol=1e-12)
    a = 3 + 5j
    res = adaptive_integrate_1d(lambda x: np.exp(a * x), 0, 2, cfg)
    exact = (np.exp(2 * a) - 1) / a
    assert abs(res.value - exact) <= 1e-10 * abs(exact)
    assert res.error_estimate <= max(cfg.inner_abs_tol, cfg.inner_rel_tol * abs(res.value))


def test_tolerance_not_met_is_reported():
    cfg = QuadratureConfig(max_subdivisions=4)
    with pytest.raises(ToleranceNotMet) as info:
        adaptive_integrate_1d(lambda x: 1 / x, 0, 1, cfg)
    assert info.value.result is not None


def test_empty_interval():
    assert adaptive_integrate_1d(lambda x: x, 1.0, 1.0).value == 0


# ---------------------------------------------------------------- nested surface rule

def test_sphere_area():
    res = surface_integral_nested(lambda p, t: np.ones_like(p))
    assert abs(res.value - FOUR_PI) <= 1e-12


@pytest.mark.parametrize("l,m", [(1, 1), (2, 0), (2, -2), (3, 1)])
def test_nonconstant_harmonics_vanish(l, m):
    cfg = QuadratureConfig(n_gauss_zeta=8)
    res = surface_integral_nested(lambda p, t: eval_surface_harmonic(l, m, p, t), cfg)
    assert abs(res.value) <= 1e-10


def test_batched_items_match_single():
    f = [lambda p, t, k=k: np.cos(t) ** (2 * k) * np.exp(1j * 0 * p) for k in range(4)]
    vals, errs, _ = nested_surface_integrals(lambda p, t, item: np.cos(t) ** (2 * item), 4)
    for k in range(4):
        assert vals[k] == pytest.approx(surface_integral_nested(f[k]).value, abs=1e-13)
        assert vals[k] == pytest.approx(FOUR_PI / (2 * k + 1), abs=1e-12)


def test_kernel_exterior_point():
    # (1/4 pi) iint G dS = 1/r for r > 1; smooth in zeta, so 20 points suffice
    p = SphericalPoint(10.0, 0.4, 1.0)
    res = surface_integral_nested(kernel(p), QuadratureConfig(n_gauss_zeta=20))
    assert res.value / FOUR_PI == pytest.approx(0.1, abs=1e-10)


def test_kernel_on_surface_converges_slowly():
    # on r = 1 the inner integral is log-singular in zeta at the field point,
    # so the fixed outer rule converges only algebraically
    p = SphericalPoint(1.0, 0.0, 0.0)
    errs = [abs(surface_integral_nested(kernel(p), QuadratureConfig(n_gauss_zeta=n)).value
                / FOUR_PI - 1.0) for n in (5, 20, 64)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02


def test_equator_collision_with_odd_rule():
    # the 5-point rule has zeta = 0, which is the equator
    p = SphericalPoint(1.0, 0.0, math.pi / 2)
    with pytest.raises(SurfaceCollisionError):
        surface_integral_nested(kernel(p, y11_times_two))


def test_equator_with_even_rule_approaches_one():
    p = SphericalPoint(1.0, 0.0, math.pi / 2)
    vals = [surface_integral_nested(kernel(p, y11_times_two),
                                    QuadratureConfig(n_gauss_zeta=n)).value / FOUR_PI
            for n in (20, 64)]
    assert abs(vals[1] - 1) < abs(vals[0] - 1) < 0.1
    assert abs(vals[1] - 1) < 0.03


# ---------------------------------------------------------------- rotated 2-D rule

def test_rotation_matrix():
    for p in (SphericalPoint(1, 0.3, 1.2), SphericalPoint(2, 5.0, 0.0), SphericalPoint(1, 1, math.pi)):
        rot = rotation_to(p)
        np.testing.assert_allclose(rot @ rot.T, np.eye(3), atol=1e-15)
        assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(rot @ [0, 0, 1], sph_to_cart_array(1.0, p.phi, p.theta), atol=1e-15)


@pytest.mark.parametrize("p", [SphericalPoint(1, 0, 0), SphericalPoint(3, 2.0, 1.0),
                               SphericalPoint(1, 4.0, math.pi)])
def test_rotated_area(p):
    assert surface_integral_2d_rotated(lambda a, b: np.ones_like(a), p).value == \
        pytest.approx(FOUR_PI, abs=1e-12)


@pytest.mark.parametrize("p", [SphericalPoint(1, 0, 0), SphericalPoint(1, 1.3, 0.4),
                               SphericalPoint(2, 3.0, 2.9)])
def test_rotated_odd_harmonic(p):
    res = surface_integral_2d_rotated(lambda a, b: np.sin(b) * np.exp(1j * a), p)
    assert abs(res.value) <= 1e-10


def test_rotated_surface_kernel():
    for p in (SphericalPoint(1, 0, 0), SphericalPoint(1, 2.2, 1.9)):
        assert surface_integral_2d_rotated(kernel(p), p).value / FOUR_PI == \
            pytest.approx(1.0, abs=1e-9)
    p = SphericalPoint(1, 0, math.pi / 2)
    res = surface_integral_2d_rotated(kernel(p, y11_times_two), p)
    assert abs(res.value / FOUR_PI - 1.0) <= 1e-6


def test_rotated_matches_nested_pole_exterior():
    p = SphericalPoint(1.5, 0, 0)
    rot = surface_integral_2d_rotated(kernel(p), p).value / FOUR_PI
    nested = surface_integral_nested(kernel(p), QuadratureConfig(n_gauss_zeta=20)).value / FOUR_PI
    assert abs(rot - nested) <= 1e-6


@pytest.mark.parametrize("r", [1.1, 1.5])
@pytest.mark.parametrize("node", [0, 4, 7])
def test_nested_vs_rotated(ico, r, node):
    p = ico.nodes[node].with_radius(r)
    cfg = QuadratureConfig(n_gauss_zeta=64)
    for density in (None, y11_times_two, lambda a, b: np.cos(b) ** 2 + 0.5j * np.sin(b) * np.cos(a)):
        f = kernel(p, density)
        rot = surface_integral_2d_rotated(f, p).value / FOUR_PI
        nested = surface_integral_nested(f, cfg).value / FOUR_PI
        assert abs(rot - nested) <= 1e-6


def _rotated_integrand(F, rot):
    def G(phi, theta):
        xyz = sph_to_cart_array(1.0, phi, theta) @ rot.T
        _, p2, t2 = cart_to_sph_array(xyz)
        return F(p2, t2)
    return G


def test_rotation_invariance(rng):
    def F(phi, theta):
        x, y, z = np.moveaxis(sph_to_cart_array(1.0, phi, theta), -1, 0)
        return np.exp(x - 0.5 * z) + 1j * y * y * z + x ** 3

    cfg = QuadratureConfig(n_gauss_zeta=20)
    base = surface_integral_nested(F, cfg)
    tol = 10 * max(cfg.inner_abs_tol, cfg.inner_rel_tol * abs(base.value))
    for _ in range(5):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        q *= np.sign(np.linalg.det(q))
        g = _rotated_integrand(F, q)
        assert abs(surface_integral_nested(g, cfg).value - base.value) <= tol
        assert abs(surface_integral_2d_rotated(F, SphericalPoint(1, *rng.uniform(0, 3, 2))).value
                   - base.value) <= tol


def test_error_estimate_reported():
    res = surface_integral_nested(lambda p, t: np.exp(np.cos(p) * np.sin(t)))
    assert res.error_estimate >= 0
    assert res.evaluations > 0


def _spectral_batch(r, l, m, n, mesh):
    def F(phi, theta, item):
        omc = one_minus_cos_gamma(mesh.phi[item], mesh.theta[item], phi, theta)
        return green_values(r, omc) * eval_surface_harmonic(l, m, phi, theta)
    return nested_surface_integrals(F, len(mesh), QuadratureConfig(n_gauss_zeta=n))


@pytest.mark.parametrize("l,m", [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 1), (4, 1)])
def test_more_zeta_points_change_less_than_estimate_far_out(ico, l, m):
    # far from the sphere the outer Gauss rule is converged at n = 5, so the
    # 5 -> 20 change is within the (inner) error estimates
    v5, e5, _ = _spectral_batch(100.0, l, m, 5, ico)
    v20, e20, _ = _spectral_batch(100.0, l, m, 20, ico)
    assert np.all(np.abs(v5 - v20) <= np.maximum(e5 + e20, 1e-15))


def test_error_estimate_bound(ico):
    cfg = QuadratureConfig()
    for r in (1.5, 10.0):
        vals, errs, _ = _spectral_batch(r, 2, 1, cfg.n_gauss_zeta, ico)
        bound = np.maximum(cfg.inner_abs_tol, cfg.inner_rel_tol * np.abs(vals)) * cfg.n_gauss_zeta
        assert np.all(errs <= bound)
