"""Acceptance criteria, one test per criterion.

Each test logs a ``criterion N [PASS|FAIL] ...`` line; the lines are
repeated in a summary section at the end of the pytest run.
"""
import math
import time

import numpy as np
import pytest

from gravpert import ExactModel, QuadratureConfig, icosahedron_nodes, run_cascade
from gravpert.green_kernel import green_values
from gravpert.harmonics import DEFAULT_BASIS, HarmonicExpansion, eval_surface_harmonic, fit_least_squares
from gravpert.perturbation import (BoundaryData, b3_from_fit, bn_general, gradient_v, solve_uk,
                                   zero_data)
from gravpert.quadrature import gauss_legendre, surface_integral_2d_rotated, surface_integral_nested
from gravpert.sphere_geom import cart_to_sph_array, one_minus_cos_gamma, sph_to_cart_array

pytestmark = pytest.mark.acceptance

SPECTRAL_TERMS = [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (4, 1)]
PAPER_P5 = 0.5224e-5


def ico_errors(model, radius=1.0, **kw):
    mesh = icosahedron_nodes(radius)
    sol = run_cascade(model.boundary_data(), mesh, model.epsilon, **kw)
    return np.abs(model.v(mesh.r, mesh.phi, mesh.theta) - sol.v()), sol


def test_spectral_identity(record):
    mesh = icosahedron_nodes()
    start = time.perf_counter()
    worst_rot = worst_nested = 0.0
    cases = 0
    for l, m in SPECTRAL_TERMS:
        y = lambda p, t, l=l, m=m: eval_surface_harmonic(l, m, p, t)
        for r in (1.0, 1.5, 10.0):
            exact = y(mesh.phi, mesh.theta) / ((l + 1) * r ** (l + 1))
            for i, node in enumerate(mesh.nodes):
                p = node.with_radius(r)

                def F(phi, theta, p=p):
                    omc = one_minus_cos_gamma(p.phi, p.theta, phi, theta)
                    return green_values(p.r, omc) * y(phi, theta)

                got = surface_integral_2d_rotated(F, p).value / (4 * math.pi)
                worst_rot = max(worst_rot, abs(got - exact[i]))
                cases += 1
            # the nested rule is only usable off the surface
            if r > 1.0:
                n = 20 if (l == 4 or r < 2) else 5
                got = solve_uk(np.full(12, r), mesh.phi, mesh.theta, BoundaryData(y),
                               QuadratureConfig(n_gauss_zeta=n))
                worst_nested = max(worst_nested, float(np.max(np.abs(got - exact))))
    elapsed = time.perf_counter() - start
    ok = worst_rot <= 1e-6 and worst_nested <= 1e-6 and elapsed < 60
    record(1, "spectral identity", ok,
           f"{cases} rotated cases worst {worst_rot:.2e}; nested (r=1.5, 10) worst "
           f"{worst_nested:.2e}; {elapsed:.1f}s")


def test_icosahedron_error_band(record):
    err, _ = ico_errors(ExactModel("degree1", 1e-4))
    ok = (1e-6 <= err.max() <= 2e-5 and err[0] <= 1e-10 and err[11] <= 1e-10
          and PAPER_P5 / 3 <= err[4] <= PAPER_P5 * 3)
    record(2, "icosahedron error band", ok,
           f"max {err.max():.4e}, P1 {err[0]:.1e}, P12 {err[11]:.1e}, P5 {err[4]:.5e}")


def test_radius_error_trend(record):
    model = ExactModel("degree1", 1e-4)
    p5 = [ico_errors(model, r)[0][4] for r in (1.0, 10.0, 100.0)]
    ok = p5[1] <= 1e-10 and p5[2] <= 1e-13 and p5[0] > p5[1] > p5[2]
    record(3, "error decay with radius", ok, "P5 at r=1,10,100: " + ", ".join(f"{e:.3e}" for e in p5))


def test_epsilon_scaling(record):
    big = ico_errors(ExactModel("degree1", 1e-2))[0].max()
    small = ico_errors(ExactModel("degree1", 1e-4))[0].max()
    record(4, "epsilon scaling", big / small >= 10,
           f"max error {big:.3e} (eps=1e-2) vs {small:.3e} (eps=1e-4), ratio {big / small:.1f}")


def test_degree4_error_band(record):
    model = ExactModel("degree4", 1e-4)
    at1 = ico_errors(model, 1.0)[0].max()
    at15 = ico_errors(model, 1.5)[0].max()
    ok = 5e-6 <= at1 <= 1e-3 and at15 < at1
    record(5, "degree-4 error band", ok, f"max error {at1:.3e} at r=1, {at15:.3e} at r=1.5")


def test_field_direction(record):
    _, sol = ico_errors(ExactModel("degree1", 1e-4))
    worst_cos = 1.0
    for node in sol.mesh.nodes:
        g = gradient_v(sol, node).real
        worst_cos = min(worst_cos, -g[0] / np.linalg.norm(g))
    worst_mono = 0.0
    for radius in (1.0, 1.5):
        mono = run_cascade(zero_data(), icosahedron_nodes(radius), 1e-4)
        for node in mono.mesh.nodes:
            g = gradient_v(mono, node)
            worst_mono = max(worst_mono, np.max(np.abs(g - [-1 / radius ** 2, 0, 0])))
    ok = worst_cos >= 0.999 and worst_mono <= 1e-12
    record(6, "field direction", ok,
           f"min cos to -r_hat {worst_cos:.6f}; h=0 deviation from -r_hat/r^2 {worst_mono:.1e}")


def _oracle_grad(radial, coeffs, phi, theta):
    s, c = np.sin(theta), np.cos(theta)
    e = lambda m: np.exp(1j * m * phi)
    d_t = [c * e(-1), -s + 0j, c * e(1), 6 * s * c * e(-2), 3 * (c * c - s * s) * e(-1),
           -3 * c * s + 0j, 3 * (c * c - s * s) * e(1), 6 * s * c * e(2)]
    d_p = [-1j * e(-1), 0j * s, 1j * e(1), -6j * s * e(-2), -3j * c * e(-1), 0j * s,
           3j * c * e(1), 6j * s * e(2)]
    return (radial, sum(a * t for a, t in zip(coeffs, d_t)), sum(a * t for a, t in zip(coeffs, d_p)))


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def test_oracle_suites(record):
    rng = np.random.default_rng(7)
    mesh = icosahedron_nodes()
    checks = {}

    # dual-path B3 and B4
    h = BoundaryData(lambda p, t: np.cos(t) + 2j * np.sin(t) * np.exp(1j * p))
    e1, e2, e3 = (HarmonicExpansion(DEFAULT_BASIS, rng.normal(size=8) + 1j * rng.normal(size=8))
                  for _ in range(3))
    b1 = BoundaryData(lambda p, t: 0.5 * h(p, t))
    b2 = bn_general(h, [b1], [e1], 2)
    b3 = b3_from_fit(h, b2, e1, e2)
    b4 = bn_general(h, [b1, b2, b3], [e1, e2, e3], 4)
    phi, theta = rng.uniform(0, 6.28, 20), rng.uniform(0.05, 3.09, 20)
    g1, g2, g3 = (_oracle_grad(-b(phi, theta), e.coeffs, phi, theta)
                  for b, e in ((b1, e1), (b2, e2), (b3, e3)))
    checks["dual-path B3/B4"] = (max(np.abs(b3(phi, theta) + _dot(g1, g2)).max(),
                                     np.abs(b4(phi, theta) + 0.5 * (2 * _dot(g1, g3) + _dot(g2, g2))).max()),
                                 1e-12)

    # fit recovery
    c = rng.normal(size=8) + 1j * rng.normal(size=8)
    fit = fit_least_squares(mesh.phi, mesh.theta, HarmonicExpansion(DEFAULT_BASIS, c)(mesh.phi, mesh.theta))
    checks["fit recovery"] = (np.abs(fit.coeffs - c).max(), 1e-10)

    # analytic vs finite-difference gradients
    worst = 0.0
    d = 1e-6
    for kind in ("degree1", "degree4"):
        m = ExactModel(kind, 1e-4)
        for _ in range(20):
            r, p, t = rng.uniform(1, 3), rng.uniform(0, 6.28), rng.uniform(0.1, 3.0)
            fd = [(m.v(r + d, p, t) - m.v(r - d, p, t)) / (2 * d),
                  (m.v(r, p, t + d) - m.v(r, p, t - d)) / (2 * d * r),
                  (m.v(r, p + d, t) - m.v(r, p - d, t)) / (2 * d * r * math.sin(t))]
            worst = max(worst, np.abs(m.grad_v(r, p, t) - fd).max())
    checks["analytic vs FD gradient"] = (worst, 1e-8)

    # defining identity |grad v|^2 = 1 + eps h
    worst = 0.0
    for kind in ("degree1", "degree4"):
        m = ExactModel(kind, 1e-4)
        g = m.grad_v(np.ones(50), phi.repeat(3)[:50], theta.repeat(3)[:50])
        worst = max(worst, np.abs(np.sum(g * g, -1) - 1 - m.epsilon * m.h(phi.repeat(3)[:50],
                                                                            theta.repeat(3)[:50])).max())
    checks["|grad v|^2 identity"] = (worst, 1e-12)

    # Gauss exactness to degree 2n - 1
    worst = 0.0
    for n in (2, 5, 10, 20):
        x, w = gauss_legendre(n)
        for k in range(2 * n):
            exact = 0.0 if k % 2 else 2 / (k + 1)
            worst = max(worst, abs(w @ x ** k - exact) / max(1.0, exact))
    checks["Gauss exactness"] = (worst, 1e-13)

    # rotation invariance of surface integrals
    def F(p, t):
        x, y, z = np.moveaxis(sph_to_cart_array(1.0, p, t), -1, 0)
        return np.exp(x - 0.5 * z) + 1j * y * y * z

    cfg = QuadratureConfig(n_gauss_zeta=20)
    base = surface_integral_nested(F, cfg).value
    worst = 0.0
    for _ in range(4):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))

        def G(p, t, q=q):
            _, p2, t2 = cart_to_sph_array(sph_to_cart_array(1.0, p, t) @ q.T)
            return F(p2, t2)
        worst = max(worst, abs(surface_integral_nested(G, cfg).value - base))
    checks["rotation invariance"] = (worst, 10 * max(cfg.inner_abs_tol, cfg.inner_rel_tol * abs(base)))

    ok = all(v <= tol for v, tol in checks.values())
    record(7, "oracle suites", ok, "; ".join(f"{k} {v:.1e} (<= {tol:.0e})" for k, (v, tol) in checks.items()))
