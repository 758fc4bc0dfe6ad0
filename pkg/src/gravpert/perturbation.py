"""Order-by-order perturbation solver around the monopole.

With ``v = 1/r + eps u1 + eps^2 u2 + ...`` and surface data
``|grad v|^2 = 1 + eps h`` on ``r = 1``, each ``u_k`` solves an exterior
Neumann problem ``du_k/dn = B_k`` (``n`` pointing into the sphere):

    B1 = h / 2
    Bm = -1/2 * sum_{j+k=m} (grad u_j . grad u_k)_S     (m >= 2)

On the surface the radial part of ``grad u_k`` is ``-B_k``; the
tangential parts come from a harmonic least-squares fit of the computed
``u_k`` values at the mesh nodes.  Products are bilinear (no complex
conjugation).  Each ``u_k`` is obtained from the Green's-function integral
``u_k(P) = (1/4 pi) iint_S G(P, Q) B_k(Q) dS_Q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .green_kernel import DEFAULT_POLICY, SingularityPolicy, green_values
from .harmonics import DEFAULT_BASIS, HarmonicBasis, HarmonicExpansion, fit_least_squares
from .quadrature import (DEFAULT_CONFIG, QuadratureConfig, nested_surface_integrals,
                         surface_integral_2d_rotated)
from .sphere_geom import SphericalPoint, SurfaceMesh, one_minus_cos_gamma

MAX_ORDER = 6
FD_STEP = 1e-6
POLE_EPS = 1e-7


class CascadeError(RuntimeError):
    """A numerical failure inside the cascade, tagged with the failing stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class BoundaryData:
    """A complex function of ``(phi, theta)`` on the unit sphere."""

    func: Callable
    label: str = "Bn"

    def __call__(self, phi, theta):
        phi, theta = np.asarray(phi, float), np.asarray(theta, float)
        out = np.asarray(self.func(phi, theta), dtype=complex)
        return np.broadcast_to(out, np.broadcast(phi, theta).shape)


def zero_data(label="h") -> BoundaryData:
    return BoundaryData(lambda phi, theta: np.zeros(np.broadcast(phi, theta).shape, complex), label)


def b1_from_h(h: BoundaryData) -> BoundaryData:
    return BoundaryData(lambda phi, theta: 0.5 * h(phi, theta), "B1")


def b2_from_fit(h: BoundaryData, exp1: HarmonicExpansion) -> BoundaryData:
    def b2(phi, theta):
        hv = h(phi, theta)
        dt = exp1.dtheta(phi, theta)
        dp = exp1.dphi_over_sin(phi, theta)
        return -0.125 * hv * hv - 0.5 * dt * dt - 0.5 * dp * dp

    return BoundaryData(b2, "B2")


def b3_from_fit(h: BoundaryData, b2: BoundaryData,
                exp1: HarmonicExpansion, exp2: HarmonicExpansion) -> BoundaryData:
    def b3(phi, theta):
        return (-0.5 * h(phi, theta) * b2(phi, theta)
                - exp1.dtheta(phi, theta) * exp2.dtheta(phi, theta)
                - exp1.dphi_over_sin(phi, theta) * exp2.dphi_over_sin(phi, theta))

    return BoundaryData(b3, "B3")


def surface_gradient(bk: BoundaryData, expk: HarmonicExpansion, phi, theta):
    """``grad u_k`` on ``r = 1`` as (r, theta, phi) components."""
    return np.stack([-bk(phi, theta), expk.dtheta(phi, theta), expk.dphi_over_sin(phi, theta)],
                    axis=-1)


def bn_general(h: BoundaryData, b_list, exp_list, m: int) -> BoundaryData:
    """Neumann data of order ``m`` from the lower-order data and fits.

    ``b_list[k-1]`` and ``exp_list[k-1]`` hold ``B_k`` and the fit of
    ``u_k``.  The sum runs over ordered pairs ``(j, k)``, so the diagonal
    term ``j = k = m/2`` enters once with weight 1/2.
    """
    if m < 2:
        raise ValueError("bn_general needs m >= 2; use b1_from_h for m = 1")
    b_list = list(b_list) if b_list else [b1_from_h(h)]
    if len(b_list) < m - 1 or len(exp_list) < m - 1:
        raise ValueError(f"order {m} needs boundary data and fits for orders 1..{m - 1}")

    def bm(phi, theta):
        grads = [surface_gradient(b_list[k], exp_list[k], phi, theta) for k in range(m - 1)]
        total = 0.0
        for j in range(1, m):
            total = total + np.sum(grads[j - 1] * grads[m - j - 1], axis=-1)
        return -0.5 * total

    return BoundaryData(bm, f"B{m}")


def solve_uk(r, phi, theta, bk: BoundaryData, cfg: QuadratureConfig = DEFAULT_CONFIG,
             policy: SingularityPolicy = DEFAULT_POLICY, method: str = "nested") -> np.ndarray:
    """``(1/4 pi) iint_S G(P, Q) B_k(Q) dS_Q`` at each field point ``P``.

    ``method="nested"`` is the fixed-Gauss-in-zeta / adaptive-in-phi' rule
    (all points batched together).  ``method="rotated"`` integrates in
    polar coordinates about each ``P``; it is slower but resolves the
    kernel's surface singularity, so it stays accurate on ``r = 1``.
    """
    r, phi, theta = (np.atleast_1d(np.asarray(a, float)) for a in (r, phi, theta))
    r, phi, theta = np.broadcast_arrays(r, phi, theta)
    if np.any(r < 1.0 - 1e-12):
        raise ValueError("field points must satisfy r >= 1")

    if method == "nested":
        def integrand(phi_q, theta_q, item):
            omc = one_minus_cos_gamma(phi[item], theta[item], phi_q, theta_q)
            return green_values(r[item], omc, policy) * bk(phi_q, theta_q)

        vals, _, _ = nested_surface_integrals(integrand, r.size, cfg)
    elif method == "rotated":
        vals = np.empty(r.size, dtype=complex)
        for i in range(r.size):
            def integrand(phi_q, theta_q, i=i):
                omc = one_minus_cos_gamma(phi[i], theta[i], phi_q, theta_q)
                return green_values(r[i], omc, policy) * bk(phi_q, theta_q)

            vals[i] = surface_integral_2d_rotated(
                integrand, SphericalPoint(r[i], phi[i], theta[i]), cfg).value
    else:
        raise ValueError(f"unknown integration method {method!r}")
    return vals / (4.0 * math.pi)


def solve_uk_at(p: SphericalPoint, bk: BoundaryData, cfg: QuadratureConfig = DEFAULT_CONFIG,
                policy: SingularityPolicy = DEFAULT_POLICY, method: str = "nested") -> complex:
    return complex(solve_uk(p.r, p.phi, p.theta, bk, cfg, policy, method)[0])


@dataclass(frozen=True)
class PerturbationSolution:
    """Values of ``u_k`` and ``v_k`` at the mesh nodes for ``k = 1..order``.

    ``u_values[k-1]`` and ``v_values[k-1]`` are arrays over the nodes;
    ``expansions[k-1]`` is the fit of ``u_k`` on the unit sphere.
    """

    epsilon: float
    mesh: SurfaceMesh
    u_values: np.ndarray
    v_values: np.ndarray
    expansions: tuple
    boundary_data: tuple
    surface_u_values: np.ndarray
    quadrature: QuadratureConfig = DEFAULT_CONFIG
    method: str = "nested"
    metadata: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.expansions)

    def v(self, k: Optional[int] = None) -> np.ndarray:
        return self.v_values[(k or self.order) - 1]


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        raise CascadeError(name, exc) from exc


def run_cascade(h: BoundaryData, mesh: SurfaceMesh, epsilon: float, order: int = 3,
                cfg: QuadratureConfig = DEFAULT_CONFIG,
                basis: HarmonicBasis = DEFAULT_BASIS,
                policy: SingularityPolicy = DEFAULT_POLICY,
                method: str = "nested") -> PerturbationSolution:
    """Run the cascade ``B1 -> u1 -> fit -> B2 -> ... -> u_order``.

    ``u_k`` is first computed at the mesh's angular nodes on the unit
    sphere, where the fit that feeds ``B_{k+1}`` is made; if the mesh
    radius exceeds 1 the same integrals are then evaluated at the mesh
    nodes themselves.  The last order is fitted too, so that gradients
    can use the full expansion.  ``method`` selects the surface rule
    (see :func:`solve_uk`).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be within 1..{MAX_ORDER}")
    phi, theta = mesh.phi, mesh.theta
    ones = np.ones_like(phi)
    on_unit = abs(mesh.radius - 1.0) <= 1e-12

    b_list, exps, u_surf, u_eval = [], [], [], []
    for k in range(1, order + 1):
        if k == 1:
            bk = b1_from_h(h)
        elif k == 2:
            bk = b2_from_fit(h, exps[0])
        elif k == 3:
            bk = b3_from_fit(h, b_list[1], exps[0], exps[1])
        else:
            bk = bn_general(h, b_list, exps, k)
        b_list.append(bk)
        us = _stage(f"u{k} quadrature on the unit sphere", solve_uk, ones, phi, theta, bk, cfg, policy, method)
        u_surf.append(us)
        exps.append(_stage(f"u{k} harmonic fit", fit_least_squares, phi, theta, us, basis))
        if on_unit:
            u_eval.append(us)
        else:
            u_eval.append(_stage(f"u{k} quadrature at r={mesh.radius:g}", solve_uk,
                                 mesh.r, phi, theta, bk, cfg, policy, method))

    u_values = np.array(u_eval)
    v_values = np.empty_like(u_values)
    v = 1.0 / mesh.r + 0j
    for k in range(order):
        v = v + epsilon ** (k + 1) * u_values[k]
        v_values[k] = v

    metadata = {
        "fit_residuals": [e.residual_norm for e in exps],
        "fit_conditions": [e.condition for e in exps],
        "last_order_fitted": True,
        "diagonal_convention": "ordered pairs: diagonal grad u_k . grad u_k counted once with weight 1/2",
        "basis_terms": list(basis.terms),
        "method": method,
    }
    return PerturbationSolution(epsilon, mesh, u_values, v_values, tuple(exps), tuple(b_list),
                                np.array(u_surf), cfg, method, metadata)


def evaluate_v(solution: PerturbationSolution, r, phi, theta,
               policy: SingularityPolicy = DEFAULT_POLICY) -> np.ndarray:
    """``v_1 .. v_order`` at arbitrary exterior points via the Green integrals.

    Returns an array of shape ``(order, npoints)``.
    """
    r, phi, theta = np.broadcast_arrays(*(np.atleast_1d(np.asarray(a, float)) for a in (r, phi, theta)))
    eps = solution.epsilon
    v = 1.0 / r + 0j
    out = []
    for k, bk in enumerate(solution.boundary_data, start=1):
        v = v + eps ** k * solve_uk(r, phi, theta, bk, solution.quadrature, policy,
                                        solution.method)
        out.append(v)
    return np.array(out)


def potential_expansion(solution: PerturbationSolution, r, phi, theta, order=None):
    """``1/r + sum eps^k u_k`` with each ``u_k`` replaced by its fitted expansion."""
    order = order or solution.order
    v = 1.0 / np.asarray(r, float) + 0j
    for k in range(order):
        v = v + solution.epsilon ** (k + 1) * solution.expansions[k].exterior(r, phi, theta)
    return v


def gradient_v(solution: PerturbationSolution, p: SphericalPoint,
               method: str = "expansion", order: Optional[int] = None) -> np.ndarray:
    """``grad v_order`` at ``p`` as complex (r, theta, phi) components.

    ``expansion`` differentiates the fitted exterior expansions
    analytically; ``finite_difference`` central-differences the same
    potential with steps ``1e-6 r`` and ``1e-6`` rad (not at the poles).
    """
    order = order or solution.order
    r, phi, theta = p.r, p.phi, p.theta
    if method == "expansion":
        g = np.array([-1.0 / r ** 2, 0.0, 0.0], dtype=complex)
        for k in range(order):
            g = g + solution.epsilon ** (k + 1) * solution.expansions[k].grad_exterior(r, phi, theta)
        return g
    if method == "finite_difference":
        st = math.sin(theta)
        if st < POLE_EPS:
            raise ValueError("finite-difference gradient is undefined at the poles")
        f = lambda rr, pp, tt: complex(potential_expansion(solution, rr, pp, tt, order))
        dr = FD_STEP * r
        d = FD_STEP
        return np.array([
            (f(r + dr, phi, theta) - f(r - dr, phi, theta)) / (2 * dr),
            (f(r, phi, theta + d) - f(r, phi, theta - d)) / (2 * d * r),
            (f(r, phi + d, theta) - f(r, phi - d, theta)) / (2 * d * r * st),
        ])
    raise ValueError(f"unknown gradient method {method!r}")
