"""Quadrature engines for integrals over the unit sphere.

The production rule is a nested one: after the substitution
``zeta = cos(theta')`` the surface integral becomes

    int_{-1}^{1} I1(zeta) dzeta,   I1(zeta) = int_0^{2 pi} F(phi', arccos zeta) dphi'

where the outer integral uses a fixed Gauss-Legendre rule (5 points by
default) and the inner one adaptive Gauss-Kronrod 7/15.  Because the Gauss
nodes are irrational, the source points never land on mesh vertices, so
the kernel's surface singularity is never sampled.  The price is that
``I1`` has a logarithmic singularity at the field point's co-latitude,
which the fixed outer rule only resolves to a few per cent on ``r = 1``.

:func:`surface_integral_2d_rotated` is the accurate alternative: it works
in polar coordinates centred on the field point, where the area element
cancels the kernel's ``1/s`` singularity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sphere_geom import SphericalPoint, cart_to_sph_array

TWO_PI = 2.0 * math.pi


class ToleranceNotMet(ArithmeticError):
    """Adaptive refinement exhausted its budget before reaching tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureConfig:
    n_gauss_zeta: int = 5
    inner_abs_tol: float = 1e-10
    inner_rel_tol: float = 1e-8
    max_subdivisions: int = 50

    def __post_init__(self):
        if self.n_gauss_zeta < 2:
            raise ValueError("n_gauss_zeta must be at least 2")
        if not (self.inner_abs_tol > 0 and self.inner_rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error_estimate: float
    evaluations: int


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    k = np.arange(1, n + 1)
    # Chebyshev-type initial guesses, descending order
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # one more evaluation at the converged nodes for the weights
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if n % 2:
        x[n // 2] = 0.0
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int):
    """Nodes (ascending) and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    n = int(n)
    if not 2 <= n <= 64:
        raise ValueError(f"Gauss-Legendre order must be within 2..64, got {n}")
    return _gauss_legendre(n)


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G7_FULL = np.zeros(15)
_G7_FULL[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])
G7_WEIGHTS = _G7_FULL


def _adaptive_gk(func, a, b, n_tasks, abs_tol, rel_tol, max_depth):
    """Globally adaptive GK 7/15 on ``n_tasks`` independent integrals.

    ``func(x, task)`` receives an ``(K, 15)`` array of abscissae and the
    ``(K,)`` task index of each row and returns the ``(K, 15)`` integrand
    values.  All leaves of all tasks are evaluated in one call per round.
    Returns ``(values, errors, evaluations, failed_mask)``.
    """
    half0 = 0.5 * (b - a)

    def panel(lo, hi, task):
        c = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        x = c[:, None] + h[:, None] * GK_NODES[None, :]
        f = np.asarray(func(x, task), dtype=complex)
        k = h * (f @ GK_WEIGHTS)
        g = h * (f @ G7_WEIGHTS)
        return k, np.abs(k - g)

    task = np.arange(n_tasks)
    lo = np.full(n_tasks, float(a))
    hi = np.full(n_tasks, float(b))
    depth = np.zeros(n_tasks, dtype=int)
    val, err = panel(lo, hi, task)
    evaluations = 15 * n_tasks
    failed = np.zeros(n_tasks, dtype=bool)
    if half0 == 0.0:
        return np.zeros(n_tasks, complex), np.zeros(n_tasks), evaluations, failed

    while True:
        tot = (np.bincount(task, val.real, n_tasks)
               + 1j * np.bincount(task, val.imag, n_tasks))
        tot_err = np.bincount(task, err, n_tasks)
        count = np.bincount(task, minlength=n_tasks)
        tol = np.maximum(abs_tol, rel_tol * np.abs(tot))
        open_task = (tot_err > tol) & ~failed
        if not np.any(open_task):
            return tot, tot_err, evaluations, failed
        split = open_task[task] & (err > (tol / count)[task])
        too_deep = split & (depth >= max_depth)
        if np.any(too_deep):
            failed[np.unique(task[too_deep])] = True
            split &= ~failed[task]
            if not np.any(split):
                continue
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_task = np.concatenate([task[split], task[split]])
        new_depth = np.concatenate([depth[split], depth[split]]) + 1
        new_val, new_err = panel(new_lo, new_hi, new_task)
        evaluations += 15 * len(new_lo)
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        task = np.concatenate([task[keep], new_task])
        depth = np.concatenate([depth[keep], new_depth])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])


def adaptive_integrate_1d(f, a: float, b: float,
                          cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """Adaptive Gauss-Kronrod 7/15 integral of a vectorised function ``f`` on ``[a, b]``.

    Real and imaginary parts share one subdivision tree; the error
    estimate is the sum of ``|K15 - G7|`` over the leaves.
    """
    vals, errs, nev, failed = _adaptive_gk(
        lambda x, task: f(x), a, b, 1,
        cfg.inner_abs_tol, cfg.inner_rel_tol, cfg.max_subdivisions)
    result = IntegralResult(complex(vals[0]), float(errs[0]), nev)
    if failed[0]:
        raise ToleranceNotMet(
            f"adaptive quadrature on [{a}, {b}] did not reach tolerance within "
            f"{cfg.max_subdivisions} bisection levels (error estimate {errs[0]:.3g})", result)
    return result


def nested_surface_integrals(F, n_items: int, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Nested-rule surface integrals of ``n_items`` integrands at once.

    ``F(phi, theta, item)`` is called with equally shaped arrays.  Returns
    ``(values, error_estimates, evaluations)`` where the first two have
    length ``n_items``.
    """
    zeta, w = gauss_legendre(cfg.n_gauss_zeta)
    theta_nodes = np.arccos(zeta)
    n_z = len(zeta)

    def func(x, task):
        item = task // n_z
        th = np.broadcast_to(theta_nodes[task % n_z][:, None], x.shape)
        return F(x, th, np.broadcast_to(item[:, None], x.shape))

    vals, errs, nev, failed = _adaptive_gk(
        func, 0.0, TWO_PI, n_items * n_z,
        cfg.inner_abs_tol, cfg.inner_rel_tol, cfg.max_subdivisions)
    vals = vals.reshape(n_items, n_z) @ w
    errs = errs.reshape(n_items, n_z) @ w
    if np.any(failed):
        bad = sorted({int(t) // n_z for t in np.flatnonzero(failed)})
        raise ToleranceNotMet(
            f"inner phi' quadrature did not converge for integrand(s) {bad} within "
            f"{cfg.max_subdivisions} bisection levels",
            (vals, errs, nev))
    return vals, errs, nev


def surface_integral_nested(F, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IntegralResult:
    """``iint_S F dS`` over the unit sphere by the nested Gauss/adaptive rule.

    ``F(phi', theta')`` must accept arrays.  The result is the plain
    surface integral; no ``1/(4 pi)`` factor is applied.
    """
    vals, errs, nev = nested_surface_integrals(lambda p, t, item: F(p, t), 1, cfg)
    return IntegralResult(complex(vals[0]), float(errs[0]), nev)


def rotation_to(p: SphericalPoint) -> np.ndarray:
    """Rotation matrix taking +z onto the direction of ``p``."""
    ct, st = math.cos(p.theta), math.sin(p.theta)
    cp, sp = math.cos(p.phi), math.sin(p.phi)
    ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry


def surface_integral_2d_rotated(F, p: SphericalPoint,
                                cfg: QuadratureConfig = DEFAULT_CONFIG,
                                max_psi_nodes: int = 4096) -> IntegralResult:
    """``iint_S F dS`` in polar coordinates ``(gamma, psi)`` about ``p``.

    The frame is rotated so that its pole points at ``p``; the polar
    angle ``gamma`` is integrated adaptively (GK 7/15) and the azimuth by
    the periodic trapezoid rule, doubled until it settles.  Source points
    never coincide with ``p`` because Kronrod abscissae are interior.
    """
    rot = rotation_to(p)
    psi_tol_abs = 0.01 * cfg.inner_abs_tol
    psi_tol_rel = 0.01 * cfg.inner_rel_tol
    counter = [0]

    def ring_integral(gamma):
        g = gamma.ravel()
        n = 16
        prev = None
        while True:
            psi = (np.arange(n) + 0.5) * (TWO_PI / n)
            sg, cg = np.sin(g)[:, None], np.cos(g)[:, None]
            local = np.stack([sg * np.cos(psi), sg * np.sin(psi),
                              np.broadcast_to(cg, (len(g), n))], axis=-1)
            _, phi_q, theta_q = cart_to_sph_array(local @ rot.T)
            vals = np.asarray(F(phi_q, theta_q), dtype=complex)
            counter[0] += vals.size
            cur = vals.mean(axis=1) * TWO_PI
            # relative to the ring's |F| mass so cancelling rings can settle
            scale = np.abs(vals).mean(axis=1) * TWO_PI
            if prev is not None:
                diff = np.abs(cur - prev)
                if np.all(diff <= np.maximum(psi_tol_abs, psi_tol_rel * scale)):
                    return cur.reshape(gamma.shape)
            if 2 * n > max_psi_nodes:
                raise ToleranceNotMet(
                    f"azimuthal trapezoid rule did not settle with {n} nodes")
            prev = cur
            n *= 2

    def func(gamma, task):
        return ring_integral(gamma) * np.sin(gamma)

    vals, errs, _, failed = _adaptive_gk(
        func, 0.0, math.pi, 1, cfg.inner_abs_tol, cfg.inner_rel_tol, cfg.max_subdivisions)
    result = IntegralResult(complex(vals[0]), float(errs[0]), counter[0])
    if failed[0]:
        raise ToleranceNotMet("polar-angle quadrature did not reach tolerance", result)
    return result
