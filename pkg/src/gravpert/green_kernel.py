"""Neumann Green's function for the exterior of the unit sphere.

For a field point ``P`` at radius ``r >= 1`` and a source point ``Q`` on
the unit sphere separated by the angle ``gamma``::

    s = sqrt(1 + r**2 - 2 r cos(gamma))
    G = 2/s - ln[(1 + s - r cos(gamma)) / (r - r cos(gamma))]

The logarithm's argument is 0/0 when ``P``, ``Q`` and the origin are
collinear.  Using ``s**2 - (r - 1)**2 = 2 r (1 - cos(gamma))`` it reduces
to ``(s + r + 1) / (s + r - 1)``, which is what :func:`green_values`
evaluates; it is finite for every ``r > 1`` and blows up only at the
surface collision ``r = 1, gamma = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sphere_geom import SphericalPoint, one_minus_cos_gamma

SURFACE_TOL = 1e-12


class SurfaceCollisionError(ArithmeticError):
    """A source point coincides with a field point on the unit sphere."""


@dataclass(frozen=True)
class SingularityPolicy:
    gamma_tol: float = 1e-8
    surface_collision: str = "error"  # or "return_infinite"

    def __post_init__(self):
        if not self.gamma_tol > 0:
            raise ValueError("gamma_tol must be positive")
        if self.surface_collision not in ("error", "return_infinite"):
            raise ValueError(f"unknown surface_collision policy {self.surface_collision!r}")


DEFAULT_POLICY = SingularityPolicy()


@dataclass(frozen=True)
class KernelEval:
    value: float
    gamma: float
    s: float
    regularized: bool


def green_collinear_limit(r: float) -> float:
    """Limit of ``G`` as ``gamma -> 0`` for a field point off the sphere."""
    if not r > 1.0 + 1e-12:
        raise ValueError(f"the collinear limit exists only for r > 1, got r={r}")
    return 2.0 / (r - 1.0) - math.log(r / (r - 1.0))


def _gamma_from_omc(omc):
    return 2.0 * np.arcsin(np.sqrt(np.clip(0.5 * omc, 0.0, 1.0)))


def green_values(r, omc, policy: SingularityPolicy = DEFAULT_POLICY):
    """Vectorised kernel from ``r`` and ``omc = 1 - cos(gamma)``.

    Raises :class:`SurfaceCollisionError` if any pair is a surface
    collision under the ``error`` policy.
    """
    r, omc = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(omc, dtype=float))
    shape = r.shape
    r, omc = r.ravel(), omc.ravel()
    on_surface = np.abs(r - 1.0) <= SURFACE_TOL
    rr = np.where(on_surface, 1.0, r)
    s = np.sqrt((rr - 1.0) ** 2 + 2.0 * rr * omc)

    gamma = _gamma_from_omc(omc)
    collide = on_surface & (gamma <= policy.gamma_tol)
    if np.any(collide) and policy.surface_collision == "error":
        raise SurfaceCollisionError(
            f"{int(np.count_nonzero(collide))} quadrature node(s) coincide with the "
            f"field point on the unit sphere (gamma <= {policy.gamma_tol:g})")
    collinear = ~on_surface & (gamma <= policy.gamma_tol)

    with np.errstate(divide="ignore", invalid="ignore"):
        g = 2.0 / s - np.log((s + rr + 1.0) / (s + rr - 1.0))
        if np.any(collinear):
            rc = rr[collinear]
            g[collinear] = 2.0 / (rc - 1.0) - np.log(rc / (rc - 1.0))
    if np.any(collide):
        g = np.where(collide, np.inf, g)
    return g.reshape(shape)


def green(p: SphericalPoint, q: SphericalPoint,
          policy: SingularityPolicy = DEFAULT_POLICY) -> KernelEval:
    """Evaluate ``G(P, Q)`` for ``P.r >= 1`` and ``Q`` on the unit sphere."""
    if abs(q.r - 1.0) > SURFACE_TOL:
        raise ValueError(f"source point must lie on the unit sphere, got r={q.r}")
    if p.r < 1.0 - SURFACE_TOL:
        raise ValueError(f"field point must satisfy r >= 1, got r={p.r}")
    omc = float(one_minus_cos_gamma(p.phi, p.theta, q.phi, q.theta))
    gamma = float(_gamma_from_omc(omc))
    r = 1.0 if abs(p.r - 1.0) <= SURFACE_TOL else p.r
    s = math.sqrt((r - 1.0) ** 2 + 2.0 * r * omc)
    value = float(green_values(r, omc, policy))
    regularized = r > 1.0 and gamma <= policy.gamma_tol
    return KernelEval(value, gamma, s, regularized)
