"""Manufactured exact potentials ``v = 1/r + eps * u`` used for validation.

``degree1``:  u = sin(t) e^{i p} / r**2
``degree4``:  u = -(5/2) sin(t) (7 cos^3 t - 3 cos t) e^{i p} / r**5

Both ``u`` are complex exterior harmonics.  ``h`` is defined on ``r = 1``
by ``grad v . grad v = 1 + eps h`` with the bilinear (unconjugated) dot
product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .perturbation import BoundaryData

KINDS = ("degree1", "degree4")


@dataclass(frozen=True)
class ExactModel:
    kind: str
    epsilon: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown exact model {self.kind!r}; choose from {KINDS}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def u(self, r, phi, theta):
        return u_exact(self.kind, r, phi, theta)

    def grad_u(self, r, phi, theta):
        return grad_u_exact(self.kind, r, phi, theta)

    def v(self, r, phi, theta):
        return 1.0 / np.asarray(r, float) + self.epsilon * self.u(r, phi, theta)

    def grad_v(self, r, phi, theta):
        g = self.epsilon * self.grad_u(r, phi, theta)
        g[..., 0] -= 1.0 / np.asarray(r, float) ** 2
        return g

    def h(self, phi, theta):
        return h_of(self, phi, theta)

    def boundary_data(self) -> BoundaryData:
        return BoundaryData(self.h, "h")


def _b4(theta):
    """``(5/2)(7 cos^3 t - 3 cos t)``, i.e. ``P_4^1(cos t) / sin t``."""
    c = np.cos(theta)
    return 2.5 * (7.0 * c ** 3 - 3.0 * c)


def u_exact(kind, r, phi, theta):
    r, phi, theta = (np.asarray(a, float) for a in (r, phi, theta))
    e = np.exp(1j * phi)
    if kind == "degree1":
        return np.sin(theta) * e / r ** 2
    if kind == "degree4":
        return -np.sin(theta) * _b4(theta) * e / r ** 5
    raise ValueError(f"unknown exact model {kind!r}")


def grad_u_exact(kind, r, phi, theta):
    """Closed-form gradient of ``u`` along (r, theta, phi)."""
    r, phi, theta = np.broadcast_arrays(*(np.asarray(a, float) for a in (r, phi, theta)))
    e = np.exp(1j * phi)
    s, c = np.sin(theta), np.cos(theta)
    if kind == "degree1":
        g = [-2.0 * s * e / r ** 3, c * e / r ** 3, 1j * e / r ** 3]
    elif kind == "degree4":
        # d/dt [sin t (7c^3 - 3c)] = 28c^4 - 27c^2 + 3
        g = [5.0 * s * _b4(theta) * e / r ** 6,
             -2.5 * (28.0 * c ** 4 - 27.0 * c ** 2 + 3.0) * e / r ** 6,
             -1j * _b4(theta) * e / r ** 6]
    else:
        raise ValueError(f"unknown exact model {kind!r}")
    return np.stack(g, axis=-1)


def v_exact(model: ExactModel, p) -> complex:
    return complex(model.v(p.r, p.phi, p.theta))


def grad_v_exact(model: ExactModel, p) -> np.ndarray:
    return model.grad_v(p.r, p.phi, p.theta)


def h_of(model: ExactModel, phi, theta):
    """Closed-form boundary intensity perturbation ``h`` for ``model``."""
    phi, theta = np.asarray(phi, float), np.asarray(theta, float)
    eps = model.epsilon
    s, c = np.sin(theta), np.cos(theta)
    e1 = np.exp(1j * phi)
    if model.kind == "degree1":
        return 4.0 * s * e1 + eps * 3.0 * s ** 2 * e1 ** 2
    t = 7.0 * c ** 3 - 3.0 * c
    e2 = e1 ** 2
    return (-25.0 * e1 * s * t
            + eps * 25.0 / 4.0 * (25.0 * e2 * s ** 2 * t ** 2
                                  + e2 * (3.0 - 27.0 * c ** 2 + 28.0 * c ** 4) ** 2
                                  - e2 * t ** 2))


def _fd_gradient(u, phi, theta, step):
    """Central-difference gradient of ``u(r, phi, theta)`` on ``r = 1``."""
    one = np.ones_like(phi)
    d_r = (u(one + step, phi, theta) - u(one - step, phi, theta)) / (2 * step)
    d_t = (u(one, phi, theta + step) - u(one, phi, theta - step)) / (2 * step)
    d_p = (u(one, phi + step, theta) - u(one, phi - step, theta)) / (2 * step)
    return np.stack([d_r, d_t, d_p / np.sin(theta)], axis=-1)


def h_numeric(u, epsilon: float, grad=None, step: float = 1e-5) -> BoundaryData:
    """Boundary data ``h`` generated from an exterior harmonic ``u``.

    On ``r = 1``, ``|grad(1/r + eps u)|^2 - 1 = eps (-2 du/dr + eps grad u . grad u)``,
    so ``h`` is assembled from ``grad u`` directly, avoiding the
    cancellation of subtracting 1.  ``grad(r, phi, theta)`` gives the
    (r, theta, phi) components analytically; without it a central
    difference with the given step is used.
    """
    def h(phi, theta):
        phi, theta = np.broadcast_arrays(np.asarray(phi, float), np.asarray(theta, float))
        if grad is not None:
            g = grad(np.ones_like(phi), phi, theta)
        else:
            g = _fd_gradient(u, phi, theta, step)
        return -2.0 * g[..., 0] + epsilon * np.sum(g * g, axis=-1)

    return BoundaryData(h, "h")
