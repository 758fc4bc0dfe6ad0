"""Complex surface harmonics, least-squares fitting and exterior extension.

Basis functions are ``P_l^|m|(cos theta) exp(i m phi)`` with the
unnormalised associated Legendre function and no Condon-Shortley phase,
so the ``(1, 1)`` member is exactly ``sin(theta) exp(i phi)``.  Writing
``P_l^m(cos t) = sin(t)**m * Q_lm(cos t)`` with the polynomial
``Q_lm = d^m P_l / dx^m`` lets every derivative, including
``(1/sin t) d/dphi``, be evaluated without dividing by ``sin(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre as npleg


class RankDeficientFit(np.linalg.LinAlgError):
    """The design matrix of a harmonic fit is (numerically) singular."""


MAX_CONDITION = 1e12


@lru_cache(maxsize=None)
def _q_poly(l, m):
    """Coefficients (power basis) of ``d^m P_l / dx^m``."""
    return npleg.leg2poly(npleg.legder(np.eye(l + 1)[l], m)) if m <= l else np.zeros(1)


def _check(l, m):
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid harmonic degree/order (l={l}, m={m})")


def _q(l, m, x):
    return np.polynomial.polynomial.polyval(x, _q_poly(l, abs(m)))


def _dq(l, m, x):
    c = _q_poly(l, abs(m))
    return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(c)) if len(c) > 1 else np.zeros_like(x)


def eval_surface_harmonic(l, m, phi, theta):
    _check(l, m)
    phi, theta = np.asarray(phi, float), np.asarray(theta, float)
    am = abs(m)
    return np.sin(theta) ** am * _q(l, m, np.cos(theta)) * np.exp(1j * m * phi)


def eval_dtheta(l, m, phi, theta):
    """Exact ``d/dtheta`` of :func:`eval_surface_harmonic`."""
    _check(l, m)
    phi, theta = np.asarray(phi, float), np.asarray(theta, float)
    am = abs(m)
    s, c = np.sin(theta), np.cos(theta)
    q, dq = _q(l, m, c), _dq(l, m, c)
    lead = am * s ** (am - 1) * c * q if am > 0 else 0.0
    return (lead - s ** (am + 1) * dq) * np.exp(1j * m * phi)


def eval_dphi(l, m, phi, theta):
    return 1j * m * eval_surface_harmonic(l, m, phi, theta)


def eval_dphi_over_sin(l, m, phi, theta):
    """``(1/sin theta) d/dphi`` of the basis function, finite at the poles."""
    _check(l, m)
    phi, theta = np.asarray(phi, float), np.asarray(theta, float)
    if m == 0:
        return np.zeros(np.broadcast(phi, theta).shape, dtype=complex)
    am = abs(m)
    return 1j * m * np.sin(theta) ** (am - 1) * _q(l, m, np.cos(theta)) * np.exp(1j * m * phi)


@dataclass(frozen=True)
class HarmonicBasis:
    terms: tuple

    def __post_init__(self):
        terms = tuple((int(l), int(m)) for l, m in self.terms)
        for l, m in terms:
            _check(l, m)
        if len(set(terms)) != len(terms):
            raise ValueError("duplicate (l, m) terms in basis")
        object.__setattr__(self, "terms", terms)

    def __len__(self):
        return len(self.terms)

    @classmethod
    def up_to(cls, lmax: int, lmin: int = 1) -> "HarmonicBasis":
        return cls(tuple((l, m) for l in range(lmin, lmax + 1) for m in range(-l, l + 1)))

    @property
    def degrees(self) -> np.ndarray:
        return np.array([l for l, _ in self.terms])

    def _stack(self, fn, phi, theta):
        return np.stack([fn(l, m, phi, theta) for l, m in self.terms], axis=-1)

    def values(self, phi, theta):
        """Basis values with the term index on the last axis."""
        return self._stack(eval_surface_harmonic, phi, theta)

    def dtheta(self, phi, theta):
        return self._stack(eval_dtheta, phi, theta)

    def dphi(self, phi, theta):
        return self._stack(eval_dphi, phi, theta)

    def dphi_over_sin(self, phi, theta):
        return self._stack(eval_dphi_over_sin, phi, theta)


#: The eight ``l = 1, 2`` harmonics used to represent each perturbation term.
DEFAULT_BASIS = HarmonicBasis.up_to(2)


@dataclass(frozen=True)
class HarmonicExpansion:
    basis: HarmonicBasis
    coeffs: np.ndarray
    residual_norm: float = 0.0
    condition: float = 1.0

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).copy()
        if coeffs.shape != (len(self.basis),):
            raise ValueError("one coefficient per basis term is required")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, basis: HarmonicBasis = DEFAULT_BASIS) -> "HarmonicExpansion":
        return cls(basis, np.zeros(len(basis)))

    @classmethod
    def single(cls, l, m, basis=None, coeff=1.0) -> "HarmonicExpansion":
        basis = basis or HarmonicBasis(((l, m),))
        c = np.zeros(len(basis), complex)
        c[basis.terms.index((l, m))] = coeff
        return cls(basis, c)

    def __call__(self, phi, theta):
        return self.basis.values(phi, theta) @ self.coeffs

    def dtheta(self, phi, theta):
        return self.basis.dtheta(phi, theta) @ self.coeffs

    def dphi(self, phi, theta):
        return self.basis.dphi(phi, theta) @ self.coeffs

    def dphi_over_sin(self, phi, theta):
        return self.basis.dphi_over_sin(phi, theta) @ self.coeffs

    def exterior(self, r, phi, theta):
        """Harmonic extension: each degree-``l`` term decays as ``r**-(l+1)``."""
        r = np.asarray(r, float)[..., None]
        decay = r ** -(self.basis.degrees + 1.0)
        return (self.basis.values(phi, theta) * decay) @ self.coeffs

    def grad_exterior(self, r, phi, theta):
        """Gradient of :meth:`exterior` as ``(..., 3)`` components along (r, theta, phi)."""
        r = np.asarray(r, float)[..., None]
        deg = self.basis.degrees
        decay = r ** -(deg + 2.0)
        g_r = (self.basis.values(phi, theta) * (-(deg + 1.0) * decay)) @ self.coeffs
        g_t = (self.basis.dtheta(phi, theta) * decay) @ self.coeffs
        g_p = (self.basis.dphi_over_sin(phi, theta) * decay) @ self.coeffs
        return np.stack([g_r, g_t, g_p], axis=-1)


def design_matrix(phi, theta, basis: HarmonicBasis = DEFAULT_BASIS) -> np.ndarray:
    return basis.values(np.asarray(phi, float), np.asarray(theta, float))


def fit_least_squares(phi, theta, samples,
                      basis: HarmonicBasis = DEFAULT_BASIS) -> HarmonicExpansion:
    """Least-squares coefficients of ``basis`` matching ``samples`` at the nodes.

    Solved by a column-pivoted orthogonal factorisation (LAPACK ``gelsy``).
    Raises :class:`RankDeficientFit` when there are fewer nodes than terms
    or the design matrix has condition number above ``1e12``.
    """
    samples = np.asarray(samples, dtype=complex)
    a = design_matrix(phi, theta, basis)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(samples))):
        raise ValueError("harmonic fit needs finite node coordinates and samples")
    if a.shape[0] < a.shape[1]:
        raise RankDeficientFit(
            f"{a.shape[0]} nodes cannot determine {a.shape[1]} harmonic coefficients")
    cond = np.linalg.cond(a)
    if not cond <= MAX_CONDITION:
        raise RankDeficientFit(
            f"harmonic design matrix is rank deficient (condition number {cond:.3g})")
    coeffs, *_ = scipy.linalg.lstsq(a, samples, lapack_driver="gelsy")
    residual = float(np.linalg.norm(a @ coeffs - samples))
    return HarmonicExpansion(basis, coeffs, residual, float(cond))


def fit_nodes(nodes, samples, basis: HarmonicBasis = DEFAULT_BASIS) -> HarmonicExpansion:
    """:func:`fit_least_squares` taking a sequence of ``SphericalPoint``."""
    phi = np.array([n.phi for n in nodes])
    theta = np.array([n.theta for n in nodes])
    return fit_least_squares(phi, theta, samples, basis)


def eval_expansion_exterior(exp: HarmonicExpansion, p) -> complex:
    return complex(exp.exterior(p.r, p.phi, p.theta))


def grad_expansion_exterior(exp: HarmonicExpansion, p) -> np.ndarray:
    return exp.grad_exterior(p.r, p.phi, p.theta)
