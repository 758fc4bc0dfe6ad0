"""Spherical-coordinate geometry and surface meshes.

Conventions: ``theta`` is the co-latitude measured from +z, ``phi`` the
longitude, and ``(x, y, z) = r (sin t cos p, sin t sin p, cos t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class MeshFormatError(ValueError):
    """Raised when a triangle-mesh file cannot be parsed."""


class DegenerateVertexError(ValueError):
    """Raised when a vertex sits at the origin and cannot be projected."""


@dataclass(frozen=True)
class SphericalPoint:
    """A point ``(r, phi, theta)``; ``phi`` is wrapped into ``[0, 2 pi)``."""

    r: float
    phi: float
    theta: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"radius must be positive, got {self.r}")
        if not math.isfinite(self.phi):
            raise ValueError(f"longitude must be finite, got {self.phi}")
        if not -1e-12 <= self.theta <= math.pi + 1e-12:
            raise ValueError(f"co-latitude must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta", min(max(float(self.theta), 0.0), math.pi))
        phi = math.fmod(float(self.phi), TWO_PI)
        if phi < 0.0:
            phi += TWO_PI
        if phi >= TWO_PI:  # fmod of values a hair below 2 pi may round up
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    def with_radius(self, r: float) -> "SphericalPoint":
        return SphericalPoint(r, self.phi, self.theta)


class CartesianVec(NamedTuple):
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def sph_to_cart(p: SphericalPoint) -> CartesianVec:
    st = math.sin(p.theta)
    return CartesianVec(p.r * st * math.cos(p.phi),
                        p.r * st * math.sin(p.phi),
                        p.r * math.cos(p.theta))


def cart_to_sph(v) -> SphericalPoint:
    x, y, z = (float(c) for c in v)
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise ValueError("cannot convert the zero vector to spherical coordinates")
    theta = math.atan2(math.hypot(x, y), z)
    return SphericalPoint(r, math.atan2(y, x), theta)


def sph_to_cart_array(r, phi, theta):
    """Vectorised version of :func:`sph_to_cart`; returns an ``(..., 3)`` array."""
    r, phi, theta = np.broadcast_arrays(r, phi, theta)
    st = np.sin(theta)
    return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)], axis=-1)


def cart_to_sph_array(xyz):
    """Inverse of :func:`sph_to_cart_array`; returns ``(r, phi, theta)`` arrays."""
    xyz = np.asarray(xyz, dtype=float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    theta = np.arctan2(np.hypot(x, y), z)
    phi = np.mod(np.arctan2(y, x), TWO_PI)
    return r, phi, theta


def cos_gamma(p: SphericalPoint, q: SphericalPoint) -> float:
    """Cosine of the angle between the directions of ``p`` and ``q``."""
    c = (math.cos(p.theta) * math.cos(q.theta)
         + math.sin(p.theta) * math.sin(q.theta) * math.cos(p.phi - q.phi))
    return min(1.0, max(-1.0, c))


def one_minus_cos_gamma(phi, theta, phi_q, theta_q):
    """``1 - cos(gamma)`` in a form that keeps full relative precision as
    the two directions approach each other (haversine identity)."""
    return (2.0 * np.sin(0.5 * (theta - theta_q)) ** 2
            + 2.0 * np.sin(theta) * np.sin(theta_q) * np.sin(0.5 * (phi - phi_q)) ** 2)


@dataclass(frozen=True)
class SurfaceMesh:
    """Nodes (and optionally elements) on a sphere of radius ``radius``."""

    radius: float
    nodes: tuple
    elements: Optional[tuple] = None
    kind: str = "uv_grid"
    _arrays: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("mesh radius must be positive")
        if len(self.nodes) == 0:
            raise ValueError("mesh has no nodes")
        for node in self.nodes:
            if abs(node.r - self.radius) > 1e-12:
                raise ValueError(f"node {node} does not lie on the sphere r={self.radius}")

    def __len__(self):
        return len(self.nodes)

    @property
    def phi(self) -> np.ndarray:
        return np.array([n.phi for n in self.nodes])

    @property
    def theta(self) -> np.ndarray:
        return np.array([n.theta for n in self.nodes])

    @property
    def r(self) -> np.ndarray:
        return np.full(len(self.nodes), self.radius)

    def cartesian(self) -> np.ndarray:
        return sph_to_cart_array(self.r, self.phi, self.theta)

    def scaled(self, radius: float) -> "SurfaceMesh":
        """Same angular nodes and elements on a sphere of another radius."""
        return SurfaceMesh(radius, tuple(n.with_radius(radius) for n in self.nodes),
                           self.elements, self.kind)


def icosahedron_angles():
    """Co-latitudes of the two five-vertex rings, ``(theta_u, theta_l)``."""
    c = math.cos(2.0 * math.pi / 5.0)
    return math.acos(c / (c - 1.0)), math.acos(c / (1.0 - c))


def icosahedron_nodes(radius: float = 1.0) -> SurfaceMesh:
    """The 12 icosahedron vertices ``P1 ... P12``.

    Rings alternate between the two co-latitudes returned by
    :func:`icosahedron_angles` with longitudes ``k pi / 5``; ``P1`` and
    ``P12`` are the north and south poles.
    """
    theta_u, theta_l = icosahedron_angles()
    nodes = [SphericalPoint(radius, 0.0, 0.0)]
    for k in range(1, 11):
        nodes.append(SphericalPoint(radius, k * math.pi / 5.0, theta_u if k % 2 else theta_l))
    nodes.append(SphericalPoint(radius, 0.0, math.pi))
    return SurfaceMesh(radius, tuple(nodes), None, "icosahedron")


def uv_grid_nodes(n_phi: int, n_theta: int, radius: float = 1.0) -> SurfaceMesh:
    """Longitude/co-latitude grid with ``n_phi * n_theta`` nodes, poles excluded.

    Nodes are ordered co-latitude-major.  The quadrilateral cells between
    neighbouring rows plus the triangular caps to the (absent) poles are
    recorded as elements, mirroring a mixed quad/triangle surface mesh.
    """
    if n_phi < 2 or n_theta < 2:
        raise ValueError("uv grid needs n_phi >= 2 and n_theta >= 2")
    nodes = []
    for j in range(1, n_theta + 1):
        theta = math.pi * j / (n_theta + 1)
        for i in range(n_phi):
            nodes.append(SphericalPoint(radius, TWO_PI * i / n_phi, theta))
    elements = []
    for j in range(n_theta - 1):
        for i in range(n_phi):
            a = j * n_phi + i
            b = j * n_phi + (i + 1) % n_phi
            elements.append((a, b, b + n_phi, a + n_phi))
    return SurfaceMesh(radius, tuple(nodes), tuple(elements), "uv_grid")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def load_triangle_mesh(path, radius: float = 1.0) -> SurfaceMesh:
    """Read a plain-text triangle mesh and project its vertices radially.

    File layout (whitespace separated, ``#`` starts a comment)::

        nv nf
        x y z        (nv lines)
        i j k        (nf lines, 0-based vertex indices)
    """
    lines = [s for s in (_strip_comment(l) for l in Path(path).read_text().splitlines()) if s]
    if not lines:
        raise MeshFormatError(f"{path}: empty mesh file")
    try:
        nv, nf = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise MeshFormatError(f"{path}: header must be 'nv nf'") from exc
    if len(lines) != 1 + nv + nf:
        raise MeshFormatError(
            f"{path}: expected {nv} vertex and {nf} face lines, found {len(lines) - 1} lines")
    try:
        verts = np.array([[float(t) for t in l.split()] for l in lines[1:1 + nv]])
        faces = [tuple(int(t) for t in l.split()) for l in lines[1 + nv:]]
    except ValueError as exc:
        raise MeshFormatError(f"{path}: non-numeric entry") from exc
    if verts.shape != (nv, 3) or any(len(f) != 3 for f in faces):
        raise MeshFormatError(f"{path}: vertices need 3 coordinates and faces 3 indices")
    if any(not 0 <= i < nv for f in faces for i in f):
        raise MeshFormatError(f"{path}: face index out of range")

    norms = np.linalg.norm(verts, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateVertexError(f"{path}: vertex at the origin cannot be projected")
    _, phi, theta = cart_to_sph_array(verts)
    nodes = tuple(SphericalPoint(radius, p, t) for p, t in zip(phi, theta))
    return SurfaceMesh(radius, nodes, tuple(faces), "triangle_import")


def write_triangle_mesh(path, vertices: Sequence, faces: Sequence) -> None:
    vertices = np.asarray(vertices, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{len(vertices)} {len(faces)}\n")
        for x, y, z in vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for i, j, k in faces:
            fh.write(f"{int(i)} {int(j)} {int(k)}\n")
