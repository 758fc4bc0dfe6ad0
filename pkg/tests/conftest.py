import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from gravpert import ExactModel, icosahedron_nodes, run_cascade
from gravpert.sphere_geom import write_triangle_mesh


def fibonacci_sphere(n):
    """``n`` near-uniform unit vectors and their convex-hull triangles."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rho = np.sqrt(1.0 - z * z)
    ang = math.pi * (3.0 - math.sqrt(5.0)) * k
    verts = np.column_stack([rho * np.cos(ang), rho * np.sin(ang), z])
    return verts, ConvexHull(verts).simplices


@pytest.fixture(scope="session")
def mesh98_path(tmp_path_factory):
    verts, faces = fibonacci_sphere(98)
    path = tmp_path_factory.mktemp("meshes") / "sphere98.tri"
    write_triangle_mesh(path, verts, faces)
    return path


@pytest.fixture(scope="session")
def ico():
    return icosahedron_nodes(1.0)


@pytest.fixture(scope="session")
def degree1_model():
    return ExactModel("degree1", 1e-4)


@pytest.fixture(scope="session")
def degree1_solution(degree1_model, ico):
    return run_cascade(degree1_model.boundary_data(), ico, degree1_model.epsilon)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one pass/fail line for an acceptance criterion, then assert it."""
    def _record(number, title, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
