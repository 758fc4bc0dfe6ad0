# %% [markdown]
# # UV grids and an imported triangle mesh
#
# Any node set with enough spread to fit the eight l = 1, 2 harmonics can
# carry the cascade.  A longitude/co-latitude grid excludes the poles.  A
# triangle mesh is read from plain text and projected onto the sphere.

# %%
import math
import tempfile
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from gravpert import ExactModel, QuadratureConfig, load_triangle_mesh, run_cascade, uv_grid_nodes
from gravpert.perturbation import CascadeError
from gravpert.sphere_geom import write_triangle_mesh

model = ExactModel("degree1", 1e-4)


def max_error(mesh, **kw):
    sol = run_cascade(model.boundary_data(), mesh, model.epsilon, **kw)
    return np.abs(model.v(mesh.r, mesh.phi, mesh.theta) - sol.v()).max()


# %% [markdown]
# A 5x5 grid on r = 1 has a ring on the equator, where the 5-point rule in
# cos(theta') also has a node; the kernel is then sampled at the field
# point itself and the solver refuses.  An even rule or a radius above 1
# avoids the collision.  The 6x6 and 12x12 grids have no equator ring.

# %%
grid = uv_grid_nodes(5, 5, 1.0)
try:
    max_error(grid)
except CascadeError as exc:
    print("5x5 grid, r=1:", exc)
print("5x5 grid, r=1, 6-point rule:", max_error(grid, cfg=QuadratureConfig(n_gauss_zeta=6)))
for n in (6, 12):
    for r in (1.0, 1.5):
        print(f"{n}x{n} grid, r={r:g}:", max_error(uv_grid_nodes(n, n, r)))

# %% [markdown]
# A 98-vertex triangulation (Fibonacci points and their convex hull) at
# r = 1.1.  Close to the surface the 5-point rule is the accuracy limit;
# more points in cos(theta') remove it.

# %%
n = 98
k = np.arange(n) + 0.5
z = 1 - 2 * k / n
ang = math.pi * (3 - math.sqrt(5)) * k
verts = np.column_stack([np.sqrt(1 - z * z) * np.cos(ang), np.sqrt(1 - z * z) * np.sin(ang), z])
path = Path(tempfile.mkdtemp()) / "sphere98.tri"
write_triangle_mesh(path, verts, ConvexHull(verts).simplices)
tri = load_triangle_mesh(path, 1.1)
print(len(tri), "nodes,", len(tri.elements), "triangles")
for n_gauss in (5, 20, 64):
    print(f"98 nodes, r=1.1, {n_gauss}-point rule:", max_error(tri, cfg=QuadratureConfig(n_gauss_zeta=n_gauss)))
