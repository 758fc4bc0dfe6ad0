# %% [markdown]
# # Degree-4 model
#
# u = -(5/2) sin(theta) (7cos^3 theta - 3 cos theta) e^{i phi} / r^5 is
# the (4, 1) harmonic.  The eight-term l <= 2 fit cannot represent it in
# general, so the higher orders gain less than for the degree-1 model.

# %%
import numpy as np

from gravpert import ExactModel, HarmonicBasis, icosahedron_nodes, run_cascade, uv_grid_nodes
from gravpert.harmonics import fit_least_squares

model = ExactModel("degree4", 1e-4)
for r in (1.0, 1.5, 2.0):
    mesh = icosahedron_nodes(r)
    sol = run_cascade(model.boundary_data(), mesh, model.epsilon)
    err = np.abs(model.v(mesh.r, mesh.phi, mesh.theta)[None, :] - sol.v_values).max(axis=1)
    print(f"r={r:g}  max |v - v1|, |v - v2|, |v - v3| =", np.array2string(err, precision=3))

# %% [markdown]
# On the icosahedron the (4, 1) harmonic coincides with an l = 2
# combination, because the vertices come in antipodal pairs.  A grid
# exposes the aliasing; a basis up to l = 4 removes it.

# %%
ico = icosahedron_nodes()
grid = uv_grid_nodes(10, 8)
for name, mesh in (("icosahedron", ico), ("10x8 grid", grid)):
    trace = model.u(1.0, mesh.phi, mesh.theta)
    print(f"{name}: l<=2 residual {fit_least_squares(mesh.phi, mesh.theta, trace).residual_norm:.3e}")
fit = fit_least_squares(grid.phi, grid.theta, model.u(1.0, grid.phi, grid.theta), HarmonicBasis.up_to(4, 0))
for (l, m), c in zip(fit.basis.terms, fit.coeffs):
    if abs(c) > 1e-10:
        print(f"l<=4 fit on the grid: coefficient of ({l}, {m}) = {c.real:+.12f}{c.imag:+.1e}i")
