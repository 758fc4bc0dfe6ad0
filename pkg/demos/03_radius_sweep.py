# %% [markdown]
# # Error against radius
#
# The icosahedron is scaled to radius r and the cascade is evaluated at
# the scaled vertices.  The error at P5 falls rapidly with r.  The second
# part varies eps at r = 1.

# %%
import numpy as np

from gravpert import ExactModel, icosahedron_nodes, run_cascade

model = ExactModel("degree1", 1e-4)
for r in (1.0, 1.5, 2.0, 10.0, 100.0):
    mesh = icosahedron_nodes(r)
    sol = run_cascade(model.boundary_data(), mesh, model.epsilon)
    err = np.abs(model.v(mesh.r, mesh.phi, mesh.theta) - sol.v())
    print(f"r={r:6g}  |v - v3| at P5 = {err[4]:.6e}   max over nodes = {err.max():.6e}")

# %%
for eps in (1e-2, 1e-3, 1e-4, 1e-5):
    m = ExactModel("degree1", eps)
    mesh = icosahedron_nodes(1.0)
    sol = run_cascade(m.boundary_data(), mesh, eps)
    err = np.abs(m.v(mesh.r, mesh.phi, mesh.theta)[None, :] - sol.v_values).max(axis=1)
    print(f"eps={eps:g}  max |v - v1|, |v - v2|, |v - v3| =", np.array2string(err, precision=3))
