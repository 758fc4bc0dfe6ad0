# %% [markdown]
# # Kernel and surface quadrature
#
# The exterior Neumann kernel on the unit sphere, its collinear limit off
# the surface, and the two surface integrators.

# %%
import math

import numpy as np

from gravpert import (QuadratureConfig, SphericalPoint, green, green_collinear_limit,
                      surface_integral_2d_rotated, surface_integral_nested)
from gravpert.green_kernel import green_values
from gravpert.sphere_geom import one_minus_cos_gamma

# %% [markdown]
# A few kernel values.  For a field point off the sphere and a source on
# the same ray the kernel has a finite limit, which is substituted below
# `gamma_tol`.

# %%
print(green(SphericalPoint(1, 0, 0), SphericalPoint(1, 0, math.pi / 2)))
print(green(SphericalPoint(1.5, 0, 0), SphericalPoint(1, 0, 0)))
for r in (1.01, 1.5, 2.0, 10.0, 1e6):
    print(f"collinear limit at r={r:g}: {green_collinear_limit(r):.6g}")

# %% [markdown]
# The integral of the kernel against a surface harmonic of degree l is
# that harmonic divided by (l+1) r^(l+1).  The simplest case, l = 0,
# gives 1/r.  On r = 1 the nested rule (Gauss in cos(theta'), adaptive in
# phi') converges slowly because its inner integral is log-singular at
# the field point's co-latitude; the rotated rule puts its pole on the
# field point and does not suffer from this.

# %%
def kernel(p):
    return lambda phi, theta: green_values(p.r, one_minus_cos_gamma(p.phi, p.theta, phi, theta))


for r in (1.0, 1.1, 1.5, 10.0):
    p = SphericalPoint(r, 0.0, 0.0)
    row = [surface_integral_nested(kernel(p), QuadratureConfig(n_gauss_zeta=n)).value.real / (4 * math.pi)
           for n in (5, 20, 64)]
    rot = surface_integral_2d_rotated(kernel(p), p).value.real / (4 * math.pi)
    print(f"r={r:5g}  exact {1 / r:.10f}  nested n=5/20/64 "
          + " ".join(f"{v:.10f}" for v in row) + f"  rotated {rot:.10f}")
