"""Perturbation solver for the exterior gravity potential from surface intensity data.

The potential is expanded as ``v = 1/r + eps u1 + eps^2 u2 + ...``; each
``u_k`` solves an exterior Neumann problem on the unit sphere that is
evaluated with the sphere's Green's function of the second kind.
"""
from .exact_models import ExactModel, h_numeric, h_of
from .green_kernel import (KernelEval, SingularityPolicy, SurfaceCollisionError, green,
                           green_collinear_limit, green_values)
from .harmonics import (DEFAULT_BASIS, HarmonicBasis, HarmonicExpansion, RankDeficientFit,
                        eval_surface_harmonic, fit_least_squares)
from .perturbation import (BoundaryData, CascadeError, PerturbationSolution, b1_from_h,
                           b2_from_fit, b3_from_fit, bn_general, evaluate_v, gradient_v,
                           run_cascade, solve_uk, solve_uk_at)
from .quadrature import (IntegralResult, QuadratureConfig, ToleranceNotMet, adaptive_integrate_1d,
                         gauss_legendre, surface_integral_2d_rotated, surface_integral_nested)
from .sphere_geom import (SphericalPoint, SurfaceMesh, cos_gamma, icosahedron_nodes,
                          load_triangle_mesh, uv_grid_nodes)

__version__ = "0.1.0"
