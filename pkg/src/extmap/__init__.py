"""Exterior conformal maps from a second-kind double-layer integral equation."""
from .curve import (Curve, CurveError, from_descriptor, load_curve, make_cassini, make_circle,
                    make_ellipse, make_polygon, unit_square)
from .mesh import MeshError, QuadratureMesh, integrate, panel_mesh, refine_corners, trapezoid_mesh
from .operator import (DensitySolution, DomainError, NearBoundaryWarning, SolverError, apply_dlp,
                       assemble, interpolate_density, interpolate_density_derivative,
                       neumann_kernel, solve_density)
from .recovery import (BoundaryMap, ResolutionError, boundary_map, eval_exterior, faber_dlp,
                       map_on_boundary, mean_correction, theta_prime)
from .verify import (ConvergenceReport, analytic_boundary_map, boundary_error, convergence_study,
                     faber_oracle, square_corner_symmetry)

__version__ = "0.1.0"
