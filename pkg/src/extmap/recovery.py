"""From the solved density to the exterior map.

The density equals ``-(2 / alpha_1) (Psi - alpha_0)`` on the curve.  Adding
the mean correction ``(1 / 2 pi i) int phi / z dz = -alpha_0 / alpha_1``
leaves ``-(2 / alpha_1) Psi``, whose phase is the boundary correspondence.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .mesh import QuadratureMesh
from .operator import (
    DensitySolution,
    DomainError,
    NearBoundaryWarning,
    apply_dlp,
    cauchy_sum,
    inside_mask,
    interpolate_density,
    near_boundary,
    solve_density,
    spectral_derivative,
)

DEGENERATE_TOL = 1e-13


class ResolutionError(RuntimeError):
    """The mesh is too coarse to resolve a monotone boundary correspondence."""


class DegenerateDensityError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BoundaryMap:
    mesh: QuadratureMesh
    solution: DensitySolution = field(repr=False)
    phi_tilde: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    alpha1: float
    alpha0: complex
    mean_correction: complex
    theta_prime: np.ndarray | None = field(default=None, repr=False)
    theta_prime_residual: float | None = None

    @property
    def curve(self):
        return self.mesh.curve

    def modulus_spread(self) -> float:
        """Relative spread ``(max - min) / mean`` of ``|phi_tilde|``."""
        r = np.abs(self.phi_tilde)
        return float((r.max() - r.min()) / r.mean())

    def header(self) -> dict:
        return {
            "curve": self.curve.descriptor,
            "mesh_kind": self.mesh.kind,
            "n": self.mesh.n,
            "refinement_level": self.mesh.refinement_level,
            "alpha1": self.alpha1,
            "alpha0": [self.alpha0.real, self.alpha0.imag],
            "mean_correction": [self.mean_correction.real, self.mean_correction.imag],
            "residual_norm": self.solution.residual_norm,
            "condition_estimate": self.solution.condition_estimate,
        }

    def rows(self):
        tp = self.theta_prime
        for j in range(self.mesh.n):
            z, w = self.mesh.p[j], self.psi[j]
            yield [self.mesh.nodes[j], z.real, z.imag, self.theta[j], w.real, w.imag,
                   None if tp is None else tp[j]]


def mean_correction(mesh: QuadratureMesh, sol: DensitySolution) -> complex:
    """``(1 / 2 pi i) sum_j w_j phi_j p'_j / p_j``; requires 0 inside the curve."""
    return complex(np.sum(mesh.weights * sol.phi * mesh.dp / mesh.p) / (2j * np.pi))


def unwrap_angles(psi: np.ndarray) -> np.ndarray:
    """Continuous lift of ``arg psi`` along the closed node sequence.

    The lift starts in ``[0, 2 pi)`` and must wind exactly once.
    """
    steps = np.angle(np.roll(psi, -1) / psi)
    if np.any(np.abs(steps) >= np.pi):
        raise ResolutionError("boundary correspondence jumps by pi between nodes; refine the mesh")
    winding = steps.sum() / (2 * np.pi)
    if abs(winding - 1) > 1e-6:
        raise ResolutionError(f"discrete boundary map winds {winding:.3f} times; refine the mesh")
    start = np.mod(np.angle(psi[0]), 2 * np.pi)
    if start >= 2 * np.pi:  # -tiny wraps to exactly 2 pi in floating point
        start = 0.0
    return start + np.concatenate([[0.0], np.cumsum(steps[:-1])])


def normalize(phi_tilde: np.ndarray) -> np.ndarray:
    mod = np.abs(phi_tilde)
    if np.any(mod < DEGENERATE_TOL):
        raise DegenerateDensityError("corrected density vanishes at a node")
    return -phi_tilde / mod


def boundary_map(mesh: QuadratureMesh, sol: DensitySolution | None = None) -> BoundaryMap:
    if sol is None:
        sol = solve_density(mesh)
    c = mean_correction(mesh, sol)
    phi_tilde = sol.phi + c
    psi = normalize(phi_tilde)
    theta = unwrap_angles(psi)
    alpha1 = 2.0 / float(np.mean(np.abs(phi_tilde)))
    alpha0 = -alpha1 * c
    tp, resid = None, None
    if mesh.kind == "trapezoid":
        tp, resid = _theta_prime(mesh, phi_tilde)
    return BoundaryMap(mesh, sol, phi_tilde, psi, theta, alpha1, alpha0, c, tp, resid)


def _theta_prime(mesh, phi_tilde):
    dphi = spectral_derivative(phi_tilde, mesh.period)
    q = -1j * dphi / phi_tilde
    return q.real / np.abs(mesh.dp), float(np.max(np.abs(q.imag)))


def theta_prime(bmap: BoundaryMap) -> np.ndarray:
    """Arc-length derivative of the boundary correspondence at the nodes."""
    if bmap.mesh.kind != "trapezoid":
        raise NotImplementedError("theta' is only available on trapezoid meshes")
    if bmap.theta_prime is not None:
        return bmap.theta_prime
    return _theta_prime(bmap.mesh, bmap.phi_tilde)[0]


def map_on_boundary(bmap: BoundaryMap, t):
    """``Psi(p(t))`` at arbitrary parameters through the Nystrom interpolant."""
    phi = interpolate_density(bmap.solution, t) + bmap.mean_correction
    return -phi / np.abs(phi)


def eval_exterior(bmap: BoundaryMap, z0):
    """Exterior map by the Cauchy formula for the exterior domain.

    ``Psi(z0) = alpha_1 z0 + alpha_0 - (1 / 2 pi i) int Psi(z) / (z - z0) dz``
    """
    scalar = np.ndim(z0) == 0
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    if np.any(inside_mask(bmap.mesh, z0)):
        raise DomainError("evaluation point is not outside the curve")
    if np.any(near_boundary(bmap.mesh, z0)):
        warnings.warn("exterior point close to the boundary; naive quadrature may be inaccurate",
                      NearBoundaryWarning, stacklevel=2)
    out = bmap.alpha1 * z0 + bmap.alpha0 - cauchy_sum(bmap.mesh, bmap.psi, z0)
    return out[0] if scalar else out


def faber_dlp(bmap: BoundaryMap, m: int, z0):
    """Faber polynomial ``P_m(z0)`` as ``-2 D(cos m theta + i sin m theta)``."""
    if m < 0:
        raise ValueError("Faber index must be non-negative")
    if m == 0:
        return apply_dlp(bmap.mesh, -np.ones(bmap.mesh.n), z0)
    return -2.0 * apply_dlp(bmap.mesh, bmap.psi**m, z0)
