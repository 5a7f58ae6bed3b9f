"""Neumann kernel, Nystrom system and the interior double-layer potential.

The boundary equation solved here is

    phi(t) - int k(t, tau) phi(tau) dtau = -2 p(t)

with the real kernel ``k(t, tau) = Im[p'(tau) / (p(t) - p(tau))] / pi`` whose
diagonal limit is ``-Im[p''(t) / p'(t)] / (2 pi)``.  Its solution is
``-(2 / alpha_1) (Psi - alpha_0)`` on the curve.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .curve import Curve
from .mesh import QuadratureMesh

log = logging.getLogger(__name__)

RHS_SCALE = -2.0
COND_LIMIT = 1e12
NEAR_FACTOR = 5.0


class SolverError(RuntimeError):
    pass


class SingularityError(ValueError):
    pass


class DomainError(ValueError):
    pass


class NearBoundaryWarning(UserWarning):
    pass


def neumann_kernel(curve: Curve, t: float, tau: float) -> float:
    pt, dpt, ddpt = curve.eval(t)
    if t == tau:
        return float(-(ddpt / dpt).imag / (2 * np.pi))
    ps, dps, _ = curve.eval(tau)
    diff = pt - ps
    if diff == 0:
        raise SingularityError(f"p({t}) == p({tau}): curve is not simple")
    return float((dps / diff).imag / np.pi)


def kernel_matrix(mesh: QuadratureMesh) -> np.ndarray:
    """Kernel values ``k(t_i, t_j)`` at all node pairs."""
    diff = mesh.differences()
    np.fill_diagonal(diff, 1.0)
    K = (mesh.dp[None, :] / diff).imag / np.pi
    np.fill_diagonal(K, -(mesh.ddp / mesh.dp).imag / (2 * np.pi))
    off = ~np.eye(mesh.n, dtype=bool)
    if np.any(diff[off] == 0):
        raise SingularityError("two distinct nodes map to the same point")
    return K


def assemble(mesh: QuadratureMesh) -> np.ndarray:
    """Nystrom matrix ``A = I - K W``."""
    A = -kernel_matrix(mesh) * mesh.weights[None, :]
    A[np.diag_indices_from(A)] += 1.0
    return A


@dataclass(frozen=True, eq=False)
class DensitySolution:
    mesh: QuadratureMesh
    phi: np.ndarray
    residual_norm: float
    condition_estimate: float
    rhs_scale: float = RHS_SCALE
    matrix: np.ndarray = field(default=None, repr=False)

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["t", "re_phi", "im_phi"])
            for t, f in zip(self.mesh.nodes, self.phi):
                out.writerow([format(float(t), ".17g"), format(float(f.real), ".17g"), format(float(f.imag), ".17g")])


def solve_density(mesh: QuadratureMesh, keep_matrix: bool = False) -> DensitySolution:
    """Solve the Nystrom system for the complex density.

    Real and imaginary parts of the right-hand side are solved against one LU
    factorization of the real matrix, followed by one refinement step.
    """
    A = assemble(mesh)
    b = RHS_SCALE * mesh.p
    B = np.column_stack([b.real, b.imag])
    lu, piv = scipy.linalg.lu_factor(A)
    X = scipy.linalg.lu_solve((lu, piv), B)
    # one step of iterative refinement; brings the residual to a few ulps of |p|
    X += scipy.linalg.lu_solve((lu, piv), B - A @ X)
    anorm = np.linalg.norm(A, 1)
    rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SolverError(f"Nystrom matrix is ill-conditioned (condition estimate {cond:.3g})")
    phi = X[:, 0] + 1j * X[:, 1]
    residual = float(np.max(np.abs(A @ X - B)))
    log.debug("solved n=%d cond=%.3g residual=%.3g", mesh.n, cond, residual)
    return DensitySolution(mesh, phi, residual, float(cond), matrix=A if keep_matrix else None)


def _targets(curve: Curve, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p, dp, ddp = curve.eval(t)
    return t, np.atleast_1d(p), np.atleast_1d(dp), np.atleast_1d(ddp)


def _kernel_rows(mesh: QuadratureMesh, t):
    """Kernel rows ``k(t, t_j)`` for targets on the curve, with the diagonal
    limit used wherever a target coincides with a node."""
    t, p, dp, ddp = _targets(mesh.curve, t)
    diff = mesh.curve.chord(t[:, None], mesh.nodes[None, :])
    hit = (t[:, None] == mesh.nodes[None, :]) | (diff == 0)
    safe = np.where(hit, 1.0, diff)
    K = (mesh.dp[None, :] / safe).imag / np.pi
    diag = -(ddp / dp).imag / (2 * np.pi)
    K = np.where(hit, diag[:, None], K)
    return t, p, dp, diff, hit, K


# Within this parameter distance of a node the kernel sum loses about
# eps / gap to cancellation; trapezoid meshes switch to a Taylor expansion.
# The differentiated sum loses eps / gap**2, so its switch radius is larger.
NEAR_NODE = 1e-3
NEAR_NODE_DERIVATIVE = 1e-2
TAYLOR_ORDER = 5


def interpolate_density(sol: DensitySolution, t):
    """Nystrom interpolant ``-2 p(t) + sum_j w_j k(t, t_j) phi_j``.

    On trapezoid meshes, targets closer than ``NEAR_NODE`` to a node (but not
    on it) use a Taylor expansion about the node with spectral derivatives.
    """
    scalar = np.ndim(t) == 0
    mesh = sol.mesh
    t, p, _, _, hit, K = _kernel_rows(mesh, t)
    out = RHS_SCALE * p + (K * mesh.weights[None, :]) @ sol.phi
    if mesh.kind == "trapezoid":
        near, j, gap = _near_nodes(mesh, t, hit)
        if np.any(near):
            out[near] = _taylor(sol.phi, mesh.period, j[near], gap[near])
    return out[0] if scalar else out


def _near_nodes(mesh, t, hit, radius=None):
    radius = NEAR_NODE if radius is None else radius
    h = mesh.period / mesh.n
    j = np.rint(np.mod(t, mesh.period) / h).astype(int) % mesh.n
    gap = np.mod(t - mesh.nodes[j] + mesh.period / 2, mesh.period) - mesh.period / 2
    near = (np.abs(gap) < radius * mesh.period / (2 * np.pi)) & ~hit.any(axis=1)
    return near, j, gap


def _taylor(values, period, j, gap):
    """Taylor polynomial of the trigonometric interpolant of ``values`` about node ``j``."""
    deriv = np.asarray(values, dtype=complex)
    acc = deriv[j]
    fact = 1.0
    for k in range(1, TAYLOR_ORDER + 1):
        deriv = spectral_derivative(deriv, period)
        fact *= k
        acc = acc + deriv[j] * gap**k / fact
    return acc


def kernel_t_derivative(mesh: QuadratureMesh, t):
    """``d/dt k(t, t_j)`` for off-node targets."""
    _, p, dp, diff, hit, _ = _kernel_rows(mesh, t)
    if np.any(hit):
        raise ValueError("kernel derivative formula is singular at nodes")
    return -(mesh.dp[None, :] * dp[:, None] / diff**2).imag / np.pi


def spectral_derivative(values: np.ndarray, period: float) -> np.ndarray:
    """Derivative of a periodic equispaced sequence by discrete Fourier differentiation."""
    n = len(values)
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return np.fft.ifft(2j * np.pi / period * k * np.fft.fft(values))


def interpolate_density_derivative(sol: DensitySolution, t):
    """Derivative of the Nystrom interpolant in the curve parameter.

    Off-node targets use the differentiated interpolation formula; targets
    on or within ``NEAR_NODE_DERIVATIVE`` of a node take the spectral derivative of the
    nodal data (expanded about the node when not on it).
    """
    mesh = sol.mesh
    if mesh.kind != "trapezoid":
        raise NotImplementedError("density derivative needs a trapezoid mesh")
    scalar = np.ndim(t) == 0
    t, p, dp, _, hit, _ = _kernel_rows(mesh, t)
    out = np.empty(len(t), dtype=complex)
    on_node = hit.any(axis=1)
    if np.any(on_node):
        nodal = spectral_derivative(sol.phi, mesh.period)
        out[on_node] = nodal[hit[on_node].argmax(axis=1)]
    near, j, gap = _near_nodes(mesh, t, hit, NEAR_NODE_DERIVATIVE)
    if np.any(near):
        nodal = spectral_derivative(sol.phi, mesh.period)
        out[near] = _taylor(nodal, mesh.period, j[near], gap[near])
    rest = ~on_node & ~near
    if np.any(rest):
        dK = kernel_t_derivative(mesh, t[rest])
        out[rest] = RHS_SCALE * dp[rest] + (dK * mesh.weights[None, :]) @ sol.phi
    return out[0] if scalar else out


def cauchy_sum(mesh: QuadratureMesh, density, z) -> np.ndarray:
    """Trapezoid/panel approximation of ``(1 / 2 pi i) int density(y) / (y - z) dy``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    density = np.asarray(density)
    wq = mesh.weights * mesh.dp
    return ((density * wq)[None, :] / (mesh.p[None, :] - z[:, None])).sum(axis=1) / (2j * np.pi)


def _outline(mesh: QuadratureMesh, oversample: int = 4) -> np.ndarray:
    """Closed polygon through the nodes, the corners and extra points between nodes."""
    t = np.sort(np.concatenate([mesh.nodes, np.asarray(mesh.curve.corners, dtype=float)]))
    gaps = np.diff(np.append(t, t[0] + mesh.period))
    frac = np.arange(oversample) / oversample
    fine = (t[:, None] + gaps[:, None] * frac[None, :]).ravel()
    return mesh.curve(np.mod(fine, mesh.period))


def inside_mask(mesh: QuadratureMesh, z, chunk: int = 256) -> np.ndarray:
    """True where the curve winds once about ``z``.

    Uses the argument increments along a polygon finer than the mesh; the
    quadrature version of the winding integral aliases badly near the curve.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    poly = _outline(mesh)
    nxt = np.roll(poly, -1)
    out = np.empty(len(z), dtype=bool)
    for s in range(0, len(z), chunk):
        zz = z[s:s + chunk, None]
        wind = np.angle((nxt[None, :] - zz) / (poly[None, :] - zz)).sum(axis=1) / (2 * np.pi)
        out[s:s + chunk] = np.abs(wind - 1.0) < 0.5
    return out


def near_boundary(mesh: QuadratureMesh, z, factor: float = NEAR_FACTOR) -> np.ndarray:
    """True where ``z`` is within ``factor`` local node spacings of the curve."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    dist = np.abs(mesh.p[None, :] - z[:, None])
    j = dist.argmin(axis=1)
    return dist[np.arange(len(z)), j] < factor * mesh.spacing()[j]


def _check_interior(mesh, z):
    if not np.all(inside_mask(mesh, z)):
        raise DomainError("evaluation point is not inside the curve")
    if np.any(near_boundary(mesh, z)):
        warnings.warn("interior point close to the boundary; naive quadrature may be inaccurate",
                      NearBoundaryWarning, stacklevel=3)


def apply_dlp(mesh: QuadratureMesh, density, x):
    """Double-layer potential at interior points, applied to real and
    imaginary parts of the density separately."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    _check_interior(mesh, x)
    density = np.asarray(density, dtype=complex)
    re = -cauchy_sum(mesh, density.real, x).real
    im = -cauchy_sum(mesh, density.imag, x).real
    out = re + 1j * im
    return out[0] if scalar else out
