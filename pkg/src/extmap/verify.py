"""Reference maps, error metrics and convergence studies."""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .curve import Curve
from .mesh import QuadratureMesh, panel_mesh, refine_corners, trapezoid_mesh
from .operator import cauchy_sum, solve_density
from .recovery import BoundaryMap, boundary_map, map_on_boundary

DEFAULT_SAMPLES = 36
TABLE_N = (4, 8, 16, 32, 64, 128, 256, 512)


class NoReferenceError(ValueError):
    pass


def _wrap(x):
    return np.angle(np.exp(1j * np.asarray(x)))


def analytic_boundary_map(curve: Curve, t):
    """Exact ``Psi(p(t))`` for the circle, ellipse and Cassini families."""
    t = np.asarray(t, dtype=float)
    family = curve.family
    if family == "circle":
        return curve(t) / curve.descriptor["r"]
    if family == "ellipse":
        return np.exp(1j * t)
    if family == "cassini":
        a = curve.descriptor["a"]
        root = np.sqrt(curve(t) ** 2 - 1) / a
        # the continuous branch stays within a quarter turn of e^{it}
        flip = (root * np.exp(-1j * t)).real < 0
        return np.where(flip, -root, root)
    raise NoReferenceError(f"no analytic reference for {family} curves")


def analytic_alpha1(curve: Curve) -> float:
    family = curve.family
    if family == "circle":
        return 1.0 / curve.descriptor["r"]
    if family == "ellipse":
        return 2.0 / (curve.descriptor["a"] + 1.0)
    if family == "cassini":
        return 1.0 / curve.descriptor["a"]
    raise NoReferenceError(f"no analytic reference for {family} curves")


def sample_parameters(curve: Curve, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Equispaced parameters; shifted by half a step on curves with corners."""
    shift = 0.5 if curve.corners else 0.0
    return curve.period * (np.arange(samples) + shift) / samples


def boundary_error(bmap: BoundaryMap, curve: Curve | None = None,
                   samples: int = DEFAULT_SAMPLES) -> float:
    """Sup-norm error of the recovered boundary map at equispaced parameters."""
    curve = bmap.curve if curve is None else curve
    t = sample_parameters(curve, samples)
    exact = analytic_boundary_map(curve, t)
    return float(np.max(np.abs(map_on_boundary(bmap, t) - exact)))


def faber_oracle(bmap: BoundaryMap, m: int, z0):
    """``P_m(z0) = (1 / 2 pi i) int Psi(z)^m / (z - z0) dz`` for interior ``z0``."""
    scalar = np.ndim(z0) == 0
    out = cauchy_sum(bmap.mesh, bmap.psi**m, z0)
    return out[0] if scalar else out


def _is_centered_square(curve: Curve) -> bool:
    if curve.family != "polygon":
        return False
    v = np.array([complex(x, y) for x, y in curve.descriptor["vertices"]])
    if len(v) != 4:
        return False
    h = abs(v[0].real)
    return h > 0 and np.allclose(np.abs(v.real), h, rtol=0, atol=1e-14 * h) and \
        np.allclose(np.abs(v.imag), h, rtol=0, atol=1e-14 * h)


def _one_sided_limit(bmap: BoundaryMap, k: int, side: int, exponent: float) -> float:
    """Extrapolate theta to corner ``k`` from the two closest nodes on one side,
    assuming ``theta - theta_c ~ dist**exponent``."""
    mesh = bmap.mesh
    c = mesh.curve.corners[k]
    d = _wrap_param(mesh.nodes - c, mesh.period)
    idx = np.where(side * d > 0)[0]
    idx = idx[np.argsort(np.abs(d[idx]))[:2]]
    x = np.abs(mesh.local[idx]) ** exponent
    th0 = np.angle(bmap.psi[idx[0]])
    step = np.angle(bmap.psi[idx[1]] / bmap.psi[idx[0]])
    return th0 - step * x[0] / (x[1] - x[0])


def _wrap_param(d, period):
    return np.mod(d + period / 2, period) - period / 2


def square_corner_symmetry(bmap: BoundaryMap) -> float:
    """Deviation of the discrete map from the symmetries of the centred square.

    Combines the corner images (one-sided limits of theta, which must land on
    the odd multiples of pi/4) and the quarter-turn rotation of theta between
    consecutive sides.
    """
    mesh = bmap.mesh
    if not _is_centered_square(mesh.curve) or mesh.kind != "panel":
        raise ValueError("corner symmetry check needs a panel mesh on the centred square")
    exponent = 2.0 / 3.0  # pi / exterior angle
    dev = 0.0
    for k, z in enumerate(mesh.curve.corner_points):
        for side in (-1, 1):
            th = _one_sided_limit(bmap, k, side, exponent)
            dev = max(dev, abs(float(_wrap(th - np.angle(z)))))
    n = mesh.n
    if n % 4 == 0:
        shift = np.roll(np.arange(n), -n // 4)
        side_len = mesh.period / 4
        assert np.allclose(_wrap_param(mesh.nodes[shift] - mesh.nodes - side_len, mesh.period), 0,
                           atol=1e-12)
        rot = _wrap(bmap.theta[shift] - bmap.theta - np.pi / 2)
        dev = max(dev, float(np.max(np.abs(rot))))
    return dev


@dataclass
class ConvergenceRow:
    n: int
    level: int | None
    sup_error: float
    alpha1_error: float
    runtime_seconds: float
    condition_estimate: float
    symmetry: float | None = None
    status: str = "ok"


@dataclass
class ConvergenceReport:
    curve: dict
    rows: list = field(default_factory=list)
    sample_count: int = DEFAULT_SAMPLES
    self_convergence: bool = False

    def errors(self) -> np.ndarray:
        return np.array([r.sup_error for r in self.rows])

    def to_dict(self) -> dict:
        return {"curve": self.curve, "sample_count": self.sample_count,
                "self_convergence": self.self_convergence,
                "rows": [asdict(r) for r in self.rows]}

    def write_csv(self, path) -> None:
        """One row per discretization; timings stay in the JSON form only."""
        cols = ["n", "level", "sup_error", "alpha1_error", "condition_estimate",
                "symmetry", "status"]
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(cols)
            for r in self.rows:
                out.writerow([_fmt(getattr(r, c)) for c in cols])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return x


def tables_layout(reports, key: str = "a") -> dict:
    """Merge reports into a table keyed by curve parameter (columns) and n (rows)."""
    ns = sorted({r.n for rep in reports for r in rep.rows})
    columns = {}
    for rep in reports:
        col = {r.n: (r.sup_error if r.status == "ok" else None) for r in rep.rows}
        columns[str(rep.curve.get(key))] = [col.get(n) for n in ns]
    return {"family": reports[0].curve.get("family") if reports else None,
            "n": ns, "columns": columns}


def _smooth_row(curve: Curve, n: int, samples: int) -> ConvergenceRow:
    start = time.perf_counter()
    try:
        bmap = boundary_map(trapezoid_mesh(curve, n))
        err = boundary_error(bmap, curve, samples)
        a_err = abs(bmap.alpha1 - analytic_alpha1(curve))
        cond = bmap.solution.condition_estimate
        status = "ok"
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        err, a_err, cond, status = np.nan, np.nan, np.nan, f"failed: {exc}"
    return ConvergenceRow(n, None, float(err), float(a_err), time.perf_counter() - start,
                          float(cond), status=status)


def convergence_study(curve: Curve, n_list=TABLE_N, max_refinements: int = 30,
                      panels_per_side: int = 16, gauss_order: int = 8,
                      samples: int = DEFAULT_SAMPLES, jobs: int = 1) -> ConvergenceReport:
    """Run solve, recovery and error estimation over a sequence of discretizations.

    Smooth curves sweep ``n_list`` against the analytic map.  Curves with
    corners sweep dyadic corner refinement levels ``0..max_refinements`` and
    measure self-convergence against the deepest level.
    """
    if not curve.corners:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            rows = list(pool.map(lambda n: _smooth_row(curve, n, samples), sorted(n_list)))
        return ConvergenceReport(curve.descriptor, rows, samples)

    meshes = [panel_mesh(curve, panels_per_side, gauss_order)]
    for _ in range(max_refinements):
        meshes.append(refine_corners(meshes[-1]))
    t = sample_parameters(curve, samples)
    square = _is_centered_square(curve)

    def run(mesh: QuadratureMesh):
        start = time.perf_counter()
        try:
            sol = solve_density(mesh)
            bmap = boundary_map(mesh, sol)
            vals = map_on_boundary(bmap, t)
            sym = square_corner_symmetry(bmap) if square else None
            return vals, bmap.alpha1, sol.condition_estimate, sym, time.perf_counter() - start, "ok"
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            return None, np.nan, np.nan, None, time.perf_counter() - start, f"failed: {exc}"

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(run, meshes))
    ref_vals, ref_alpha = results[-1][0], results[-1][1]
    rows = []
    for mesh, (vals, alpha1, cond, sym, dt, status) in zip(meshes, results):
        if vals is None or ref_vals is None:
            err = a_err = np.nan
            if status == "ok":
                status = "failed: reference level failed"
        else:
            err = float(np.max(np.abs(vals - ref_vals)))
            a_err = abs(alpha1 - ref_alpha)
        rows.append(ConvergenceRow(mesh.n, mesh.refinement_level, err, float(a_err), dt,
                                   float(cond), sym, status))
    return ConvergenceReport(curve.descriptor, rows, samples, self_convergence=True)
