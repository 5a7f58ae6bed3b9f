"""Command line front end: solve | errors | convergence | grid | faber-check."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curve import Curve, CurveError, load_curve
from .mesh import MeshError, panel_mesh, refine_corners, trapezoid_mesh
from .operator import (DomainError, NearBoundaryWarning, SingularityError, SolverError,
                       inside_mask, near_boundary, solve_density)
from .recovery import DegenerateDensityError, ResolutionError, boundary_map, eval_exterior, faber_dlp
from .verify import (TABLE_N, NoReferenceError, boundary_error, convergence_study,
                     faber_oracle, tables_layout)

log = logging.getLogger("extmap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
NUMERIC_ERRORS = (SolverError, ResolutionError, DegenerateDensityError, SingularityError,
                  np.linalg.LinAlgError)


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


@dataclass
class RunConfig:
    curve: Curve
    n: int | None = None
    panels: int | None = None
    gauss: int = 8
    refine: int | None = None
    samples: int = 36
    out: Path | None = None
    fmt: str = "csv"
    jobs: int = 1
    threshold: float = 1e-8
    extra: dict = field(default_factory=dict)

    @property
    def smooth(self) -> bool:
        return not self.curve.corners

    def validate(self) -> None:
        if self.smooth and self.panels is not None:
            raise ConfigError("smooth curves use --n, not --panels")
        if not self.smooth and self.n is not None:
            raise ConfigError("curves with corners use --panels/--gauss/--refine, not --n")
        if self.samples < 4:
            raise ConfigError("--samples must be at least 4")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")

    def mesh(self):
        if self.smooth:
            return trapezoid_mesh(self.curve, 64 if self.n is None else self.n)
        mesh = panel_mesh(self.curve, 16 if self.panels is None else self.panels, self.gauss)
        for _ in range(self.refine or 0):
            mesh = refine_corners(mesh)
        return mesh


def _write_table(path: Path, header: list, rows, meta: dict, fmt_: str) -> None:
    """CSV data plus a JSON sidecar, or one JSON document."""
    path = Path(path)
    rows = [[fmt(v) for v in row] for row in rows]
    if fmt_ == "json":
        doc = {"meta": meta, "columns": header, "rows": rows}
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        out.writerows(rows)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def _dump_debug(cfg: RunConfig, sol) -> None:
    target = Path(cfg.extra["dump"])
    target.mkdir(parents=True, exist_ok=True)
    np.savetxt(target / "matrix.csv", sol.matrix, delimiter=",", fmt="%.17g")
    sol.write_csv(target / "density.csv")


def cmd_solve(cfg: RunConfig) -> int:
    mesh = cfg.mesh()
    sol = solve_density(mesh, keep_matrix=bool(cfg.extra.get("dump")))
    bmap = boundary_map(mesh, sol)
    if cfg.extra.get("dump"):
        _dump_debug(cfg, sol)
    print(f"alpha1 = {fmt(bmap.alpha1)}")
    print(f"alpha0 = {fmt(bmap.alpha0.real)} {fmt(bmap.alpha0.imag)}i")
    print(f"residual_norm = {fmt(sol.residual_norm)}")
    if cfg.out is not None:
        header = ["t", "re_p", "im_p", "theta", "re_psi", "im_psi", "theta_prime"]
        _write_table(cfg.out, header, bmap.rows(), bmap.header(), cfg.fmt)
    return EXIT_OK


def cmd_errors(cfg: RunConfig) -> int:
    mesh = cfg.mesh()
    try:
        err = boundary_error(boundary_map(mesh), cfg.curve, cfg.samples)
    except NoReferenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"sup_error = {fmt(err)}")
    return EXIT_OK


def cmd_convergence(cfg: RunConfig) -> int:
    n_list = cfg.extra.get("n_list") or TABLE_N
    report = convergence_study(
        cfg.curve, n_list=n_list,
        max_refinements=30 if cfg.refine is None else cfg.refine,
        panels_per_side=16 if cfg.panels is None else cfg.panels,
        gauss_order=cfg.gauss, samples=cfg.samples, jobs=cfg.jobs)
    for r in report.rows:
        key = f"level {r.level:3d}" if r.level is not None else f"n {r.n:5d}"
        val = f"{r.sup_error:.2e}" if r.status == "ok" else r.status
        print(f"{key}  {val}")
    if cfg.out is not None:
        header = ["n", "level", "sup_error", "alpha1_error", "condition_estimate", "symmetry", "status"]
        rows = [[getattr(r, c) for c in header] for r in report.rows]
        meta = report.to_dict()
        if not report.self_convergence:
            meta["table"] = tables_layout([report])
        _write_table(cfg.out, header, rows, meta, cfg.fmt)
    if all(r.status != "ok" for r in report.rows):
        return EXIT_NUMERIC
    return EXIT_OK


def grid_points(curve: Curve, offsets=(0.1, 0.25, 0.5, 1.0), rays: int = 16,
                curve_samples: int = 200, ray_samples: int = 40):
    """Offset curves and normal rays in the exterior, as (group, points) pairs."""
    scale = float(np.max(np.abs(curve(np.linspace(0, curve.period, 256, endpoint=False)))))
    t = curve.period * (np.arange(curve_samples) + 0.5) / curve_samples
    p, dp, _ = curve.eval(t)
    normal = -1j * dp / np.abs(dp)
    groups = [(f"offset-{k}", p + d * scale * normal) for k, d in enumerate(offsets)]
    t = curve.period * (np.arange(rays) + 0.5) / rays
    p, dp, _ = curve.eval(t)
    normal = -1j * dp / np.abs(dp)
    s = scale * np.linspace(0.05, 1.5, ray_samples)
    groups += [(f"ray-{k}", p[k] + s * normal[k]) for k in range(rays)]
    return groups


def cmd_grid(cfg: RunConfig) -> int:
    mesh = cfg.mesh()
    bmap = boundary_map(mesh)
    rows = []
    for gid, z in grid_points(cfg.curve):
        inside = inside_mask(mesh, z)
        near = near_boundary(mesh, z)
        w = np.full(len(z), np.nan + 0j)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearBoundaryWarning)
            if np.any(~inside):
                w[~inside] = eval_exterior(bmap, z[~inside])
        for zj, wj, ins, nb in zip(z, w, inside, near):
            flag = "interior" if ins else ("near" if nb else "ok")
            rows.append([gid, zj.real, zj.imag, wj.real, wj.imag, flag])
    header = ["group", "re_z", "im_z", "re_psi", "im_psi", "flag"]
    if cfg.out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[fmt(v) for v in r] for r in rows])
    else:
        try:
            _write_table(cfg.out, header, rows, bmap.header(), cfg.fmt)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    return EXIT_OK


def interior_points(mesh, count: int = 20) -> np.ndarray:
    """Boundary points scaled by 0.2 and 0.35, kept where they lie inside."""
    t = mesh.period * (np.arange(count) + 0.25) / count
    z = mesh.curve(t) * np.where(np.arange(count) % 2 == 0, 0.2, 0.35)
    return z[inside_mask(mesh, z)]


def cmd_faber_check(cfg: RunConfig) -> int:
    bmap = boundary_map(cfg.mesh())
    z = interior_points(bmap.mesh)
    if len(z) == 0:
        raise ConfigError("no interior test points found")
    near = int(np.count_nonzero(near_boundary(bmap.mesh, z)))
    if near:
        print(f"note: {near} of {len(z)} points are within the near-boundary guard")
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearBoundaryWarning)
        for m in range(1, cfg.extra.get("m_max", 5) + 1):
            diff = np.max(np.abs(faber_dlp(bmap, m, z) - faber_oracle(bmap, m, z)))
            print(f"m = {m}  max |faber_dlp - faber_oracle| = {diff:.3e}")
            worst = max(worst, float(diff))
    ok = worst <= cfg.threshold
    print(f"{'PASS' if ok else 'FAIL'}: max diff {worst:.3e} vs threshold {cfg.threshold:.1e}")
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "solve": cmd_solve,
    "errors": cmd_errors,
    "convergence": cmd_convergence,
    "grid": cmd_grid,
    "faber-check": cmd_faber_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", required=True, help="curve descriptor as JSON or a JSON file path")
    common.add_argument("--n", type=int, help="trapezoid nodes (smooth curves)")
    common.add_argument("--panels", type=int, help="Gauss panels per side (curves with corners)")
    common.add_argument("--gauss", type=int, default=8, help="Gauss order per panel")
    common.add_argument("--refine", type=int, help="dyadic corner refinements")
    common.add_argument("--samples", type=int, default=36)
    common.add_argument("--out", type=Path)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--threshold", type=float, default=1e-8)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="extmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    solve = sub.add_parser("solve", parents=[common], help="boundary map and Laurent coefficients")
    solve.add_argument("--dump", metavar="DIR", help="debug: write the Nystrom matrix and density")
    sub.add_parser("errors", parents=[common], help="sup error against the analytic map")
    conv = sub.add_parser("convergence", parents=[common], help="error sweep over n or refinement")
    conv.add_argument("--n-list", type=lambda s: [int(x) for x in s.split(",")],
                      help="comma separated node counts (default 4,8,...,512)")
    sub.add_parser("grid", parents=[common], help="plot data: images of exterior curves")
    fab = sub.add_parser("faber-check", parents=[common], help="cross-check the Faber representation")
    fab.add_argument("--m-max", type=int, default=5)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    extra = {k: getattr(args, k) for k in ("dump", "n_list", "m_max") if getattr(args, k, None)}
    try:
        cfg = RunConfig(load_curve(args.curve), args.n, args.panels, args.gauss, args.refine,
                        args.samples, args.out, args.fmt, args.jobs, args.threshold, extra)
        cfg.validate()
        return COMMANDS[args.command](cfg)
    except (CurveError, MeshError, ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
