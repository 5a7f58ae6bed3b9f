"""Quadrature meshes on a curve: periodic trapezoid rule and Gauss panels.

Panel meshes store every panel relative to its nearest breakpoint (a corner,
or the parameter origin).  Node positions next to a corner are then computed
as small displacements from the corner, which keeps differences between
nodes accurate after many dyadic refinements.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curve import Curve


class MeshError(ValueError):
    pass


def _legendre(q: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values of P_q and its derivative by the three-term recurrence."""
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(2, q + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    return p1, q * (x * p1 - p0) / (x * x - 1)


@lru_cache(maxsize=None)
def gauss_legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration."""
    if q < 1:
        raise MeshError("Gauss order must be positive")
    k = np.arange(1, q + 1)
    x = np.cos(np.pi * (k - 0.25) / (q + 0.5))
    for _ in range(100):
        val, der = _legendre(q, x)
        dx = val / der
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, der = _legendre(q, x)
    w = 2.0 / ((1 - x * x) * der * der)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize so mirrored panels carry mirrored nodes
    return 0.5 * (x - x[::-1]), 0.5 * (w + w[::-1])


@dataclass(frozen=True)
class Panel:
    """Parameter interval ``[b + lo, b + hi]`` where ``b`` is breakpoint ``anchor``."""

    anchor: int
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class QuadratureMesh:
    curve: Curve
    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    p: np.ndarray
    dp: np.ndarray
    ddp: np.ndarray
    panels: tuple = ()
    gauss_order: int = 0
    refinement_level: int = 0
    breakpoints: tuple = ()
    # per node: index into ``breakpoints`` of the owning panel's anchor (-1 for
    # trapezoid meshes) and displacement p - p(anchor)
    anchor: np.ndarray = field(default=None, repr=False)
    local: np.ndarray = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def period(self) -> float:
        return self.curve.period

    def speed(self) -> np.ndarray:
        return np.abs(self.dp)

    def spacing(self) -> np.ndarray:
        """Local node spacing in arc length."""
        return self.weights * np.abs(self.dp)

    def differences(self, rows=None) -> np.ndarray:
        """Matrix ``p_i - p_j`` with corner-relative cancellation handled."""
        rows = slice(None) if rows is None else rows
        if self.kind == "trapezoid" and self.curve.chord_evaluator is not None:
            return self.curve.chord(self.nodes[rows, None], self.nodes[None, :])
        diff = self.p[rows, None] - self.p[None, :]
        if self.kind == "panel":
            same = self.anchor[rows, None] == self.anchor[None, :]
            local = self.local[rows, None] - self.local[None, :]
            diff = np.where(same, local, diff)
        return diff

    def summary(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "refinement_level": self.refinement_level,
               "period": self.period, "curve": self.curve.descriptor}
        if self.kind == "panel":
            out["gauss_order"] = self.gauss_order
            out["panels"] = [[self._panel_start(pn), self._panel_start(pn) + pn.length]
                             for pn in self.panels]
        return out

    def _panel_start(self, pn: Panel) -> float:
        return float(np.mod(self.breakpoints[pn.anchor] + pn.lo, self.period))

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)

    def write_nodes(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["t", "w", "re_p", "im_p"])
            for t, w, z in zip(self.nodes, self.weights, self.p):
                out.writerow([format(float(t), ".17g"), format(float(w), ".17g"), format(float(z.real), ".17g"), format(float(z.imag), ".17g")])


def trapezoid_mesh(curve: Curve, n: int) -> QuadratureMesh:
    """``n`` equispaced nodes with equal weights ``period / n``."""
    if curve.corners:
        raise MeshError("trapezoid rule needs a smooth curve; use panel_mesh for corners")
    if n < 4:
        raise MeshError(f"need at least 4 nodes, got {n}")
    h = curve.period / n
    t = h * np.arange(n)
    p, dp, ddp = curve.eval(t)
    return QuadratureMesh(curve, "trapezoid", t, np.full(n, h), p, dp, ddp,
                          anchor=np.full(n, -1), local=np.zeros(n, dtype=complex))


def _breakpoints(curve: Curve) -> tuple:
    corners = [float(c) for c in curve.corners]
    return tuple(sorted(set(corners) | {0.0}))


def panel_mesh(curve: Curve, base_panels_per_side: int, gauss_order: int) -> QuadratureMesh:
    """Composite Gauss-Legendre panels, each side between breakpoints cut evenly."""
    if gauss_order < 2:
        raise MeshError(f"Gauss order must be at least 2, got {gauss_order}")
    if base_panels_per_side < 1:
        raise MeshError("need at least one panel per side")
    bps = _breakpoints(curve)
    nb = len(bps)
    m = base_panels_per_side
    panels = []
    for k in range(nb):
        L = (bps[k + 1] if k + 1 < nb else curve.period) - bps[k]
        nxt = (k + 1) % nb
        for i in range(m):
            lo, hi = L * i / m, L * (i + 1) / m
            if 2 * i + 1 <= m:
                panels.append(Panel(k, lo, hi))
            else:
                panels.append(Panel(nxt, L * (i - m) / m, L * (i + 1 - m) / m))
    return _build(curve, bps, tuple(panels), gauss_order, 0)


def _side_length(bps, period, k, forward: bool) -> float:
    nb = len(bps)
    if forward:
        return (bps[k + 1] if k + 1 < nb else period) - bps[k]
    return bps[k] - (bps[k - 1] if k > 0 else bps[-1] - period)


def refine_corners(mesh: QuadratureMesh) -> QuadratureMesh:
    """Halve every panel whose closure contains a corner."""
    if mesh.kind != "panel":
        raise MeshError("corner refinement applies to panel meshes only")
    bps, period = mesh.breakpoints, mesh.period
    corner_set = {float(c) for c in mesh.curve.corners}
    nb = len(bps)
    out = []
    for pn in mesh.panels:
        k = pn.anchor
        fwd = _side_length(bps, period, k, True)
        back = _side_length(bps, period, k, False)
        touches = (bps[k] in corner_set and (pn.lo == 0 or pn.hi == 0))
        if pn.hi == fwd and bps[(k + 1) % nb] in corner_set:
            touches = True
        if pn.lo == -back and bps[(k - 1) % nb] in corner_set:
            touches = True
        if not touches:
            out.append(pn)
            continue
        mid = 0.5 * (pn.lo + pn.hi)
        for lo, hi in ((pn.lo, mid), (mid, pn.hi)):
            if hi == fwd and lo > 0:
                out.append(Panel((k + 1) % nb, lo - fwd, 0.0))
            elif lo == -back and hi < 0:
                out.append(Panel((k - 1) % nb, 0.0, hi + back))
            else:
                out.append(Panel(k, lo, hi))
    return _build(mesh.curve, bps, tuple(out), mesh.gauss_order, mesh.refinement_level + 1)


def _build(curve: Curve, bps, panels, q, level) -> QuadratureMesh:
    x, w = gauss_legendre(q)
    corner_index = {float(c): i for i, c in enumerate(curve.corners)}
    ts, ws, anchors, locs, ps, dps, ddps = [], [], [], [], [], [], []
    for pn in panels:
        half = 0.5 * pn.length
        s = pn.lo + half * (1 + x)
        b = bps[pn.anchor]
        t = np.mod(b + s, curve.period)
        if b in corner_index:
            loc, dp, ddp = curve.local_eval(corner_index[b], s)
            p = curve(b) + loc
        else:
            p, dp, ddp = curve.eval(t)
            loc = p - curve(b)
        ts.append(t)
        ws.append(half * w)
        anchors.append(np.full(q, pn.anchor))
        locs.append(loc)
        ps.append(p)
        dps.append(dp)
        ddps.append(ddp)
    t = np.concatenate(ts)
    order = np.argsort(t, kind="stable")
    panel_order = np.argsort([t_[0] for t_ in ts], kind="stable")
    cat = lambda a: np.concatenate(a)[order]  # noqa: E731
    return QuadratureMesh(curve, "panel", t[order], cat(ws), cat(ps), cat(dps), cat(ddps),
                          panels=tuple(panels[i] for i in panel_order), gauss_order=q,
                          refinement_level=level, breakpoints=tuple(bps),
                          anchor=cat(anchors), local=cat(locs))


def integrate(mesh: QuadratureMesh, f) -> complex:
    """Parameter-space quadrature ``sum_j w_j f_j``."""
    f = np.asarray(f)
    if f.shape != mesh.weights.shape:
        raise MeshError(f"expected {mesh.n} values, got shape {f.shape}")
    return complex(np.dot(mesh.weights, f))
