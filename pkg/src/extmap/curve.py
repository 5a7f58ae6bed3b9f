"""Closed, positively oriented, piecewise smooth parametric curves.

A curve is a parametrization ``p: [0, period) -> C`` together with its first
two derivatives and the list of parameters where ``p'`` jumps.  Points in the
plane are complex numbers throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np


class CurveError(ValueError):
    """Invalid curve parameters or geometry."""


@dataclass(frozen=True)
class Curve:
    """Parametric closed curve.

    ``evaluator(t)`` returns ``(p, dp, ddp)`` as complex arrays.  For curves
    with corners, ``local_evaluator(k, s)`` returns ``(p - p(c_k), dp, ddp)``
    at parameter ``c_k + s`` with the displacement from corner ``k`` computed
    without cancellation; panel meshes use it for nodes very close to a corner.
    """

    period: float
    evaluator: Callable = field(repr=False, compare=False)
    corners: tuple = ()
    descriptor: dict = field(default_factory=dict)
    local_evaluator: Callable | None = field(default=None, repr=False, compare=False)
    chord_evaluator: Callable | None = field(default=None, repr=False, compare=False)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        p, dp, ddp = self.evaluator(t)
        return (np.asarray(p, dtype=complex), np.asarray(dp, dtype=complex),
                np.asarray(ddp, dtype=complex))

    def __call__(self, t):
        return self.eval(t)[0]

    @property
    def family(self) -> str:
        return self.descriptor.get("family", "custom")

    @property
    def corner_points(self) -> np.ndarray:
        return self(np.asarray(self.corners, dtype=float))

    def chord(self, t, tau):
        """``p(t) - p(tau)``, free of cancellation when the curve provides a formula."""
        t, tau = np.asarray(t, dtype=float), np.asarray(tau, dtype=float)
        if self.chord_evaluator is not None:
            return np.asarray(self.chord_evaluator(t, tau), dtype=complex)
        return self(t) - self(tau)

    def local_eval(self, k: int, s):
        s = np.asarray(s, dtype=float)
        if self.local_evaluator is not None:
            d, dp, ddp = self.local_evaluator(k, s)
            return (np.asarray(d, dtype=complex), np.asarray(dp, dtype=complex),
                    np.asarray(ddp, dtype=complex))
        c = self.corners[k]
        t = np.mod(c + s, self.period)
        p, dp, ddp = self.eval(t)
        return p - self(c), dp, ddp

    def winding_number(self, center: complex = 0.0, samples: int = 4096) -> int:
        """Winding number about ``center`` by summing discrete argument increments."""
        t = np.linspace(0.0, self.period, samples, endpoint=False)
        t = np.union1d(t, np.asarray(self.corners, dtype=float))
        z = self(t) - center
        steps = np.angle(np.roll(z, -1) / z)
        return int(round(steps.sum() / (2 * np.pi)))

    def to_json(self) -> str:
        return json.dumps(self.descriptor)


def make_circle(r: float = 1.0) -> Curve:
    if not r > 0:
        raise CurveError(f"circle radius must be positive, got {r}")
    r = float(r)

    def evaluator(t):
        e = np.exp(1j * t)
        return r * e, 1j * r * e, -r * e

    def chord(t, tau):
        return 2j * r * np.sin(0.5 * (t - tau)) * np.exp(0.5j * (t + tau))

    return Curve(2 * np.pi, evaluator, (), {"family": "circle", "r": r}, chord_evaluator=chord)


def make_ellipse(a: float) -> Curve:
    """Ellipse ``a cos t + i sin t``; ``a = 1`` is the unit circle."""
    if not a > 0:
        raise CurveError(f"ellipse semi-axis must be positive, got {a}")
    a = float(a)

    def evaluator(t):
        c, s = np.cos(t), np.sin(t)
        return a * c + 1j * s, -a * s + 1j * c, -a * c - 1j * s

    def chord(t, tau):
        m, d = 0.5 * (t + tau), np.sin(0.5 * (t - tau))
        return 2 * d * (-a * np.sin(m) + 1j * np.cos(m))

    return Curve(2 * np.pi, evaluator, (), {"family": "ellipse", "a": a}, chord_evaluator=chord)


def make_cassini(a: float) -> Curve:
    """Oval of Cassini ``|z - 1| |z + 1| = a**2`` parametrized by polar angle."""
    if not a > 1:
        raise CurveError(f"Cassini parameter must exceed 1, got {a}")
    a = float(a)
    a4 = a**4

    def evaluator(t):
        s, c = np.sin(2 * t), np.cos(2 * t)
        R = np.sqrt(a4 - s * s)
        dR = -2 * s * c / R
        ddR = -4 * (c * c - s * s) / R - 4 * s * s * c * c / R**3
        g = c + R
        dg = -2 * s + dR
        ddg = -4 * c + ddR
        r = np.sqrt(g)
        dr = dg / (2 * r)
        ddr = ddg / (2 * r) - dg * dg / (4 * r**3)
        e = np.exp(1j * t)
        return r * e, (dr + 1j * r) * e, (ddr + 2j * dr - r) * e

    def radius(t):
        R = np.sqrt(a4 - np.sin(2 * t) ** 2)
        return R, np.sqrt(np.cos(2 * t) + R)

    def chord(t, tau):
        # differences of cos 2t and R = sqrt(a^4 - sin^2 2t) rewritten as products
        Rt, rt = radius(t)
        Rs, rs = radius(tau)
        dR = -np.sin(2 * (t - tau)) * np.sin(2 * (t + tau)) / (Rt + Rs)
        dg = -2 * np.sin(t + tau) * np.sin(t - tau) + dR
        de = 2j * np.sin(0.5 * (t - tau)) * np.exp(0.5j * (t + tau))
        return dg / (rt + rs) * np.exp(1j * t) + rs * de

    return Curve(2 * np.pi, evaluator, (), {"family": "cassini", "a": a}, chord_evaluator=chord)


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return np.sign(((q - p).conjugate() * (r - p)).imag)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True

    def on_segment(p, q, r):
        return (min(p.real, q.real) <= r.real <= max(p.real, q.real)
                and min(p.imag, q.imag) <= r.imag <= max(p.imag, q.imag))

    return ((o1 == 0 and on_segment(a, b, c)) or (o2 == 0 and on_segment(a, b, d))
            or (o3 == 0 and on_segment(c, d, a)) or (o4 == 0 and on_segment(c, d, b)))


def _point_in_polygon(v: np.ndarray, z: complex) -> bool:
    inside = False
    m = len(v)
    for k in range(m):
        a, b = v[k], v[(k + 1) % m]
        if (a.imag > z.imag) != (b.imag > z.imag):
            x = a.real + (z.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if x > z.real:
                inside = not inside
    return inside


def _distance_to_boundary(v: np.ndarray, z: complex) -> float:
    a, b = v, np.roll(v, -1)
    u = np.clip(((z - a) * (b - a).conjugate()).real / np.abs(b - a) ** 2, 0.0, 1.0)
    return float(np.min(np.abs(a + u * (b - a) - z)))


def make_polygon(vertices) -> Curve:
    """Counterclockwise simple polygon parametrized by arc length.

    The parameter starts at the first vertex, so the corner parameters are
    the cumulative edge lengths.  The origin must lie strictly inside.
    """
    v = np.asarray([complex(x, y) for x, y in vertices])
    m = len(v)
    if m < 3:
        raise CurveError("polygon needs at least 3 vertices")
    edges = np.roll(v, -1) - v
    lengths = np.abs(edges)
    if np.any(lengths == 0):
        raise CurveError("polygon has repeated consecutive vertices")
    area2 = np.sum((v.conjugate() * np.roll(v, -1)).imag)
    if area2 <= 0:
        raise CurveError("polygon vertices must be in counterclockwise order")
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if _segments_cross(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                raise CurveError("polygon is self-intersecting")
    # an inward cusp reverses direction at a vertex: outward angle 0
    turn = np.angle(edges / np.roll(edges, 1))
    if np.any(np.isclose(np.abs(turn), np.pi)):
        raise CurveError("polygon has a cusp")
    if not _point_in_polygon(v, 0j):
        raise CurveError("origin must lie strictly inside the polygon")
    if _distance_to_boundary(v, 0j) == 0:
        raise CurveError("origin lies on the polygon")

    directions = edges / lengths
    starts = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    period = float(np.sum(lengths))

    def evaluator(t):
        t = np.mod(t, period)
        k = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, m - 1)
        p = v[k] + (t - starts[k]) * directions[k]
        return p, directions[k], np.zeros_like(p)

    def local_evaluator(k, s):
        # s >= 0 lies on the edge leaving vertex k, s < 0 on the edge entering it
        edge = np.where(s >= 0, k, (k - 1) % m)
        d = directions[edge]
        return s * d, d, np.zeros(np.shape(s), dtype=complex)

    descriptor = {"family": "polygon", "vertices": [[z.real, z.imag] for z in v]}
    return Curve(period, evaluator, tuple(float(x) for x in starts), descriptor, local_evaluator)


def unit_square() -> Curve:
    """Origin-centred axis-aligned square of side 1, starting at the lower right vertex."""
    return make_polygon([(0.5, -0.5), (0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5)])


_FAMILIES = {
    "circle": lambda d: make_circle(d.get("r", 1.0)),
    "ellipse": lambda d: make_ellipse(d["a"]),
    "cassini": lambda d: make_cassini(d["a"]),
    "polygon": lambda d: make_polygon(d["vertices"]),
}


def from_descriptor(descriptor: dict) -> Curve:
    family = descriptor.get("family")
    if family not in _FAMILIES:
        raise CurveError(f"unknown curve family {family!r}")
    try:
        return _FAMILIES[family](descriptor)
    except KeyError as exc:
        raise CurveError(f"missing field {exc} for {family}") from None


def load_curve(source: str) -> Curve:
    """Build a curve from inline JSON or a path to a JSON file."""
    text = source.strip()
    if not text.startswith("{"):
        path = Path(source)
        if not path.is_file():
            raise CurveError(f"no such curve file: {source}")
        text = path.read_text()
    try:
        descriptor = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveError(f"bad curve JSON: {exc}") from None
    return from_descriptor(descriptor)
