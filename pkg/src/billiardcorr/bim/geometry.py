"""Piecewise line/arc billiard boundaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _numbers(*values) -> str:
    # repr of a python float round-trips exactly; numpy scalars would not parse
    return " ".join(repr(float(v)) for v in values)


@dataclass(frozen=True)
class Line:
    start: tuple
    end: tuple

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    def point(self, s):
        """Point at arc-length fraction ``s`` in [0, 1]."""
        s = np.asarray(s, dtype=float)[..., None]
        p0, p1 = np.array(self.start), np.array(self.end)
        return p0 + s * (p1 - p0)

    def tangent(self, s):
        """Unit tangent at fraction ``s``."""
        d = np.array(self.end, dtype=float) - np.array(self.start, dtype=float)
        d /= np.linalg.norm(d)
        return np.broadcast_to(d, np.shape(s) + (2,)).copy()

    def curvature(self, s):
        return np.zeros(np.shape(s))

    def describe(self) -> str:
        return "line " + _numbers(*self.start, *self.end)


@dataclass(frozen=True)
class Arc:
    """Circular arc from polar angle ``theta0`` to ``theta1`` about ``center``.

    ``theta1 > theta0`` runs counterclockwise.
    """

    center: tuple
    radius: float
    theta0: float
    theta1: float

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    @property
    def start(self):
        return tuple(float(v) for v in self.point(0.0))

    @property
    def end(self):
        return tuple(float(v) for v in self.point(1.0))

    def _angle(self, s):
        return self.theta0 + np.asarray(s, dtype=float) * (self.theta1 - self.theta0)

    def point(self, s):
        th = self._angle(s)
        c = np.array(self.center, dtype=float)
        return c + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def tangent(self, s):
        th = self._angle(s)
        sgn = 1.0 if self.theta1 > self.theta0 else -1.0
        return sgn * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def curvature(self, s):
        # signed: positive when the arc turns left (ccw)
        sgn = 1.0 if self.theta1 > self.theta0 else -1.0
        return np.full(np.shape(s), sgn / self.radius)

    def describe(self) -> str:
        return "arc " + _numbers(*self.center, self.radius, self.theta0, self.theta1)


class BoundaryCurve:
    """Closed counterclockwise chain of :class:`Line` and :class:`Arc` segments."""

    def __init__(self, segments, name: str = "", params: dict | None = None):
        self.segments = tuple(segments)
        self.name = name
        self.params = dict(params or {})
        if not self.segments:
            raise ValueError("boundary needs at least one segment")
        for a, b in zip(self.segments, self.segments[1:] + self.segments[:1]):
            if math.dist(a.end, b.start) > 1e-12:
                raise ValueError("boundary segments do not form a closed chain")
        if self.signed_area() <= 0:
            raise ValueError("boundary must be oriented counterclockwise")
        if self._self_intersects():
            raise ValueError("boundary intersects itself")
        self._poly = self.polyline(4000)

    @property
    def total_length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def area(self) -> float:
        return self.signed_area()

    def signed_area(self) -> float:
        total = 0.0
        for seg in self.segments:
            if isinstance(seg, Line):
                (x0, y0), (x1, y1) = seg.start, seg.end
                total += x0 * y1 - x1 * y0
            else:
                cx, cy = seg.center
                r, t0, t1 = seg.radius, seg.theta0, seg.theta1
                total += (r * r * (t1 - t0)
                          + r * (cx * (math.sin(t1) - math.sin(t0))
                                 - cy * (math.cos(t1) - math.cos(t0))))
        return 0.5 * total

    def joint_is_corner(self, i: int, tol: float = 1e-9) -> bool:
        """Whether the tangent jumps where segment ``i`` ends."""
        a = self.segments[i]
        b = self.segments[(i + 1) % len(self.segments)]
        ta, tb = a.tangent(1.0), b.tangent(0.0)
        return float(np.linalg.norm(ta - tb)) > tol

    def polyline(self, n_total: int = 2000) -> np.ndarray:
        """Closed polygon approximating the boundary (last point omitted)."""
        pts = []
        for seg in self.segments:
            if isinstance(seg, Line):
                pts.append(np.array([seg.start]))
            else:
                m = max(8, int(n_total * seg.length / self.total_length))
                s = np.arange(m) / m
                pts.append(seg.point(s))
        return np.concatenate(pts)

    def _self_intersects(self) -> bool:
        poly = self.polyline(400)
        n = len(poly)
        a = poly
        b = np.roll(poly, -1, axis=0)
        for i in range(n):
            # skip neighbours sharing an endpoint
            j = np.arange(i + 2, n)
            if i == 0:
                j = j[j != n - 1]
            if len(j) == 0:
                continue
            if np.any(_segments_cross(a[i], b[i], a[j], b[j])):
                return True
        return False

    def contains(self, points, margin: float = 0.0):
        """Even-odd test; with ``margin > 0`` also require that distance."""
        p = np.asarray(points, dtype=float)
        flat = p.reshape(-1, 2)
        x, y = flat[:, 0:1], flat[:, 1:2]
        v0 = self._poly
        v1 = np.roll(v0, -1, axis=0)
        inside = np.zeros(len(flat), dtype=bool)
        for lo in range(0, len(v0), 512):
            a, b = v0[lo:lo + 512], v1[lo:lo + 512]
            cond = (a[:, 1] > y) != (b[:, 1] > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
            crossings = np.sum(cond & (x < xc), axis=1)
            inside ^= (crossings % 2).astype(bool)
        if margin > 0:
            inside &= self.distance(flat) >= margin
        return inside.reshape(p.shape[:-1])

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the boundary."""
        p = np.asarray(points, dtype=float)
        flat = p.reshape(-1, 2)
        best = np.full(len(flat), np.inf)
        for seg in self.segments:
            if isinstance(seg, Line):
                a, b = np.array(seg.start), np.array(seg.end)
                d = b - a
                s = np.clip(((flat - a) @ d) / (d @ d), 0.0, 1.0)
                dist = np.linalg.norm(flat - (a + s[:, None] * d), axis=1)
            else:
                c = np.array(seg.center)
                rel = flat - c
                th = np.arctan2(rel[:, 1], rel[:, 0])
                lo, hi = sorted((seg.theta0, seg.theta1))
                # bring angle into [lo, lo + 2pi)
                thw = lo + np.mod(th - lo, 2 * math.pi)
                on_arc = thw <= hi
                radial = np.abs(np.linalg.norm(rel, axis=1) - seg.radius)
                ends = np.minimum(np.linalg.norm(flat - np.array(seg.start), axis=1),
                                  np.linalg.norm(flat - np.array(seg.end), axis=1))
                dist = np.where(on_arc, radial, ends)
            best = np.minimum(best, dist)
        return best.reshape(p.shape[:-1])

    def bounding_box(self):
        poly = self.polyline(4000)
        return poly.min(axis=0), poly.max(axis=0)

    def describe(self) -> list[str]:
        """Text lines that :func:`curve_from_description` turns back into a curve."""
        lines = [f"name={self.name}"]
        lines += [f"param.{k}={_numbers(v)}" for k, v in self.params.items()]
        lines += [f"segment={s.describe()}" for s in self.segments]
        return lines

    def __repr__(self):
        return f"BoundaryCurve({self.name!r}, segments={len(self.segments)})"


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
                - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def curve_from_description(lines) -> BoundaryCurve:
    name, params, segs = "", {}, []
    for line in lines:
        key, _, value = line.strip().partition("=")
        if key == "name":
            name = value
        elif key.startswith("param."):
            params[key[6:]] = float(value)
        elif key == "segment":
            kind, *nums = value.split()
            nums = [float(v) for v in nums]
            if kind == "line":
                segs.append(Line((nums[0], nums[1]), (nums[2], nums[3])))
            elif kind == "arc":
                segs.append(Arc((nums[0], nums[1]), nums[2], nums[3], nums[4]))
            else:
                raise ValueError(f"unknown segment kind {kind!r}")
    return BoundaryCurve(segs, name, params)


def make_circle(radius: float = 1.0) -> BoundaryCurve:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return BoundaryCurve([Arc((0.0, 0.0), float(radius), 0.0, 2 * math.pi)],
                         "circle", {"radius": float(radius)})


def make_cone(diameter: float = 1.0, closure: str = "semicircle") -> BoundaryCurve:
    """60 degree wedge with apex at the origin and edges at +-30 degrees.

    ``closure="semicircle"`` (default) caps the wedge with a semicircle of the
    given diameter standing on the chord between the edge ends, so the edges
    have length ``diameter`` (an equilateral triangle plus a half disk; a
    chaotic billiard).  ``closure="sector"`` instead closes it with the arc of
    radius ``diameter / 2`` centred on the apex (a separable sector, useful as
    an exactly solvable reference with corners).
    """
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    half = math.pi / 6
    if closure == "sector":
        r = 0.5 * float(diameter)
        cap = Arc((0.0, 0.0), r, -half, half)
    elif closure == "semicircle":
        d = float(diameter)
        cx = d * math.cos(half)
        cap = Arc((cx, 0.0), 0.5 * d, -0.5 * math.pi, 0.5 * math.pi)
    else:
        raise ValueError(f"unknown cone closure {closure!r}")
    segs = [Line((0.0, 0.0), cap.start), cap, Line(cap.end, (0.0, 0.0))]
    return BoundaryCurve(segs, "cone" if closure == "semicircle" else "sector",
                         {"diameter": float(diameter)})


def make_quarter_stadium(radius: float = 0.6, straight: float = 1.2) -> BoundaryCurve:
    """Quarter stadium inside the box ``[0, straight] x [0, radius]``.

    The far corner of the box is replaced by a quarter circle of ``radius``
    centred at ``(straight - radius, 0)``.  The back wall is ``x = 0``.
    """
    if radius <= 0 or straight <= 0:
        raise ValueError("stadium dimensions must be positive")
    if straight <= radius:
        raise ValueError("straight length must exceed the radius")
    R, L = float(radius), float(straight)
    c = L - R
    segs = [
        Line((0.0, 0.0), (L, 0.0)),
        Arc((c, 0.0), R, 0.0, 0.5 * math.pi),
        Line((c, R), (0.0, R)),
        Line((0.0, R), (0.0, 0.0)),
    ]
    # the arc end is computed from trig; snap the following line start onto it
    end = segs[1].end
    segs[2] = Line(end, (0.0, R))
    return BoundaryCurve(segs, "quarter_stadium", {"radius": R, "straight": L})
