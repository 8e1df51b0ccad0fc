"""Planar geometry for a circular domain with one circular obstacle.

Points are ``Point2`` named tuples so they unpack and compare like plain
``(x, y)`` tuples. All predicates work in grid units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

GEOM_TOL = 1e-12
BOUNDARY_TOL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    def contains_closed(self, p, tol: float = 0.0) -> bool:
        return math.hypot(p[0] - self.center.x, p[1] - self.center.y) <= self.radius + tol

    def on_boundary(self, p, tol: float = BOUNDARY_TOL) -> bool:
        d = math.hypot(p[0] - self.center.x, p[1] - self.center.y)
        return abs(d - self.radius) <= tol


@dataclass(frozen=True)
class Segment:
    a: Point2
    b: Point2

    def __post_init__(self):
        a = Point2(float(self.a[0]), float(self.a[1]))
        b = Point2(float(self.b[0]), float(self.b[1]))
        if a == b:
            raise ValueError("degenerate segment: endpoints coincide")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)


@dataclass(frozen=True)
class Scene:
    """Outer observation circle and the reflecting obstacle inside it."""

    outer: Circle
    obstacle: Circle

    def __post_init__(self):
        gap = math.hypot(self.outer.center.x - self.obstacle.center.x,
                         self.outer.center.y - self.obstacle.center.y)
        if not gap + self.obstacle.radius < self.outer.radius:
            raise ValueError("obstacle must lie strictly inside the outer circle")

    def in_domain(self, p) -> bool:
        """True if ``p`` is in the closed outer disk but outside the closed obstacle."""
        return self.outer.contains_closed(p) and not self.obstacle.contains_closed(p)


def boundary_points(circle: Circle, n: int) -> list[Point2]:
    """``n`` equally spaced points on ``circle``, counterclockwise from angle 0."""
    if n < 1:
        raise ValueError(f"need at least one boundary point, got n={n}")
    theta = 2.0 * np.pi * np.arange(n) / n
    xs = circle.center.x + circle.radius * np.cos(theta)
    ys = circle.center.y + circle.radius * np.sin(theta)
    return [Point2(float(x), float(y)) for x, y in zip(xs, ys)]


def _same_point(p, q) -> bool:
    return abs(p[0] - q[0]) <= GEOM_TOL and abs(p[1] - q[1]) <= GEOM_TOL


def segment_blocked(seg: Segment, obstacle: Circle, excluded: Optional[Point2] = None) -> bool:
    """Does the open segment enter the open obstacle disk?

    Grazing contact (closest approach equal to the radius) is not a block.
    An endpoint matching ``excluded`` is treated as a point on the obstacle
    boundary; the segment is then blocked only if it heads into the disk.
    """
    cx, cy = obstacle.center
    r = obstacle.radius
    a, b = seg.a, seg.b
    if excluded is not None and _same_point(b, excluded) and not _same_point(a, excluded):
        a, b = b, a
    dx, dy = b.x - a.x, b.y - a.y
    length = math.hypot(dx, dy)

    if excluded is not None and _same_point(a, excluded):
        if length == 0.0:
            return False
        # convexity: leaving the boundary outward never re-enters the disk
        inward = (dx * (a.x - cx) + dy * (a.y - cy)) / (length * r)
        return inward < -GEOM_TOL

    len2 = dx * dx + dy * dy
    t = ((cx - a.x) * dx + (cy - a.y) * dy) / len2 if len2 > 0.0 else 0.0
    t = min(1.0, max(0.0, t))
    dist = math.hypot(a.x + t * dx - cx, a.y + t * dy - cy)
    return dist < r - GEOM_TOL


def outward_normal(obstacle: Circle, p) -> np.ndarray:
    """Unit outward normal of ``obstacle`` at boundary point ``p``."""
    if not obstacle.on_boundary(p):
        raise ValueError(f"point {tuple(p)} is not on the obstacle boundary")
    return np.array([(p[0] - obstacle.center.x) / obstacle.radius,
                     (p[1] - obstacle.center.y) / obstacle.radius])


def specular_reflect(incident, normal) -> np.ndarray:
    """Mirror ``incident`` about the surface with unit ``normal``.

    The incident direction must arrive against the normal; grazing or
    outgoing directions raise ``ValueError``.
    """
    d = np.asarray(incident, dtype=float)
    n = np.asarray(normal, dtype=float)
    if abs(np.hypot(*d) - 1.0) > GEOM_TOL or abs(np.hypot(*n) - 1.0) > GEOM_TOL:
        raise ValueError("incident and normal must be unit vectors")
    dn = float(d @ n)
    if dn >= 0.0:
        raise ValueError(f"incident direction does not arrive against the normal (d.n={dn})")
    return d - 2.0 * dn * n


def exit_point(circle: Circle, origin, direction) -> Point2:
    """Where the ray ``origin + s*direction`` (s > 0) leaves ``circle``.

    ``origin`` must be inside the closed disk and ``direction`` a unit vector.
    """
    ox, oy = origin[0] - circle.center.x, origin[1] - circle.center.y
    dx, dy = float(direction[0]), float(direction[1])
    b = ox * dx + oy * dy
    c = ox * ox + oy * oy - circle.radius ** 2
    disc = b * b - c
    if disc < 0.0:
        raise ValueError("ray does not meet the circle")
    s = -b + math.sqrt(disc)
    return Point2(origin[0] + s * dx, origin[1] + s * dy)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = float(np.hypot(*v))
    if norm == 0.0:
        raise ValueError("cannot normalise a zero vector")
    return v / norm
