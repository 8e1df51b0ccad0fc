"""Forward model: ray/pixel intersection rows and travel-time integration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .geometry import Point2, Scene
from .rays import Ray

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

BBOX_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Square-pixel grid; pixel ``(ix, iy)`` has flat index ``iy * nx + ix``."""

    nx: int
    ny: int
    origin: Point2 = Point2(0.0, 0.0)
    pixel: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one pixel per axis")
        if not self.pixel > 0:
            raise ValueError("pixel size must be positive")
        object.__setattr__(self, "origin", Point2(float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def covering(cls, lo, hi, nx: int, ny: int) -> "Grid":
        """Grid with ``nx`` pixels spanning x in [lo, hi]; y extent is ``ny`` pixels of the same size."""
        return cls(nx, ny, Point2(lo[0], lo[1]), (hi[0] - lo[0]) / nx)

    @property
    def n_pixels(self) -> int:
        return self.nx * self.ny

    @property
    def upper(self) -> Point2:
        return Point2(self.origin.x + self.nx * self.pixel, self.origin.y + self.ny * self.pixel)

    def contains(self, p, tol: float = BBOX_TOL) -> bool:
        hi = self.upper
        return (self.origin.x - tol <= p[0] <= hi.x + tol
                and self.origin.y - tol <= p[1] <= hi.y + tol)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat arrays of pixel-center coordinates in index order."""
        xs = self.origin.x + (np.arange(self.nx) + 0.5) * self.pixel
        ys = self.origin.y + (np.arange(self.ny) + 0.5) * self.pixel
        X, Y = np.meshgrid(xs, ys)
        return X.ravel(), Y.ravel()

    def domain_mask(self, scene: Scene) -> np.ndarray:
        """Pixels whose centers lie in the outer disk and outside the closed obstacle."""
        X, Y = self.centers()
        o, b = scene.outer, scene.obstacle
        inside = np.hypot(X - o.center.x, Y - o.center.y) <= o.radius
        blocked = np.hypot(X - b.center.x, Y - b.center.y) <= b.radius
        return inside & ~blocked

    def sample(self, f: Field) -> np.ndarray:
        X, Y = self.centers()
        return np.asarray(f(X, Y), dtype=float)

    def as_field(self, values) -> Field:
        """Piecewise-constant field taking ``values[i]`` on pixel ``i``."""
        values = np.asarray(values, dtype=float)

        def f(x, y):
            ix = np.clip(np.floor((np.asarray(x) - self.origin.x) / self.pixel).astype(int), 0, self.nx - 1)
            iy = np.clip(np.floor((np.asarray(y) - self.origin.y) / self.pixel).astype(int), 0, self.ny - 1)
            return values[iy * self.nx + ix]

        return f


@dataclass(frozen=True)
class RayRow:
    indices: np.ndarray
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.weights.tolist()))

    def dot(self, x: np.ndarray) -> float:
        return float(self.weights @ x[self.indices])

    def __len__(self) -> int:
        return self.indices.size


def _segment_pixels(grid: Grid, a, b) -> tuple[np.ndarray, np.ndarray]:
    # Siddon: parametric crossings with every grid line, one piece per pixel
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    length = math.hypot(dx, dy)
    alphas = [np.array([0.0, 1.0])]
    if dx != 0.0:
        xs = grid.origin.x + grid.pixel * np.arange(grid.nx + 1)
        alphas.append((xs - ax) / dx)
    if dy != 0.0:
        ys = grid.origin.y + grid.pixel * np.arange(grid.ny + 1)
        alphas.append((ys - ay) / dy)
    alpha = np.concatenate(alphas)
    alpha = np.unique(alpha[(alpha >= 0.0) & (alpha <= 1.0)])
    mid = 0.5 * (alpha[1:] + alpha[:-1])
    seg_len = np.diff(alpha) * length
    ix = np.floor((ax + mid * dx - grid.origin.x) / grid.pixel).astype(np.int64)
    iy = np.floor((ay + mid * dy - grid.origin.y) / grid.pixel).astype(np.int64)
    ix = np.clip(ix, 0, grid.nx - 1)
    iy = np.clip(iy, 0, grid.ny - 1)
    keep = seg_len > 0.0
    return (iy * grid.nx + ix)[keep], seg_len[keep]


def trace_row(grid: Grid, ray: Ray) -> RayRow:
    """Pixel intersection lengths of ``ray``; both legs of a broken ray are merged."""
    points = [ray.transmitter, ray.reflection, ray.receiver] if ray.is_broken else [ray.transmitter, ray.receiver]
    for p in points:
        if not grid.contains(p):
            raise ValueError(f"ray point {tuple(p)} lies outside the grid")
    idx, w = [], []
    for seg in ray.segments():
        i, l = _segment_pixels(grid, seg.a, seg.b)
        idx.append(i)
        w.append(l)
    idx = np.concatenate(idx)
    w = np.concatenate(w)
    uniq, inv = np.unique(idx, return_inverse=True)
    return RayRow(uniq, np.bincount(inv, weights=w, minlength=uniq.size))


def travel_time(f: Field, ray: Ray, step: float) -> float:
    """Composite-midpoint line integral of ``f`` along ``ray``.

    Each leg of length L uses ceil(L / step) equal sub-intervals.
    """
    if not step > 0:
        raise ValueError("quadrature step must be positive")
    total = 0.0
    for seg in ray.segments():
        length = seg.length
        n = max(1, math.ceil(length / step))
        s = (np.arange(n) + 0.5) / n
        x = seg.a.x + s * (seg.b.x - seg.a.x)
        y = seg.a.y + s * (seg.b.y - seg.a.y)
        total += float(np.sum(f(x, y))) * (length / n)
    return total


@dataclass
class TravelTimeSystem:
    """Sparse rows and right-hand side of the ray linear system."""

    rows: list[RayRow]
    rhs: np.ndarray
    n_pixels: int
    dropped: int = 0

    def __post_init__(self):
        self.rhs = np.asarray(self.rhs, dtype=float)
        if len(self.rows) != self.rhs.size:
            raise ValueError("row count and right-hand side length differ")
        if any(len(r) == 0 for r in self.rows):
            raise ValueError("system rows must be nonempty")

    def __len__(self) -> int:
        return len(self.rows)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        m = len(self.rows)
        if m == 0:
            return sp.csr_matrix((0, self.n_pixels))
        indptr = np.zeros(m + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in self.rows])
        indices = np.concatenate([r.indices for r in self.rows])
        data = np.concatenate([r.weights for r in self.rows])
        return sp.csr_matrix((data, indices, indptr), shape=(m, self.n_pixels))


def assemble_system(grid: Grid, rays: Sequence[Ray], times: Sequence[float]) -> TravelTimeSystem:
    """Rows in ray order; rays that cross no pixel are dropped with their time."""
    if len(rays) != len(times):
        raise ValueError(f"{len(rays)} rays but {len(times)} travel times")
    rows, rhs = [], []
    dropped = 0
    for ray, t in zip(rays, times):
        row = trace_row(grid, ray)
        if len(row) == 0:
            dropped += 1
            continue
        rows.append(row)
        rhs.append(t)
    return TravelTimeSystem(rows, np.array(rhs, dtype=float), grid.n_pixels, dropped)


def synthesize_times(f: Field, rays: Sequence[Ray], step: float) -> np.ndarray:
    return np.array([travel_time(f, ray, step) for ray in rays])


def write_times(path, times) -> None:
    with open(path, "w", newline="\n") as fh:
        for t in times:
            fh.write(f"{float(t):.17g}\n")


def read_times(path) -> np.ndarray:
    return np.loadtxt(path, dtype=float, ndmin=1)
