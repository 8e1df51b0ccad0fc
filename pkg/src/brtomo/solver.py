"""Kaczmarz (ART) iteration for the sparse travel-time system."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .forward import Grid, RayRow, TravelTimeSystem

__all__ = [
    "ReconResult",
    "SolverConfig",
    "TravelTimeSystem",
    "kaczmarz_solve",
    "kaczmarz_step",
    "read_grid",
    "rms_residual",
    "write_grid",
]


@dataclass(frozen=True)
class SolverConfig:
    """Kaczmarz hyperparameters.

    One projection is a single row update. With ``relative_tol`` the stop
    threshold is ``residual_tol * RMS(rhs)``; ``check_every=None`` means one
    residual evaluation per full sweep.
    """

    relaxation: float = 1.0
    max_projections: int = 1_000_000
    residual_tol: float = 1e-6
    relative_tol: bool = True
    check_every: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.relaxation <= 2.0:
            raise ValueError(f"relaxation must lie in (0, 2], got {self.relaxation}")
        if self.max_projections < 0:
            raise ValueError("max_projections must be non-negative")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be non-negative")
        if self.check_every is not None and self.check_every < 1:
            raise ValueError("check_every must be positive")


@dataclass
class ReconResult:
    f_hat: np.ndarray
    projections_done: int
    residual_history: list[tuple[int, float]] = field(default_factory=list)
    converged: bool = False


def kaczmarz_step(x: np.ndarray, row: RayRow, b: float, relaxation: float = 1.0) -> np.ndarray:
    """Project ``x`` towards the hyperplane ``<row, x> = b``; returns a new array."""
    norm2 = float(row.weights @ row.weights)
    if norm2 == 0.0:
        raise ValueError("cannot project onto a zero row")
    out = np.array(x, dtype=float, copy=True)
    out[row.indices] += relaxation * (b - row.dot(out)) / norm2 * row.weights
    return out


@numba.njit(cache=True)
def _project(indptr, indices, data, norms2, rhs, x, start, count, lam):
    m = rhs.size
    i = start
    for _ in range(count):
        lo = indptr[i]
        hi = indptr[i + 1]
        acc = 0.0
        for k in range(lo, hi):
            acc += data[k] * x[indices[k]]
        c = lam * (rhs[i] - acc) / norms2[i]
        for k in range(lo, hi):
            x[indices[k]] += c * data[k]
        i += 1
        if i == m:
            i = 0
    return i


def rms_residual(system: TravelTimeSystem, x: np.ndarray) -> float:
    r = system.matrix @ x - system.rhs
    return float(np.sqrt(np.mean(r * r)))


def kaczmarz_solve(system: TravelTimeSystem, config: SolverConfig = SolverConfig(),
                   initial: Optional[np.ndarray] = None) -> ReconResult:
    """Cyclic Kaczmarz sweeps in stored row order until the RMS residual
    drops below tolerance or the projection budget runs out."""
    m = len(system)
    if m == 0:
        raise ValueError("cannot solve an empty system")
    x = np.zeros(system.n_pixels) if initial is None else np.array(initial, dtype=float, copy=True)
    A = system.matrix
    indptr = A.indptr.astype(np.int64)
    indices = A.indices.astype(np.int64)
    data = A.data.astype(np.float64)
    norms2 = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    if np.any(norms2 == 0.0):
        raise ValueError("system contains a zero-norm row")
    rhs = system.rhs.astype(np.float64)

    tol = config.residual_tol
    if config.relative_tol:
        tol *= float(np.sqrt(np.mean(rhs * rhs)))
    every = config.check_every or m

    done = 0
    row = 0
    history: list[tuple[int, float]] = []
    converged = False
    while done < config.max_projections:
        chunk = min(every, config.max_projections - done)
        row = _project(indptr, indices, data, norms2, rhs, x, row, chunk, config.relaxation)
        done += chunk
        res = rms_residual(system, x)
        history.append((done, res))
        if res <= tol:
            converged = True
            break
    return ReconResult(x, done, history, converged)


def write_grid(path, grid: Grid, values) -> None:
    """Text grid dump: header line, then ``ny`` rows of ``nx`` values, bottom row first."""
    v = np.asarray(values, dtype=float).reshape(grid.ny, grid.nx)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{grid.nx} {grid.ny} {grid.origin.x:.17g} {grid.origin.y:.17g} {grid.pixel:.17g}\n")
        for line in v:
            fh.write(" ".join(f"{val:.17g}" for val in line) + "\n")


def read_grid(path) -> tuple[Grid, np.ndarray]:
    with open(path) as fh:
        head = fh.readline().split()
        nx, ny = int(head[0]), int(head[1])
        grid = Grid(nx, ny, (float(head[2]), float(head[3])), float(head[4]))
        values = np.loadtxt(fh, dtype=float, ndmin=2)
    if values.shape != (ny, nx):
        raise ValueError(f"grid body has shape {values.shape}, header says {(ny, nx)}")
    return grid, values.ravel()
