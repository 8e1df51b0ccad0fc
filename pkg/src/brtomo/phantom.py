"""Radial test phantom, speed-model conversion and reconstruction error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .forward import Field, Grid
from .geometry import Point2, Scene


@dataclass(frozen=True)
class Phantom:
    """Cone-shaped slowness field ``K * |p - center|``."""

    K: float = 1e-3
    center: Point2 = Point2(0.5, 0.5)

    def __post_init__(self):
        if not math.isfinite(self.K):
            raise ValueError("phantom amplitude must be finite")
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))

    def __call__(self, x, y):
        return self.K * np.hypot(np.asarray(x) - self.center.x, np.asarray(y) - self.center.y)


def eval_phantom(phantom: Phantom, p) -> float:
    return phantom.K * math.hypot(p[0] - phantom.center.x, p[1] - phantom.center.y)


@dataclass(frozen=True)
class SpeedModel:
    """Sound speed ``c_o + epsilon(x)``; the tomographic unknown is its reciprocal."""

    c_o: float
    epsilon: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __post_init__(self):
        if not self.c_o > 0:
            raise ValueError("background speed must be positive")

    def speed(self, x, y):
        return self.c_o + self.epsilon(x, y)

    def slowness(self, x, y):
        return 1.0 / self.speed(x, y)


def slowness_to_speed(f: Field, c_o: float) -> SpeedModel:
    """Speed model with ``1 / (c_o + epsilon) == f`` wherever ``f`` is nonzero."""

    def epsilon(x, y):
        return 1.0 / f(x, y) - c_o

    return SpeedModel(c_o, epsilon)


def phantom_to_speed(phantom: Phantom, c_o: float, scene: Scene) -> SpeedModel:
    """Speed perturbation whose slowness reproduces ``phantom`` on the domain.

    The phantom must be strictly positive there, i.e. its center (the only
    zero) has to lie inside the obstacle or outside the outer circle.
    """
    if phantom.K <= 0:
        raise ValueError("phantom must be positive on the domain (K > 0 required)")
    if scene.in_domain(phantom.center):
        raise ValueError("phantom vanishes at its center, which lies inside the domain")
    return slowness_to_speed(phantom, c_o)


def recon_error(f_hat, phantom: Field, grid: Grid, mask) -> float:
    """Mean squared error against ``phantom`` at the centers of masked pixels."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("error mask selects no pixels")
    truth = grid.sample(phantom)
    diff = np.asarray(f_hat, dtype=float)[mask] - truth[mask]
    return float(np.mean(diff * diff))
