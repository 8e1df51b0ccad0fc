"""Construction of the ray list: unbroken chords and once-reflected rays.

Transmitters and receivers sit on the outer circle, candidate reflection
points on the obstacle boundary. Lambertian broken rays may join any
visible transmitter/receiver pair through a hit point; specular rays follow
the mirror law and exit wherever the reflected direction meets the outer
circle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import (
    BOUNDARY_TOL,
    Point2,
    Scene,
    Segment,
    boundary_points,
    exit_point,
    outward_normal,
    segment_blocked,
    specular_reflect,
    unit,
)


class RayGenerationError(RuntimeError):
    """Not enough admissible rays exist for the requested count."""


class RayKind(enum.Enum):
    UNBROKEN = "U"
    BROKEN = "B"


@dataclass(frozen=True)
class Ray:
    kind: RayKind
    transmitter: Point2
    receiver: Point2
    reflection: Optional[Point2] = None

    def __post_init__(self):
        if (self.kind is RayKind.BROKEN) != (self.reflection is not None):
            raise ValueError("a reflection point is required for broken rays and only for them")
        if self.transmitter == self.receiver:
            raise ValueError("transmitter and receiver coincide")

    @classmethod
    def unbroken(cls, transmitter, receiver) -> "Ray":
        return cls(RayKind.UNBROKEN, Point2(*transmitter), Point2(*receiver))

    @classmethod
    def broken(cls, transmitter, reflection, receiver) -> "Ray":
        return cls(RayKind.BROKEN, Point2(*transmitter), Point2(*receiver), Point2(*reflection))

    @property
    def is_broken(self) -> bool:
        return self.kind is RayKind.BROKEN

    def segments(self) -> list[Segment]:
        if self.reflection is None:
            return [Segment(self.transmitter, self.receiver)]
        return [Segment(self.transmitter, self.reflection), Segment(self.reflection, self.receiver)]

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments())


@dataclass(frozen=True)
class RaySetConfig:
    n_transmitters: int
    n_receivers: int
    n_hits: int
    n_b: int = 0
    n_u: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_transmitters", "n_receivers", "n_hits", "n_b", "n_u"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def scene_points(scene: Scene, config: RaySetConfig):
    """Transmitter, receiver and hit-point sets for ``config``."""
    T = boundary_points(scene.outer, config.n_transmitters) if config.n_transmitters else []
    R = boundary_points(scene.outer, config.n_receivers) if config.n_receivers else []
    H = boundary_points(scene.obstacle, config.n_hits) if config.n_hits else []
    return T, R, H


def _same(p, q) -> bool:
    return math.hypot(p[0] - q[0], p[1] - q[1]) <= BOUNDARY_TOL


def _visible_from_hits(points, hits, scene: Scene) -> np.ndarray:
    # vis[i, j]: segment points[i] -> hits[j] clear of the obstacle and on its outward side
    vis = np.zeros((len(points), len(hits)), dtype=bool)
    for j, h in enumerate(hits):
        n = outward_normal(scene.obstacle, h)
        for i, p in enumerate(points):
            if (p[0] - h[0]) * n[0] + (p[1] - h[1]) * n[1] <= 0.0:
                continue
            vis[i, j] = not segment_blocked(Segment(p, h), scene.obstacle, excluded=h)
    return vis


def _coincident(T, R) -> np.ndarray:
    same = np.zeros((len(T), len(R)), dtype=bool)
    for i, t in enumerate(T):
        for k, r in enumerate(R):
            same[i, k] = _same(t, r)
    return same


def admissible_pairs(scene: Scene, T, R) -> np.ndarray:
    """All (t, r) index pairs whose chord avoids the obstacle, shape (N, 2)."""
    out = []
    for i, t in enumerate(T):
        for k, r in enumerate(R):
            if _same(t, r):
                continue
            if not segment_blocked(Segment(t, r), scene.obstacle):
                out.append((i, k))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def admissible_triples(scene: Scene, T, R, H) -> np.ndarray:
    """All (t, r, h) index triples forming a valid Lambertian broken ray, shape (N, 3)."""
    vis_t = _visible_from_hits(T, H, scene)
    vis_r = _visible_from_hits(R, H, scene)
    same = _coincident(T, R)
    chunks = []
    for h in range(len(H)):
        ti = np.flatnonzero(vis_t[:, h])
        ri = np.flatnonzero(vis_r[:, h])
        if ti.size == 0 or ri.size == 0:
            continue
        tt, rr = np.meshgrid(ti, ri, indexing="ij")
        keep = ~same[tt, rr]
        tt, rr = tt[keep], rr[keep]
        chunks.append(np.column_stack([tt, rr, np.full(tt.size, h)]))
    if not chunks:
        return np.zeros((0, 3), dtype=np.int64)
    return np.concatenate(chunks).astype(np.int64)


def generate_unbroken(scene: Scene, config: RaySetConfig, rng: np.random.Generator) -> list[Ray]:
    """``config.n_u`` distinct obstacle-free chords, uniform without replacement."""
    if config.n_u == 0:
        return []
    T, R, _ = scene_points(scene, config)
    pairs = admissible_pairs(scene, T, R)
    if len(pairs) < config.n_u:
        raise RayGenerationError(
            f"requested {config.n_u} unbroken rays but only {len(pairs)} admissible pairs exist")
    pick = rng.choice(len(pairs), size=config.n_u, replace=False)
    return [Ray.unbroken(T[i], R[k]) for i, k in pairs[pick]]


def generate_lambertian(scene: Scene, config: RaySetConfig, rng: np.random.Generator) -> list[Ray]:
    """``config.n_b`` distinct (t, r, h) broken rays with any outgoing direction at h."""
    if config.n_b == 0:
        return []
    T, R, H = scene_points(scene, config)
    triples = admissible_triples(scene, T, R, H)
    if len(triples) < config.n_b:
        raise RayGenerationError(
            f"requested {config.n_b} Lambertian rays but only {len(triples)} admissible triples exist")
    pick = rng.choice(len(triples), size=config.n_b, replace=False)
    return [Ray.broken(T[i], H[h], R[k]) for i, k, h in triples[pick]]


def specular_receiver(scene: Scene, transmitter, hit) -> Optional[Point2]:
    """Exit point of the mirror reflection of ``transmitter -> hit``, or None if inadmissible."""
    n = outward_normal(scene.obstacle, hit)
    if (transmitter[0] - hit[0]) * n[0] + (transmitter[1] - hit[1]) * n[1] <= 0.0:
        return None
    if segment_blocked(Segment(transmitter, hit), scene.obstacle, excluded=hit):
        return None
    d = specular_reflect(unit((hit[0] - transmitter[0], hit[1] - transmitter[1])), n)
    r = exit_point(scene.outer, hit, d)
    if _same(r, transmitter):
        return None
    if segment_blocked(Segment(hit, r), scene.obstacle, excluded=hit):
        return None
    return r


def generate_specular(scene: Scene, config: RaySetConfig, rng: np.random.Generator,
                      retry_factor: int = 100) -> list[Ray]:
    """``config.n_b`` mirror-reflected rays from distinct (t, h) launches.

    Launches are drawn without replacement; at most ``retry_factor * n_b``
    are tried before giving up.
    """
    if config.n_b == 0:
        return []
    T, _, H = scene_points(scene, config)
    vis = _visible_from_hits(T, H, scene)
    launches = np.argwhere(vis)
    budget = min(len(launches), retry_factor * config.n_b)
    order = rng.permutation(len(launches))[:budget]
    out: list[Ray] = []
    for idx in order:
        i, h = launches[idx]
        r = specular_receiver(scene, T[i], H[h])
        if r is None:
            continue
        out.append(Ray.broken(T[i], H[h], r))
        if len(out) == config.n_b:
            return out
    raise RayGenerationError(
        f"found only {len(out)} of {config.n_b} specular rays after {budget} launch attempts")


def shuffle_rays(rays: Sequence[Ray], rng: np.random.Generator) -> list[Ray]:
    """Random permutation of ``rays`` (Fisher-Yates via ``rng.permutation``)."""
    return [rays[i] for i in rng.permutation(len(rays))]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def format_ray(ray: Ray) -> str:
    t, r = ray.transmitter, ray.receiver
    if ray.reflection is None:
        vals = (t.x, t.y, r.x, r.y)
    else:
        h = ray.reflection
        vals = (t.x, t.y, h.x, h.y, r.x, r.y)
    return ray.kind.value + " " + " ".join(_fmt(v) for v in vals)


def parse_ray(line: str) -> Ray:
    tok = line.split()
    if not tok:
        raise ValueError("empty ray line")
    vals = [float(v) for v in tok[1:]]
    if tok[0] == "U" and len(vals) == 4:
        return Ray.unbroken(vals[0:2], vals[2:4])
    if tok[0] == "B" and len(vals) == 6:
        return Ray.broken(vals[0:2], vals[2:4], vals[4:6])
    raise ValueError(f"malformed ray line: {line!r}")


def write_rays(path, rays: Iterable[Ray]) -> None:
    with open(path, "w", newline="\n") as fh:
        for ray in rays:
            fh.write(format_ray(ray) + "\n")


def read_rays(path) -> list[Ray]:
    text = Path(path).read_text()
    return [parse_ray(line) for line in text.splitlines() if line.strip()]
