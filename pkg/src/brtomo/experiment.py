"""Matched-budget comparison of ART, specular and Lambertian broken-ray tomography."""

from __future__ import annotations

import dataclasses
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .forward import Grid, assemble_system, synthesize_times, write_times
from .geometry import Circle, Point2, Scene
from .phantom import Phantom, recon_error
from .rays import (
    RayGenerationError,
    RaySetConfig,
    generate_lambertian,
    generate_specular,
    generate_unbroken,
    shuffle_rays,
    write_rays,
)
from .solver import SolverConfig, kaczmarz_solve, write_grid

log = logging.getLogger(__name__)

MODES = ("art", "brt_specular", "brt_lambertian")
SUMMARY_HEADER = "mode,trial,error,projections,wall_ms"


class ExperimentError(RuntimeError):
    """A trial failed; the message names the mode and trial."""


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "brt_lambertian"
    outer_center: tuple = (0.5, 0.5)
    outer_radius: float = 0.5
    obstacle_center: tuple = (0.5, 0.5)
    obstacle_radius: float = 0.125
    nx: int = 64
    ny: int = 64
    grid_origin: tuple = (0.0, 0.0)
    grid_width: float = 1.0
    total_rays: int = 12000
    broken_fraction: float = 0.5
    n_transmitters: int = 180
    n_receivers: int = 180
    n_hits: int = 180
    relaxation: float = 1.0
    # the pixel basis cannot fit quadrature data exactly; residual floors sit near 1.2e-3 (BRT) and 1.65e-3 (ART)
    residual_tol: float = 1.25e-3
    max_projections: int = 2_400_000
    check_every: Optional[int] = None
    K: float = 1e-3
    phantom_center: Optional[tuple] = None
    quad_step: Optional[float] = None
    seed: int = 0
    trials: int = 10

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.total_rays < 1:
            raise ValueError("total_rays must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0.0 <= self.broken_fraction <= 1.0:
            raise ValueError("broken_fraction must lie in [0, 1]")

    @property
    def scene(self) -> Scene:
        return Scene(Circle(self.outer_center, self.outer_radius),
                     Circle(self.obstacle_center, self.obstacle_radius))

    @property
    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.grid_origin, self.grid_width / self.nx)

    @property
    def phantom(self) -> Phantom:
        if self.phantom_center is not None:
            center = self.phantom_center
        else:
            g = self.grid
            center = (g.origin.x + 0.5 * g.nx * g.pixel, g.origin.y + 0.5 * g.ny * g.pixel)
        return Phantom(self.K, Point2(*center))

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(self.relaxation, self.max_projections, self.residual_tol,
                            True, self.check_every)

    @property
    def step(self) -> float:
        return self.quad_step if self.quad_step is not None else self.grid.pixel / 10.0

    def ray_counts(self) -> tuple[int, int]:
        """(broken, unbroken) ray counts for this mode."""
        if self.mode == "art":
            return 0, self.total_rays
        n_b = int(round(self.broken_fraction * self.total_rays))
        return n_b, self.total_rays - n_b

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        clean = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**clean)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        """Read a JSON object or ``key = value`` lines (values parsed as JSON when possible)."""
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            return cls.from_dict(json.loads(text))
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                data[key] = json.loads(value)
            except json.JSONDecodeError:
                data[key] = value
        return cls.from_dict(data)


@dataclass
class TrialReport:
    mode: str
    trial: int
    seed: int
    error: float
    projections: int
    wall_ms: float
    converged: bool = False
    dropped: int = 0


@dataclass
class TrialArtifacts:
    rays: list
    times: np.ndarray
    f_hat: np.ndarray


def build_rays(config: ExperimentConfig, rng: np.random.Generator) -> list:
    """Broken rays for the mode, then unbroken ones, shuffled once."""
    n_b, n_u = config.ray_counts()
    rs = RaySetConfig(config.n_transmitters, config.n_receivers, config.n_hits, n_b, n_u)
    scene = config.scene
    if config.mode == "brt_lambertian":
        broken = generate_lambertian(scene, rs, rng)
    elif config.mode == "brt_specular":
        broken = generate_specular(scene, rs, rng)
    else:
        broken = []
    rays = broken + generate_unbroken(scene, rs, rng)
    return shuffle_rays(rays, rng)


def run_trial(config: ExperimentConfig, trial_seed: int, trial: int = 0,
              keep: bool = False):
    """One end-to-end reconstruction. With ``keep`` also returns the rays,
    times and reconstruction."""
    start = time.perf_counter()
    try:
        rng = np.random.default_rng(trial_seed)
        rays = build_rays(config, rng)
        grid = config.grid
        phantom = config.phantom
        times = synthesize_times(phantom, rays, config.step)
        system = assemble_system(grid, rays, times)
        result = kaczmarz_solve(system, config.solver)
        error = recon_error(result.f_hat, phantom, grid, grid.domain_mask(config.scene))
    except (RayGenerationError, ValueError) as exc:
        raise ExperimentError(f"mode {config.mode}, trial {trial} (seed {trial_seed}): {exc}") from exc
    wall_ms = (time.perf_counter() - start) * 1e3
    report = TrialReport(config.mode, trial, trial_seed, error, result.projections_done,
                         wall_ms, result.converged, system.dropped)
    log.info("%s trial %d: error %.6e after %d projections (%s)", config.mode, trial, error,
             result.projections_done, "converged" if result.converged else "budget exhausted")
    if keep:
        return report, TrialArtifacts(rays, times, result.f_hat)
    return report


@dataclass
class Summary:
    reports: list[TrialReport] = field(default_factory=list)

    def modes(self) -> list[str]:
        seen = []
        for r in self.reports:
            if r.mode not in seen:
                seen.append(r.mode)
        return seen

    def for_mode(self, mode: str) -> list[TrialReport]:
        return [r for r in self.reports if r.mode == mode]

    def mean_error(self, mode: str) -> float:
        return float(np.mean([r.error for r in self.for_mode(mode)]))

    def mean_projections(self, mode: str) -> float:
        return float(np.mean([r.projections for r in self.for_mode(mode)]))

    def mean_wall_ms(self, mode: str) -> float:
        return float(np.mean([r.wall_ms for r in self.for_mode(mode)]))

    def to_csv(self) -> str:
        """One row per trial (1-based trial numbers) and an ``average`` row per mode."""
        buf = io.StringIO()
        buf.write(SUMMARY_HEADER + "\n")
        for mode in self.modes():
            for r in self.for_mode(mode):
                buf.write(f"{mode},{r.trial + 1},{r.error:.17g},{r.projections},{r.wall_ms:.3f}\n")
            buf.write(f"{mode},average,{self.mean_error(mode):.17g},"
                      f"{self.mean_projections(mode):.17g},{self.mean_wall_ms(mode):.3f}\n")
        return buf.getvalue()

    def table(self) -> str:
        """Side-by-side error/iteration table, one line per trial plus averages."""
        modes = self.modes()
        head = ["Experiment"]
        for m in modes:
            head += [f"{m} Error", f"{m} Iterations"]
        lines = [", ".join(head)]
        n = max(len(self.for_mode(m)) for m in modes)
        for i in range(n):
            cells = [str(i + 1)]
            for m in modes:
                rows = self.for_mode(m)
                if i < len(rows):
                    cells += [f"{rows[i].error:.6e}", str(rows[i].projections)]
                else:
                    cells += ["", ""]
            lines.append(", ".join(cells))
        cells = ["Average"]
        for m in modes:
            cells += [f"{self.mean_error(m):.6e}", f"{self.mean_projections(m):.0f}"]
        lines.append(", ".join(cells))
        return "\n".join(lines) + "\n"


def _write_trial_files(out_dir: Path, config: ExperimentConfig, report: TrialReport,
                       art: TrialArtifacts) -> None:
    tag = f"{report.mode}_{report.trial + 1}"
    write_rays(out_dir / f"rays_{tag}.txt", art.rays)
    write_times(out_dir / f"times_{tag}.txt", art.times)
    write_grid(out_dir / f"recon_{tag}.grid", config.grid, art.f_hat)


def run_comparison(config: ExperimentConfig, modes: Sequence[str] = MODES,
                   out_dir=None) -> Summary:
    """Run ``config.trials`` trials per mode with seeds ``seed + trial``.

    Every mode uses the same ray budget. With ``out_dir`` the summary CSV,
    ray lists, travel times and reconstructions are written there.
    """
    if not modes:
        raise ValueError("no modes requested")
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    summary = Summary()
    for mode in modes:
        cfg = config.replace(mode=mode)
        for trial in range(cfg.trials):
            report, art = run_trial(cfg, cfg.seed + trial, trial, keep=True)
            summary.reports.append(report)
            if out_dir is not None:
                _write_trial_files(out_dir, cfg, report, art)
    if out_dir is not None:
        (out_dir / "summary.csv").write_text(summary.to_csv())
        (out_dir / "table.txt").write_text(summary.table())
    return summary
