"""Travel-time tomography in a disk with one reflecting circular obstacle."""

from .experiment import ExperimentConfig, run_comparison, run_trial
from .forward import Grid, RayRow, TravelTimeSystem, assemble_system, trace_row, travel_time
from .geometry import Circle, Point2, Scene, Segment, boundary_points, outward_normal, segment_blocked, specular_reflect
from .phantom import Phantom, SpeedModel, eval_phantom, phantom_to_speed, recon_error, slowness_to_speed
from .rays import Ray, RayKind, RaySetConfig, generate_lambertian, generate_specular, generate_unbroken, shuffle_rays
from .solver import ReconResult, SolverConfig, kaczmarz_solve, kaczmarz_step

__version__ = "0.1.0"

__all__ = [
    "Circle", "ExperimentConfig", "Grid", "Phantom", "Point2", "Ray", "RayKind", "RayRow",
    "RaySetConfig", "ReconResult", "Scene", "Segment", "SolverConfig", "SpeedModel",
    "TravelTimeSystem", "assemble_system", "boundary_points", "eval_phantom",
    "generate_lambertian", "generate_specular", "generate_unbroken", "kaczmarz_solve",
    "kaczmarz_step", "outward_normal", "phantom_to_speed", "recon_error", "run_comparison",
    "run_trial", "segment_blocked", "shuffle_rays", "slowness_to_speed", "specular_reflect",
    "trace_row", "travel_time",
]
