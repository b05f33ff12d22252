"""Simulation and design toolkit for birefringent-fiber heralded single-photon sources."""

__version__ = "0.1.0"

from .dispersion import FUSED_SILICA, Axis, BirefringentFiber, SellmeierModel  # noqa: E402
from .jsa import Arm, SpectralFilter, build_jsa, default_grid, heralded_density_matrix, schmidt  # noqa: E402
from .phasematch import PumpEnvelope, PumpShape, calibrate_delta_n, solve_central  # noqa: E402

__all__ = [
    "FUSED_SILICA",
    "Arm",
    "Axis",
    "BirefringentFiber",
    "PumpEnvelope",
    "PumpShape",
    "SellmeierModel",
    "SpectralFilter",
    "build_jsa",
    "calibrate_delta_n",
    "default_grid",
    "heralded_density_matrix",
    "schmidt",
    "solve_central",
]
