"""Relativistic velocity-space diffusion: samplers, solvers and oracles.

Subpackages map to one concern each: geometry (hyperboloid metric, frames,
charts, operators), langevin (stochastic integrators), analytic (closed-form
oracles), fokker_planck (radial Crank-Nicolson solver), lorentz (boosts and
invariance checks), ensemble (statistics), rng (counter-based noise), cli
(experiment runner).
"""

from . import analytic, ensemble, fokker_planck, geometry, langevin, lorentz, rng
from .errors import (
    ConfigError,
    DegenerateFrameError,
    DomainError,
    EmptySampleError,
    InvalidInputError,
    NumericBlowupError,
    RelDiffError,
    UnsupportedModeError,
)

__all__ = [
    "analytic",
    "ensemble",
    "fokker_planck",
    "geometry",
    "langevin",
    "lorentz",
    "rng",
    "ConfigError",
    "DegenerateFrameError",
    "DomainError",
    "EmptySampleError",
    "InvalidInputError",
    "NumericBlowupError",
    "RelDiffError",
    "UnsupportedModeError",
]

__version__ = "0.1.0"
