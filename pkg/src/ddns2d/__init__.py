"""Pseudo-spectral simulation and long-time statistics of the damped,
driven 2D vorticity equation on a periodic torus."""

from .grid import (
    FieldError,
    GridSpec,
    PhysicalScalarField,
    SpectralScalarField,
    VectorField,
)
from .dynamics import BlowUpError, ForcingSpec, SolverParams, TrajectoryState
from .experiments import ConfigError, ExperimentConfig

__all__ = [
    "FieldError",
    "GridSpec",
    "PhysicalScalarField",
    "SpectralScalarField",
    "VectorField",
    "BlowUpError",
    "ForcingSpec",
    "SolverParams",
    "TrajectoryState",
    "ConfigError",
    "ExperimentConfig",
]

__version__ = "0.1.0"
