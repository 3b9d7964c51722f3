"""Simulation toolkit for the time-modulated, driven, damped Kerr oscillator."""

from .errors import KerrmodError
from .model import OscillatorParams
from .qsd import EnsembleStats, TrajectoryConfig, run_ensemble, run_trajectory

__version__ = "0.1.0"

__all__ = [
    "KerrmodError",
    "OscillatorParams",
    "TrajectoryConfig",
    "EnsembleStats",
    "run_ensemble",
    "run_trajectory",
    "__version__",
]
