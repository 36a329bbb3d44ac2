"""Unit commitment with deliverable flexible ramping capability (FRC)."""

from .requirements import FrcRequirements, compute_alpha, compute_requirements
from .system import (
    BoundaryCondition,
    Generator,
    NetLoadForecast,
    StudyConfig,
    load_system,
    net_load,
    validate_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "FrcRequirements", "Generator", "NetLoadForecast", "StudyConfig",
    "compute_alpha", "compute_requirements", "load_system", "net_load", "validate_trajectory",
]
