from src.utils.errors import (
    ConfigError,
    FipsError,
    InvalidInputError,
    ProblemDefinitionError,
    QuadratureError,
    SolverError,
)
from src.utils.logging import get_logger, setup_logging
from src.utils.monitoring import Timing, WandbMonitor, monitor

__all__ = [
    "ConfigError",
    "FipsError",
    "InvalidInputError",
    "ProblemDefinitionError",
    "QuadratureError",
    "SolverError",
    "setup_logging",
    "get_logger",
    "Timing",
    "WandbMonitor",
    "monitor",
]
