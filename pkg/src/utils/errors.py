from typing import Optional


class FipsError(Exception):
    """Base exception for periodic optimal control errors."""

    def __init__(self, code: str, message: str, details: Optional[dict] = None):
        self.code = code
        self.message = message
        self.details = details or {}
        super().__init__(f"[{code}] {message}")


class InvalidInputError(FipsError):
    """E001: Argument validation failed (parity, period, shapes, ranges)."""

    def __init__(self, message: str = "Invalid input", details: Optional[dict] = None):
        super().__init__("E001", message, details)


class QuadratureError(FipsError):
    """E002: Quadrature construction or error bound is not usable."""

    def __init__(self, message: str = "Quadrature failed", details: Optional[dict] = None):
        super().__init__("E002", message, details)


class ProblemDefinitionError(FipsError):
    """E003: Optimal control problem failed validation."""

    def __init__(
        self, message: str = "Problem validation failed", details: Optional[dict] = None
    ):
        super().__init__("E003", message, details)


class SolverError(FipsError):
    """E004: NLP cannot be solved from the given starting point."""

    def __init__(self, message: str = "Solver failed", details: Optional[dict] = None):
        super().__init__("E004", message, details)


class ConfigError(FipsError):
    """E005: Solver configuration could not be loaded."""

    def __init__(self, message: str = "Invalid configuration", details: Optional[dict] = None):
        super().__init__("E005", message, details)
