from pathlib import Path
from typing import Literal, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.utils.errors import ConfigError, SolverError


class SolverConfig(BaseModel):
    """Augmented Lagrangian settings.

    Feasibility tolerances are in unscaled problem units. The step and objective
    rules compare successive outer iterates in the scaled variables and scaled
    objective the solver iterates on.
    """

    model_config = ConfigDict(extra="forbid")

    # Outer loop
    max_outer_iters: int = Field(100, ge=1)
    eq_tolerance: float = Field(1e-9, gt=0.0, description="On ||h||_inf")
    ineq_tolerance: float = Field(1e-9, gt=0.0, description="On max positive violation")
    step_tolerance: float = Field(1e-15, gt=0.0, description="On ||y_k+1 - y_k||_2, y = z / scale")
    objective_tolerance: float = Field(
        1e-15, gt=0.0, description="On |J_k+1 - J_k| / max(1, |J_0|)"
    )
    initial_penalty: float = Field(10.0, gt=0.0)
    penalty_growth: float = Field(10.0, gt=1.0)
    penalty_max: float = Field(1e12, gt=0.0)
    infeasibility_reduction: float = Field(0.25, gt=0.0, lt=1.0)

    # Inner L-BFGS-B solves
    max_inner_iters: int = Field(500, ge=1)
    memory: int = Field(10, ge=1)
    inner_tolerance: float = Field(1e-4, gt=0.0)
    inner_tolerance_decay: float = Field(0.1, gt=0.0, le=1.0)
    inner_tolerance_min: float = Field(1e-12, gt=0.0)

    # Gauss-Newton projection onto the constraints after each outer iteration
    feasibility_polish: bool = True
    polish_max_iters: int = Field(10, ge=0)

    initial_guess: Union[Literal["ones"], list[float]] = "ones"

    # Multi-start
    multistart_restarts: int = Field(0, ge=0)
    perturbation_amplitude: float = Field(1.0, gt=0.0)
    seed: int = 0


def resolve_initial_guess(config: SolverConfig, num_vars: int) -> np.ndarray:
    """Expand ``initial_guess`` to a vector of length ``num_vars``."""
    if config.initial_guess == "ones":
        return np.ones(num_vars)
    guess = np.asarray(config.initial_guess, dtype=float)
    if guess.shape != (num_vars,):
        raise SolverError(
            f"Initial guess has length {guess.size}, expected {num_vars}",
            {"expected": num_vars, "actual": int(guess.size)},
        )
    return guess


def load_solver_config(path: str | Path) -> SolverConfig:
    """Read a flat key=value file (dotenv syntax) into a validated SolverConfig.

    Args:
        path: Config file; keys are SolverConfig field names, case-insensitive

    Returns:
        SolverConfig with file values over the defaults
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Solver config not found: {path}", {"path": str(path)})

    raw = dotenv_values(path)
    values: dict[str, object] = {}
    for key, value in raw.items():
        if value is None:
            raise ConfigError(f"Config key {key!r} has no value", {"path": str(path)})
        key = key.strip().lower()
        if key == "initial_guess" and value.strip().lower() != "ones":
            try:
                values[key] = [float(v) for v in value.replace(" ", "").split(",") if v]
            except ValueError as e:
                raise ConfigError(f"initial_guess must be 'ones' or numbers: {e}") from e
        else:
            values[key] = value.strip()

    try:
        return SolverConfig(**values)
    except ValidationError as e:
        raise ConfigError(
            f"Invalid solver config {path}: {e.error_count()} error(s)",
            {"path": str(path), "errors": e.errors(include_url=False)},
        ) from e
