import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.analysis.functions import AnalyticTestFunction
from src.config import settings
from src.spectral.grid import EquispacedGrid, make_grid
from src.spectral.integration import build_square_fim
from src.utils.errors import InvalidInputError, QuadratureError
from src.utils.logging import get_logger
from src.utils.monitoring import monitor

logger = get_logger(__name__)


class ConvergenceRow(BaseModel):
    N: int
    inf_error: float = Field(..., ge=0.0)
    euclid_error: float = Field(..., ge=0.0)
    bound: Optional[float] = None


class ConvergenceReport(BaseModel):
    """Measured quadrature errors per N, with the analytic bound when it exists."""

    function_id: str
    N_values: list[int]
    inf_errors: list[float]
    euclid_errors: list[float]
    bound_values: Optional[list[float]] = None

    @model_validator(mode="after")
    def _check_lengths(self) -> "ConvergenceReport":
        size = len(self.N_values)
        columns = [self.inf_errors, self.euclid_errors]
        if self.bound_values is not None:
            columns.append(self.bound_values)
        if any(len(column) != size for column in columns):
            raise ValueError("Convergence report columns must share one length")
        if any(value < 0.0 for value in self.inf_errors + self.euclid_errors):
            raise ValueError("Error norms must be nonnegative")
        return self

    @property
    def rows(self) -> list[ConvergenceRow]:
        bounds = self.bound_values or [None] * len(self.N_values)
        return [
            ConvergenceRow(N=n, inf_error=inf, euclid_error=euclid, bound=bound)
            for n, inf, euclid, bound in zip(
                self.N_values, self.inf_errors, self.euclid_errors, bounds
            )
        ]


def mu_factor(T: float, beta: float) -> float:
    """mu_{T,beta} = sqrt(2T (sqrt(coth w) + coth w)) with w = 2*pi*beta/T.

    Tends to 2*sqrt(T) as beta grows and decreases monotonically in beta.
    """
    if not T > 0.0 or not beta > 0.0:
        raise InvalidInputError(
            f"T and beta must be positive, got T={T}, beta={beta}", {"T": T, "beta": beta}
        )
    omega = 2.0 * math.pi * beta / T
    coth = 1.0 / math.tanh(omega)
    return math.sqrt(2.0 * T * (math.sqrt(coth) + coth))


def fpsq_error_bound(
    f: AnalyticTestFunction, N: int, grid: Optional[EquispacedGrid] = None
) -> float:
    """Upper bound on the Euclidean error of the square-FIM quadrature at the nodes.

    Args:
        f: Test function with finite strip half-width and known sup-norm
        N: Even node count
        grid: Optional prebuilt grid (must match N and f.T)

    Returns:
        mu_{T,beta} * ||f||_strip * exp(-pi*N*beta/T) * ||sqrt(t)||_2
    """
    if f.is_entire:
        raise QuadratureError(
            f"Bound degenerates to 0 for {f.id}: beta is infinite, the quadrature is exact "
            "up to roundoff",
            {"function_id": f.id},
        )
    if f.sup_norm_on_strip is None:
        raise QuadratureError(f"No strip sup-norm known for {f.id}", {"function_id": f.id})
    grid = grid or make_grid(N, f.T)
    if grid.N != N or not math.isclose(grid.T, f.T):
        raise InvalidInputError(
            f"Grid (N={grid.N}, T={grid.T}) does not match N={N}, T={f.T}",
            {"N": N, "grid_N": grid.N, "T": f.T, "grid_T": grid.T},
        )

    decay = math.exp(-math.pi * N * f.beta / f.T)
    node_norm = float(np.linalg.norm(np.sqrt(grid.nodes)))
    return mu_factor(f.T, f.beta) * f.sup_norm_on_strip * decay * node_norm


def quadrature_errors(f: AnalyticTestFunction, N: int) -> tuple[float, float]:
    """Infinity and Euclidean norms of the nodal cumulative-integral error."""
    grid = make_grid(N, f.T)
    fim = build_square_fim(grid)
    approx = fim.apply(f(grid.nodes))
    error = approx - f.exact_cumulative(grid.nodes)
    return float(np.max(np.abs(error))), float(np.linalg.norm(error))


def run_convergence_study(
    f: AnalyticTestFunction, N_list: Sequence[int], threads: Optional[int] = None
) -> ConvergenceReport:
    """Measure quadrature errors for every N and pair them with the analytic bound.

    Args:
        f: Test function
        N_list: Even node counts
        threads: Worker count; defaults to ``settings.effective_threads``

    Returns:
        ConvergenceReport in the order of ``N_list``
    """
    N_values = [int(n) for n in N_list]
    if not N_values:
        raise InvalidInputError("N_list must not be empty")
    for n in N_values:
        make_grid(n, f.T)

    workers = max(1, min(threads or settings.effective_threads, len(N_values)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        errors = list(pool.map(lambda n: quadrature_errors(f, n), N_values))

    inf_errors = [e[0] for e in errors]
    euclid_errors = [e[1] for e in errors]
    bounds = None if f.is_entire else [fpsq_error_bound(f, n) for n in N_values]

    for n, inf_error, euclid_error in zip(N_values, inf_errors, euclid_errors):
        monitor.log_convergence_row(f.id, n, inf_error, euclid_error)

    logger.info(
        f"Convergence study {f.id}: N={N_values[0]}..{N_values[-1]}, "
        f"final inf error {inf_errors[-1]:.3e}"
    )
    return ConvergenceReport(
        function_id=f.id,
        N_values=N_values,
        inf_errors=inf_errors,
        euclid_errors=euclid_errors,
        bound_values=bounds,
    )
