"""Transcription of a periodic optimal control problem into a dense NLP.

Decision vector layout (component-major): z = [x_1 at all nodes, ..., x_n at all
nodes, u_1 at all nodes, ..., u_m at all nodes]. The equality block stacks the
collocated integral dynamics x(t_l) - x(0) - (Theta F)_l component-major,
optionally followed by the n periodicity rows Theta_N F. Path inequalities are
stacked node-major.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel

from src.control.ocp import OcpProblem, require_valid
from src.spectral.grid import EquispacedGrid, make_grid
from src.spectral.integration import (
    IntegrationMatrix,
    build_square_fim,
    terminal_quadrature,
)
from src.spectral.interpolation import eval_vector_interpolant
from src.utils.errors import InvalidInputError
from src.utils.logging import get_logger

logger = get_logger(__name__)


class SolverStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    STALLED = "stalled"
    FAILED = "failed"


class KktSummary(BaseModel):
    stationarity: float
    eq_inf: float
    ineq_violation: float
    complementarity: float


class SolveReport(BaseModel):
    """Optimal nodal trajectory and solver diagnostics for one discretised solve."""

    problem: str
    N: int
    T: float
    enforce_periodicity: bool
    x_nodes: list[list[float]]
    u_nodes: list[list[float]]
    J_N: float
    adfe: list[float]
    adfe_inf: float
    eq_inf: float
    ineq_violation: float
    solver_iters: int
    inner_iters: int = 0
    solver_status: SolverStatus
    message: str = ""
    wall_time_s: float = 0.0
    kkt: Optional[KktSummary] = None
    constraint_slack_minima: list[float] = []
    mean_state: list[float] = []

    @property
    def converged(self) -> bool:
        return self.solver_status is SolverStatus.CONVERGED

    @property
    def x_array(self) -> np.ndarray:
        return np.array(self.x_nodes, dtype=float)

    @property
    def u_array(self) -> np.ndarray:
        return np.array(self.u_nodes, dtype=float)


class TrajectorySample(BaseModel):
    t: list[float]
    x: list[list[float]]
    u: list[list[float]]


@dataclass(frozen=True)
class DiscreteNlp:
    """Dense NLP: minimise J_N(z) subject to h(z) = 0 and c(z) <= 0."""

    problem: OcpProblem
    grid: EquispacedGrid
    fim: IntegrationMatrix
    terminal_row: IntegrationMatrix
    enforce_periodicity: bool = True

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def num_vars(self) -> int:
        return (self.problem.n + self.problem.m) * self.N

    @property
    def num_eq(self) -> int:
        return self.problem.n * self.N + (self.problem.n if self.enforce_periodicity else 0)

    @property
    def num_ineq(self) -> int:
        return self.problem.p * self.N

    @property
    def variable_scale(self) -> np.ndarray:
        x_scale, u_scale, _ = self.problem.scales()
        return np.concatenate([np.repeat(x_scale, self.N), np.repeat(u_scale, self.N)])

    @property
    def eq_scale(self) -> np.ndarray:
        x_scale, _, _ = self.problem.scales()
        rows = [np.repeat(x_scale, self.N)]
        if self.enforce_periodicity:
            rows.append(x_scale)
        return np.concatenate(rows)

    @property
    def ineq_scale(self) -> np.ndarray:
        _, _, c_scale = self.problem.scales()
        return np.tile(c_scale, self.N)

    def decode(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Split z into N x n states and N x m controls."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.num_vars,):
            raise InvalidInputError(
                f"Decision vector must have length {self.num_vars}, got shape {z.shape}",
                {"num_vars": self.num_vars, "shape": z.shape},
            )
        split = self.problem.n * self.N
        X = z[:split].reshape(self.problem.n, self.N).T
        U = z[split:].reshape(self.problem.m, self.N).T
        return X, U

    def encode(self, X, U) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        U = np.asarray(U, dtype=float)
        if X.shape != (self.N, self.problem.n) or U.shape != (self.N, self.problem.m):
            raise InvalidInputError(
                f"Expected states {(self.N, self.problem.n)} and controls "
                f"{(self.N, self.problem.m)}, got {X.shape} and {U.shape}"
            )
        return np.concatenate([X.T.ravel(), U.T.ravel()])

    def control_mean(self, U: np.ndarray) -> np.ndarray:
        """Period mean of every control: terminal-row quadrature divided by T."""
        return self.terminal_row.apply(U)[0] / self.grid.T

    def _cost_samples(self, X, U) -> np.ndarray:
        return np.asarray(
            self.problem.running_cost(X, U, self.grid.nodes, self.control_mean(U)), dtype=float
        )

    def objective(self, z) -> float:
        """J_N = (1/N) sum_j g(x_j, u_j, t_j)."""
        X, U = self.decode(z)
        return float(np.mean(self._cost_samples(X, U)))

    def objective_gradient(self, z) -> np.ndarray:
        X, U = self.decode(z)
        gx, gu, gmean = self.problem.cost_gradients(X, U, self.grid.nodes, self.control_mean(U))
        # Each u_j enters every g_l through the mean with weight 1/N
        gu = gu + gmean.sum(axis=0) / self.N
        return self.encode(gx / self.N, gu / self.N)

    def dynamics_samples(self, X, U) -> np.ndarray:
        return np.asarray(self.problem.dynamics(X, U, self.grid.nodes), dtype=float)

    def eq_constraints(self, z) -> np.ndarray:
        X, U = self.decode(z)
        F = self.dynamics_samples(X, U)
        residual = X - X[0] - self.fim.apply(F)
        blocks = [residual.T.ravel()]
        if self.enforce_periodicity:
            blocks.append(self.terminal_row.apply(F)[0])
        return np.concatenate(blocks)

    def eq_jacobian(self, z) -> np.ndarray:
        X, U = self.decode(z)
        N, n, m = self.N, self.problem.n, self.problem.m
        jx, ju = self.problem.dynamics_jacobians(X, U, self.grid.nodes)
        theta = self.fim.entries

        # G[i, l, q, j] = d r_{i,l} / d z_{q,j}
        gx = -np.einsum("lj,jiq->ilqj", theta, jx)
        shift = np.eye(N)
        shift[:, 0] -= 1.0
        for i in range(n):
            gx[i, :, i, :] += shift
        gu = -np.einsum("lj,jiq->ilqj", theta, ju)
        rows = [np.hstack([gx.reshape(n * N, n * N), gu.reshape(n * N, m * N)])]

        if self.enforce_periodicity:
            weights = self.terminal_row.entries[0]
            px = np.einsum("j,jiq->iqj", weights, jx).reshape(n, n * N)
            pu = np.einsum("j,jiq->iqj", weights, ju).reshape(n, m * N)
            rows.append(np.hstack([px, pu]))
        return np.vstack(rows)

    def ineq_constraints(self, z) -> np.ndarray:
        X, U = self.decode(z)
        return self.problem.constraints(X, U, self.grid.nodes).ravel()

    def ineq_jacobian(self, z) -> np.ndarray:
        X, U = self.decode(z)
        N, n, m, p = self.N, self.problem.n, self.problem.m, self.problem.p
        if p == 0:
            return np.zeros((0, self.num_vars))
        cx, cu = self.problem.constraint_jacobians(X, U, self.grid.nodes)
        eye = np.eye(N)
        jac_x = np.einsum("jiq,jl->jiql", cx, eye).reshape(N * p, n * N)
        jac_u = np.einsum("jiq,jl->jiql", cu, eye).reshape(N * p, m * N)
        return np.hstack([jac_x, jac_u])


def discretize(
    prob: OcpProblem, N: int, enforce_periodicity: bool = True, validate: bool = True
) -> DiscreteNlp:
    """Collocate the integral form of the dynamics at N equispaced nodes.

    Args:
        prob: Problem to transcribe
        N: Even node count, at least 4
        enforce_periodicity: Append the n rows Theta_N F = 0
        validate: Run ``validate_problem`` first and raise on failure

    Returns:
        DiscreteNlp over (n + m) * N decision variables
    """
    grid = make_grid(N, prob.T)
    if grid.N < 4:
        raise InvalidInputError(f"Discretization needs N >= 4, got {N}", {"N": N})
    if validate:
        require_valid(prob)

    nlp = DiscreteNlp(
        problem=prob,
        grid=grid,
        fim=build_square_fim(grid),
        terminal_row=terminal_quadrature(grid),
        enforce_periodicity=enforce_periodicity,
    )
    logger.debug(
        f"Discretized {prob.name} at N={N}: {nlp.num_vars} vars, {nlp.num_eq} eq, "
        f"{nlp.num_ineq} ineq"
    )
    return nlp


def objective_and_gradient(nlp: DiscreteNlp, z) -> tuple[float, np.ndarray]:
    """J_N(z) and its exact gradient, including the mean-coupling path."""
    return nlp.objective(z), nlp.objective_gradient(z)


def compute_adfe(
    prob: OcpProblem,
    grid: EquispacedGrid,
    fim: IntegrationMatrix,
    x_nodes,
    u_nodes,
) -> np.ndarray:
    """Absolute discrete feasibility error |x(0) 1_N + Theta F - x(t_N)|, component-major."""
    X = np.asarray(x_nodes, dtype=float)
    U = np.asarray(u_nodes, dtype=float)
    if X.shape != (grid.N, prob.n) or U.shape != (grid.N, prob.m):
        raise InvalidInputError(
            f"Expected states {(grid.N, prob.n)} and controls {(grid.N, prob.m)}, "
            f"got {X.shape} and {U.shape}"
        )
    F = np.asarray(prob.dynamics(X, U, grid.nodes), dtype=float)
    return np.abs(X[0] + fim.apply(F) - X).T.ravel()


def recover_solution(
    report: SolveReport, grid: EquispacedGrid, t
) -> tuple[np.ndarray, np.ndarray]:
    """States and controls at time(s) t through the Fourier interpolants of the nodal solution."""
    return (
        eval_vector_interpolant(report.x_array, grid, t),
        eval_vector_interpolant(report.u_array, grid, t),
    )


def sample_trajectory(
    report: SolveReport, grid: EquispacedGrid, num_points: int
) -> TrajectorySample:
    """Evaluate the interpolated solution on ``num_points`` equally spaced times in [0, T)."""
    if num_points < 1:
        raise InvalidInputError(f"num_points must be positive, got {num_points}")
    t = grid.T * np.arange(num_points, dtype=float) / num_points
    x, u = recover_solution(report, grid, t)
    return TrajectorySample(t=t.tolist(), x=x.tolist(), u=u.tolist())


def build_report(
    nlp: DiscreteNlp,
    z,
    *,
    solver_iters: int,
    inner_iters: int,
    status: SolverStatus,
    message: str = "",
    wall_time_s: float = 0.0,
    kkt: Optional[KktSummary] = None,
) -> SolveReport:
    """Assemble a SolveReport from a final decision vector."""
    X, U = nlp.decode(z)
    prob = nlp.problem
    adfe = compute_adfe(prob, nlp.grid, nlp.fim, X, U)
    eq = nlp.eq_constraints(z)
    ineq = nlp.ineq_constraints(z)
    slack = -prob.constraints(X, U, nlp.grid.nodes)
    return SolveReport(
        problem=prob.name,
        N=nlp.N,
        T=nlp.grid.T,
        enforce_periodicity=nlp.enforce_periodicity,
        x_nodes=X.tolist(),
        u_nodes=U.tolist(),
        J_N=nlp.objective(z),
        adfe=adfe.tolist(),
        adfe_inf=float(np.max(adfe)),
        eq_inf=float(np.max(np.abs(eq))) if eq.size else 0.0,
        ineq_violation=float(max(0.0, np.max(ineq))) if ineq.size else 0.0,
        solver_iters=solver_iters,
        inner_iters=inner_iters,
        solver_status=status,
        message=message,
        wall_time_s=wall_time_s,
        kkt=kkt,
        constraint_slack_minima=slack.min(axis=0).tolist() if prob.p else [],
        mean_state=(nlp.terminal_row.apply(X)[0] / nlp.grid.T).tolist(),
    )
