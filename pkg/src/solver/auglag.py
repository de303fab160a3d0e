"""Augmented Lagrangian solver for dense NLPs.

    minimise J(z)  subject to  h(z) = 0,  c(z) <= 0

Inequalities are folded into the Powell-Hestenes-Rockafellar penalty, which is
the slack formulation c + s = 0, s >= 0 with the slack eliminated by projection
(s = max(0, -c - mu/rho)). Each subproblem is solved with scipy's L-BFGS-B.
The solver works on scaled variables y = z / variable_scale, scaled constraints
and an objective scaled by 1/max(1, |J(z0)|); everything it reports is unscaled.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Protocol

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from src.config import settings
from src.control.discretizer import (
    DiscreteNlp,
    KktSummary,
    SolveReport,
    SolverStatus,
    build_report,
    discretize,
)
from src.control.ocp import OcpProblem
from src.solver.config import SolverConfig, resolve_initial_guess
from src.utils.errors import SolverError
from src.utils.logging import get_logger
from src.utils.monitoring import monitor

logger = get_logger(__name__)


class Nlp(Protocol):
    num_vars: int

    def objective(self, z: np.ndarray) -> float: ...

    def objective_gradient(self, z: np.ndarray) -> np.ndarray: ...

    def eq_constraints(self, z: np.ndarray) -> np.ndarray: ...

    def eq_jacobian(self, z: np.ndarray) -> np.ndarray: ...

    def ineq_constraints(self, z: np.ndarray) -> np.ndarray: ...

    def ineq_jacobian(self, z: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class DenseNlp:
    """NLP assembled from plain callables; missing constraint blocks are empty."""

    num_vars: int
    objective_fn: Callable[[np.ndarray], float]
    gradient_fn: Callable[[np.ndarray], np.ndarray]
    eq_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eq_jacobian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ineq_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ineq_jacobian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def objective(self, z):
        return float(self.objective_fn(z))

    def objective_gradient(self, z):
        return np.asarray(self.gradient_fn(z), dtype=float).reshape(self.num_vars)

    def eq_constraints(self, z):
        if self.eq_fn is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.eq_fn(z), dtype=float))

    def eq_jacobian(self, z):
        if self.eq_fn is None:
            return np.zeros((0, self.num_vars))
        return np.asarray(self.eq_jacobian_fn(z), dtype=float).reshape(-1, self.num_vars)

    def ineq_constraints(self, z):
        if self.ineq_fn is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.ineq_fn(z), dtype=float))

    def ineq_jacobian(self, z):
        if self.ineq_fn is None:
            return np.zeros((0, self.num_vars))
        return np.asarray(self.ineq_jacobian_fn(z), dtype=float).reshape(-1, self.num_vars)


@dataclass
class OuterIteration:
    """One outer step. ``infeasibility`` is the scaled value at the inner solution,
    ``penalty`` the value in force for the next step."""

    iteration: int
    objective: float
    eq_inf: float
    ineq_violation: float
    infeasibility: float
    penalty: float
    inner_iters: int
    step: float
    stationarity: float


@dataclass
class SolverResult:
    z: np.ndarray
    status: SolverStatus
    message: str
    objective: float
    eq_inf: float
    ineq_violation: float
    outer_iters: int
    inner_iters: int
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray
    kkt: Optional[KktSummary] = None
    history: list[OuterIteration] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is SolverStatus.CONVERGED


def _scale_or_ones(nlp, name: str, size: int) -> np.ndarray:
    scale = getattr(nlp, name, None)
    if scale is None:
        return np.ones(size)
    scale = np.asarray(scale, dtype=float)
    if scale.shape != (size,) or np.any(scale <= 0.0):
        raise SolverError(f"{name} must hold {size} positive entries", {"shape": scale.shape})
    return scale


class AugmentedLagrangian:
    """Scaled PHR augmented Lagrangian of an NLP with fixed multipliers and penalty."""

    def __init__(
        self,
        nlp: Nlp,
        variable_scale: np.ndarray,
        eq_scale: np.ndarray,
        ineq_scale: np.ndarray,
        objective_scale: float,
        penalty: float,
    ):
        self.nlp = nlp
        self.variable_scale = variable_scale
        self.eq_scale = eq_scale
        self.ineq_scale = ineq_scale
        self.objective_scale = objective_scale
        self.penalty = penalty
        self.eq_multipliers = np.zeros(eq_scale.size)
        self.ineq_multipliers = np.zeros(ineq_scale.size)

    def to_z(self, y: np.ndarray) -> np.ndarray:
        return y * self.variable_scale

    def to_y(self, z: np.ndarray) -> np.ndarray:
        return z / self.variable_scale

    def scaled_constraints(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            self.nlp.eq_constraints(z) / self.eq_scale,
            self.nlp.ineq_constraints(z) / self.ineq_scale,
        )

    def infeasibility(self, z: np.ndarray) -> float:
        """max(||h||_inf, max c_+) in scaled units."""
        h, c = self.scaled_constraints(z)
        values = [0.0]
        if h.size:
            values.append(float(np.max(np.abs(h))))
        if c.size:
            values.append(float(np.max(c)))
        return max(values)

    def value_and_grad(self, y: np.ndarray) -> tuple[float, np.ndarray]:
        z = self.to_z(y)
        rho = self.penalty
        h, c = self.scaled_constraints(z)
        shifted = np.maximum(0.0, self.ineq_multipliers + rho * c)

        value = (
            self.objective_scale * self.nlp.objective(z)
            + self.eq_multipliers @ h
            + 0.5 * rho * (h @ h)
            + (shifted @ shifted - self.ineq_multipliers @ self.ineq_multipliers) / (2.0 * rho)
        )
        grad = self.objective_scale * self.nlp.objective_gradient(z)
        if h.size:
            weights = (self.eq_multipliers + rho * h) / self.eq_scale
            grad = grad + self.nlp.eq_jacobian(z).T @ weights
        if c.size:
            grad = grad + self.nlp.ineq_jacobian(z).T @ (shifted / self.ineq_scale)
        return float(value), grad * self.variable_scale

    def update_multipliers(self, z: np.ndarray) -> None:
        h, c = self.scaled_constraints(z)
        self.eq_multipliers = self.eq_multipliers + self.penalty * h
        self.ineq_multipliers = np.maximum(0.0, self.ineq_multipliers + self.penalty * c)

    def unscaled_multipliers(self) -> tuple[np.ndarray, np.ndarray]:
        """Multipliers of the original problem: grad J + Jh^T lam + Jc^T mu = 0."""
        return (
            self.eq_multipliers / (self.objective_scale * self.eq_scale),
            self.ineq_multipliers / (self.objective_scale * self.ineq_scale),
        )

    def scaled_kkt(self, z: np.ndarray) -> tuple[float, float]:
        """(stationarity, complementarity) of the scaled Lagrangian at z."""
        h, c = self.scaled_constraints(z)
        grad = self.objective_scale * self.nlp.objective_gradient(z)
        if h.size:
            grad = grad + self.nlp.eq_jacobian(z).T @ (self.eq_multipliers / self.eq_scale)
        if c.size:
            grad = grad + self.nlp.ineq_jacobian(z).T @ (self.ineq_multipliers / self.ineq_scale)
        stationarity = float(np.max(np.abs(grad * self.variable_scale)))
        complementarity = float(np.max(np.abs(self.ineq_multipliers * c))) if c.size else 0.0
        return stationarity, complementarity

    def polish(self, z: np.ndarray, max_iters: int) -> np.ndarray:
        """Gauss-Newton least-norm projection onto h = 0 and the estimated active set.

        The active set is every violated inequality plus those with a positive
        multiplier. Returns z unchanged unless infeasibility drops.
        """
        start = self.infeasibility(z)
        candidate = z.copy()
        for _ in range(max_iters):
            h, c = self.scaled_constraints(candidate)
            active = (c > 0.0) | (self.ineq_multipliers > 0.0)
            residual = np.concatenate([h, c[active]])
            if residual.size == 0 or np.max(np.abs(residual)) <= np.finfo(float).eps:
                break
            rows = [self.nlp.eq_jacobian(candidate) / self.eq_scale[:, None]]
            if np.any(active):
                jc = self.nlp.ineq_jacobian(candidate)[active]
                rows.append(jc / self.ineq_scale[active, None])
            jac_y = np.vstack(rows) * self.variable_scale
            dy = np.linalg.lstsq(jac_y, -residual, rcond=None)[0]
            candidate = candidate + self.to_z(dy)

        if np.all(np.isfinite(candidate)) and self.infeasibility(candidate) < start:
            return candidate
        return z


def kkt_residuals(
    nlp: Nlp, z, multipliers: Optional[tuple[np.ndarray, np.ndarray]] = None
) -> tuple[float, float, float, float]:
    """(stationarity_inf, eq_inf, ineq_violation, complementarity_inf) in unscaled units.

    Args:
        nlp: Problem
        z: Point
        multipliers: (equality, inequality) multipliers; zeros when omitted

    Returns:
        Infinity norms of grad L, h, max(c, 0) and mu * c
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (nlp.num_vars,):
        raise SolverError(f"Point must have length {nlp.num_vars}, got shape {z.shape}")
    h = nlp.eq_constraints(z)
    c = nlp.ineq_constraints(z)
    lam, mu = multipliers if multipliers is not None else (np.zeros(h.size), np.zeros(c.size))
    lam = np.asarray(lam, dtype=float).reshape(-1)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if lam.shape != h.shape or mu.shape != c.shape:
        raise SolverError(
            f"Multiplier shapes {lam.shape}, {mu.shape} do not match constraints "
            f"{h.shape}, {c.shape}"
        )

    grad = nlp.objective_gradient(z)
    if h.size:
        grad = grad + nlp.eq_jacobian(z).T @ lam
    if c.size:
        grad = grad + nlp.ineq_jacobian(z).T @ mu
    return (
        float(np.max(np.abs(grad))),
        float(np.max(np.abs(h))) if h.size else 0.0,
        float(max(0.0, np.max(c))) if c.size else 0.0,
        float(np.max(np.abs(mu * c))) if c.size else 0.0,
    )


def _feasibility(nlp: Nlp, z: np.ndarray) -> tuple[float, float]:
    h = nlp.eq_constraints(z)
    c = nlp.ineq_constraints(z)
    eq_inf = float(np.max(np.abs(h))) if h.size else 0.0
    ineq_violation = float(max(0.0, np.max(c))) if c.size else 0.0
    return eq_inf, ineq_violation


def _within_tolerances(nlp: Nlp, z: np.ndarray, config: SolverConfig) -> bool:
    eq_inf, ineq_violation = _feasibility(nlp, z)
    return eq_inf <= config.eq_tolerance and ineq_violation <= config.ineq_tolerance


def _failed(nlp: Nlp, z0: np.ndarray, message: str) -> SolverResult:
    logger.warning(f"Solver failed at the initial guess: {message}")
    return SolverResult(
        z=z0,
        status=SolverStatus.FAILED,
        message=message,
        objective=float("nan"),
        eq_inf=float("nan"),
        ineq_violation=float("nan"),
        outer_iters=0,
        inner_iters=0,
        eq_multipliers=np.zeros(0),
        ineq_multipliers=np.zeros(0),
    )


def minimize(
    nlp: Nlp, config: Optional[SolverConfig] = None, z0: Optional[np.ndarray] = None
) -> SolverResult:
    """Run the augmented Lagrangian method from ``z0`` (default: the configured guess).

    Args:
        nlp: Any object implementing the NLP protocol
        config: Solver settings
        z0: Starting point, overriding ``config.initial_guess``

    Returns:
        SolverResult; on max_iter or stalled it carries the best iterate found
    """
    config = config or SolverConfig()
    z = resolve_initial_guess(config, nlp.num_vars) if z0 is None else np.array(z0, float)
    if z.shape != (nlp.num_vars,):
        raise SolverError(f"Initial guess must have length {nlp.num_vars}, got {z.shape}")

    try:
        J = nlp.objective(z)
        h0 = nlp.eq_constraints(z)
        c0 = nlp.ineq_constraints(z)
        g0 = nlp.objective_gradient(z)
    except FloatingPointError as e:
        return _failed(nlp, z, f"evaluation raised {e}")
    if not (np.isfinite(J) and np.all(np.isfinite(h0)) and np.all(np.isfinite(c0))):
        return _failed(nlp, z, "non-finite objective or constraints at the initial guess")
    if not np.all(np.isfinite(g0)):
        return _failed(nlp, z, "non-finite objective gradient at the initial guess")

    al = AugmentedLagrangian(
        nlp,
        variable_scale=_scale_or_ones(nlp, "variable_scale", nlp.num_vars),
        eq_scale=_scale_or_ones(nlp, "eq_scale", h0.size),
        ineq_scale=_scale_or_ones(nlp, "ineq_scale", c0.size),
        objective_scale=1.0 / max(1.0, abs(J)),
        penalty=config.initial_penalty,
    )

    history: list[OuterIteration] = []
    previous_infeasibility = al.infeasibility(z)
    gtol = config.inner_tolerance
    inner_total = 0
    best: Optional[tuple] = None
    status, message = SolverStatus.MAX_ITER, f"reached {config.max_outer_iters} outer iterations"

    for k in range(1, config.max_outer_iters + 1):
        inner = scipy_minimize(
            al.value_and_grad,
            al.to_y(z),
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": config.max_inner_iters,
                "maxcor": config.memory,
                "gtol": gtol,
                "ftol": config.objective_tolerance,
            },
        )
        inner_total += int(inner.nit)
        # No inner iteration means no move; skip the y -> z round trip
        z_inner = z if inner.nit == 0 else al.to_z(inner.x)
        if not np.all(np.isfinite(z_inner)):
            status, message = SolverStatus.STALLED, "inner solve produced non-finite iterate"
            break

        infeasibility = al.infeasibility(z_inner)
        al.update_multipliers(z_inner)
        z_new = z_inner
        if config.feasibility_polish and not _within_tolerances(nlp, z_inner, config):
            z_new = al.polish(z_inner, config.polish_max_iters)

        J_new = nlp.objective(z_new)
        eq_inf, ineq_violation = _feasibility(nlp, z_new)
        stationarity, _ = al.scaled_kkt(z_new)
        step = float(np.linalg.norm(al.to_y(z_new) - al.to_y(z)))
        objective_change = al.objective_scale * abs(J_new - J)

        history.append(
            OuterIteration(
                iteration=k,
                objective=J_new,
                eq_inf=eq_inf,
                ineq_violation=ineq_violation,
                infeasibility=infeasibility,
                penalty=al.penalty,
                inner_iters=int(inner.nit),
                step=step,
                stationarity=stationarity,
            )
        )
        monitor.log_solver_iteration(k, J_new, infeasibility, al.penalty, int(inner.nit))
        logger.debug(
            f"outer {k}: J={J_new:.10e} eq_inf={eq_inf:.2e} ineq={ineq_violation:.2e} "
            f"rho={al.penalty:.1e} inner={inner.nit} step={step:.2e} stat={stationarity:.2e}"
        )

        feasible = eq_inf <= config.eq_tolerance and ineq_violation <= config.ineq_tolerance
        key = (0, J_new) if feasible else (1, max(eq_inf, ineq_violation))
        if best is None or key < best[0]:
            best = (key, z_new.copy(), al.unscaled_multipliers())

        z, J = z_new, J_new
        if feasible:
            rule = None
            if step <= config.step_tolerance:
                rule = "step"
            elif objective_change <= config.objective_tolerance:
                rule = "objective"
            if rule is not None:
                status, message = SolverStatus.CONVERGED, f"converged by {rule} rule"
                best = (key, z_new.copy(), al.unscaled_multipliers())
                break

        # Penalty grows when infeasibility fails to shrink enough
        at_cap = al.penalty >= config.penalty_max
        if infeasibility > config.infeasibility_reduction * previous_infeasibility:
            if at_cap and infeasibility >= previous_infeasibility and not feasible:
                status, message = SolverStatus.STALLED, "penalty at maximum without progress"
                break
            al.penalty = min(al.penalty * config.penalty_growth, config.penalty_max)
            history[-1].penalty = al.penalty
        previous_infeasibility = infeasibility
        gtol = max(gtol * config.inner_tolerance_decay, config.inner_tolerance_min)

    _, z_best, (lam, mu) = best if best is not None else (None, z, al.unscaled_multipliers())
    J_best = nlp.objective(z_best)
    eq_inf, ineq_violation = _feasibility(nlp, z_best)
    stationarity, _, _, complementarity = kkt_residuals(nlp, z_best, (lam, mu))

    if status is SolverStatus.CONVERGED:
        logger.info(f"Converged in {len(history)} outer iterations: J={J_best:.10e}")
    else:
        logger.warning(f"Solver {status.value}: {message}; returning best iterate")
    return SolverResult(
        z=z_best,
        status=status,
        message=message,
        objective=J_best,
        eq_inf=eq_inf,
        ineq_violation=ineq_violation,
        outer_iters=len(history),
        inner_iters=inner_total,
        eq_multipliers=lam,
        ineq_multipliers=mu,
        kkt=KktSummary(
            stationarity=stationarity,
            eq_inf=eq_inf,
            ineq_violation=ineq_violation,
            complementarity=complementarity,
        ),
        history=history,
    )


def _restart_points(nlp: Nlp, z0: np.ndarray, config: SolverConfig) -> list[np.ndarray]:
    """z0 followed by ``multistart_restarts`` seeded uniform perturbations of it."""
    rng = np.random.default_rng(config.seed)
    scale = _scale_or_ones(nlp, "variable_scale", nlp.num_vars)
    points = [z0]
    for _ in range(config.multistart_restarts):
        noise = rng.uniform(-1.0, 1.0, nlp.num_vars)
        points.append(z0 + config.perturbation_amplitude * scale * noise)
    return points


def multistart(
    nlp: Nlp, config: SolverConfig, threads: Optional[int] = None
) -> tuple[SolverResult, int]:
    """Run ``minimize`` from the initial guess and every perturbed restart.

    Returns:
        (best result, restart index); converged runs win, then lowest objective,
        then lowest index
    """
    starts = _restart_points(nlp, resolve_initial_guess(config, nlp.num_vars), config)
    workers = max(1, min(threads or settings.effective_threads, len(starts)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda z0: minimize(nlp, config, z0), starts))

    def rank(item):
        index, result = item
        objective = result.objective if np.isfinite(result.objective) else np.inf
        return (not result.converged, objective, index)

    index, result = min(enumerate(results), key=rank)
    logger.info(
        f"Multi-start: {sum(r.converged for r in results)}/{len(results)} converged, "
        f"best restart {index} with J={result.objective:.10e}"
    )
    return result, index


def solve(nlp: DiscreteNlp, config: Optional[SolverConfig] = None) -> SolveReport:
    """Solve a discretised optimal control problem and report its nodal solution.

    Args:
        nlp: Output of ``discretize``
        config: Solver settings; multi-start runs when ``multistart_restarts`` > 0

    Returns:
        SolveReport with ADFE, KKT diagnostics and wall time
    """
    config = config or SolverConfig()
    with monitor.timer(f"solve/{nlp.problem.name}/wall_time_s") as timing:
        if config.multistart_restarts > 0:
            result, _ = multistart(nlp, config)
        else:
            result = minimize(nlp, config)

    report = build_report(
        nlp,
        result.z,
        solver_iters=result.outer_iters,
        inner_iters=result.inner_iters,
        status=result.status,
        message=result.message,
        wall_time_s=timing.elapsed,
        kkt=result.kkt,
    )
    logger.info(
        f"{nlp.problem.name} N={nlp.N}: status={report.solver_status.value} "
        f"J_N={report.J_N:.10e} adfe_inf={report.adfe_inf:.3e}"
    )
    return report


class PeriodicityMode(str, Enum):
    ON = "on"
    OFF = "off"
    BEST = "best"


def solve_problem(
    prob: OcpProblem,
    N: int,
    config: Optional[SolverConfig] = None,
    periodicity: PeriodicityMode = PeriodicityMode.BEST,
) -> SolveReport:
    """Discretise and solve ``prob`` with or without the periodicity rows.

    ``best`` solves both transcriptions and keeps the converged report with the
    lower J_N; the rows-on report wins ties and is kept when neither converges.
    """
    mode = PeriodicityMode(periodicity)
    if mode is not PeriodicityMode.BEST:
        return solve(discretize(prob, N, enforce_periodicity=mode is PeriodicityMode.ON), config)

    reports = [
        solve(discretize(prob, N, enforce_periodicity=flag), config) for flag in (True, False)
    ]
    index, report = min(
        enumerate(reports), key=lambda item: (not item[1].converged, item[1].J_N, item[0])
    )
    logger.info(
        f"{prob.name} N={N}: periodicity rows {'on' if index == 0 else 'off'} selected "
        f"(J_N on={reports[0].J_N:.10e} [{reports[0].solver_status.value}], "
        f"off={reports[1].J_N:.10e} [{reports[1].solver_status.value}])"
    )
    return report
