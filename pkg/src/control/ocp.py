"""Periodic optimal control problems as immutable bundles of batched callbacks.

Every callback is vectorised over leading axes: ``x`` has shape ``(..., n)``,
``u`` ``(..., m)`` and ``t`` ``(...)``. Cost callbacks take a fourth argument
``u_mean``, the period means of the controls, broadcast against the batch.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel

from src.utils.errors import ProblemDefinitionError
from src.utils.logging import get_logger

logger = get_logger(__name__)

FD_REL_STEP = 1e-6
DERIVATIVE_RTOL = 1e-5
BATCH_RTOL = 1e-10
DERIVATIVE_SAMPLES = 10

Callback = Callable[..., np.ndarray]


class DerivativeMode(str, Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


def central_difference(fun: Callable[[np.ndarray], np.ndarray], v: np.ndarray) -> np.ndarray:
    """Batched central differences of ``fun`` with respect to the last axis of ``v``.

    Step per entry is FD_REL_STEP * (1 + |v_i|). For outputs of shape ``(..., k)``
    the result has shape ``(..., k, d)``; for scalar outputs ``(..., d)``.
    """
    v = np.asarray(v, dtype=float)
    columns = []
    for i in range(v.shape[-1]):
        h = FD_REL_STEP * (1.0 + np.abs(v[..., i]))
        plus, minus = v.copy(), v.copy()
        plus[..., i] += h
        minus[..., i] -= h
        # Divide by the representable step, not h
        step = plus[..., i] - minus[..., i]
        diff = np.asarray(fun(plus), dtype=float) - np.asarray(fun(minus), dtype=float)
        columns.append(diff / step[..., None] if diff.ndim > step.ndim else diff / step)
    return np.stack(columns, axis=-1)


@dataclass(frozen=True)
class OcpProblem:
    """Periodic optimal control problem: minimise (1/T) int_0^T g dt subject to
    x' = f(x, u, t), c(x, u, t) <= 0 and T-periodic x, u.
    """

    name: str
    n: int
    m: int
    p: int
    T: float
    dynamics: Callback
    running_cost: Callback
    path_constraints: Optional[Callback] = None
    jac_dynamics_x: Optional[Callback] = None
    jac_dynamics_u: Optional[Callback] = None
    grad_cost_x: Optional[Callback] = None
    grad_cost_u: Optional[Callback] = None
    grad_cost_mean: Optional[Callback] = None
    jac_constraints_x: Optional[Callback] = None
    jac_constraints_u: Optional[Callback] = None
    derivative_mode: DerivativeMode = DerivativeMode.ANALYTIC
    cost_mean_control_coupling: tuple[int, ...] = ()
    state_scale: Optional[tuple[float, ...]] = None
    control_scale: Optional[tuple[float, ...]] = None
    constraint_scale: Optional[tuple[float, ...]] = None

    @property
    def is_analytic(self) -> bool:
        return self.derivative_mode is DerivativeMode.ANALYTIC

    @property
    def coupling_mask(self) -> np.ndarray:
        """Boolean m-vector marking controls whose period mean enters g."""
        mask = np.zeros(self.m, dtype=bool)
        mask[list(self.cost_mean_control_coupling)] = True
        return mask

    def scales(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nominal magnitudes of states, controls and path constraints."""

        def as_array(scale, size):
            return np.ones(size) if scale is None else np.asarray(scale, dtype=float)

        return (
            as_array(self.state_scale, self.n),
            as_array(self.control_scale, self.m),
            as_array(self.constraint_scale, self.p),
        )

    def constraints(self, x, u, t) -> np.ndarray:
        if self.p == 0 or self.path_constraints is None:
            return np.zeros(np.shape(t) + (0,))
        return np.asarray(self.path_constraints(x, u, t), dtype=float)

    def dynamics_jacobians(self, x, u, t) -> tuple[np.ndarray, np.ndarray]:
        """(df/dx, df/du) with shapes (..., n, n) and (..., n, m)."""
        if self.is_analytic:
            return (
                np.asarray(self.jac_dynamics_x(x, u, t), dtype=float),
                np.asarray(self.jac_dynamics_u(x, u, t), dtype=float),
            )
        return (
            central_difference(lambda xv: self.dynamics(xv, u, t), x),
            central_difference(lambda uv: self.dynamics(x, uv, t), u),
        )

    def cost_gradients(self, x, u, t, u_mean) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(dg/dx, dg/du, dg/du_mean), each over the batch; the last is zero off the coupling."""
        u_mean = np.broadcast_to(np.asarray(u_mean, dtype=float), np.shape(u)).copy()
        if self.is_analytic:
            gx = np.asarray(self.grad_cost_x(x, u, t, u_mean), dtype=float)
            gu = np.asarray(self.grad_cost_u(x, u, t, u_mean), dtype=float)
            if self.cost_mean_control_coupling:
                gmean = np.asarray(self.grad_cost_mean(x, u, t, u_mean), dtype=float)
            else:
                gmean = np.zeros(np.shape(u))
        else:
            gx = central_difference(lambda xv: self.running_cost(xv, u, t, u_mean), x)
            gu = central_difference(lambda uv: self.running_cost(x, uv, t, u_mean), u)
            if self.cost_mean_control_coupling:
                gmean = central_difference(lambda mv: self.running_cost(x, u, t, mv), u_mean)
            else:
                gmean = np.zeros(np.shape(u))
        return gx, gu, np.where(self.coupling_mask, gmean, 0.0)

    def constraint_jacobians(self, x, u, t) -> tuple[np.ndarray, np.ndarray]:
        """(dc/dx, dc/du) with shapes (..., p, n) and (..., p, m)."""
        batch = np.shape(t)
        if self.p == 0:
            return np.zeros(batch + (0, self.n)), np.zeros(batch + (0, self.m))
        if self.is_analytic:
            return (
                np.asarray(self.jac_constraints_x(x, u, t), dtype=float),
                np.asarray(self.jac_constraints_u(x, u, t), dtype=float),
            )
        return (
            central_difference(lambda xv: self.constraints(xv, u, t), x),
            central_difference(lambda uv: self.constraints(x, uv, t), u),
        )


class CheckResult(BaseModel):
    name: str
    passed: bool
    message: str = ""


class ValidationReport(BaseModel):
    problem: str
    checks: list[CheckResult] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def add(self, name: str, passed: bool, message: str = "") -> bool:
        self.checks.append(CheckResult(name=name, passed=passed, message=message))
        return passed


def _sample_point(prob: OcpProblem, rng: np.random.Generator, batch: tuple = ()) -> tuple:
    x_scale, u_scale, _ = prob.scales()
    x = x_scale * rng.uniform(-1.0, 1.0, batch + (prob.n,))
    u = u_scale * rng.uniform(-1.0, 1.0, batch + (prob.m,))
    u_mean = u_scale * rng.uniform(-1.0, 1.0, prob.m)
    return x, u, u_mean


def _callback_outputs(prob: OcpProblem, x, u, t, u_mean) -> dict[str, np.ndarray]:
    outputs = {
        "dynamics": prob.dynamics(x, u, t),
        "running_cost": prob.running_cost(x, u, t, u_mean),
        "path_constraints": prob.constraints(x, u, t),
    }
    if prob.is_analytic:
        jx, ju = prob.dynamics_jacobians(x, u, t)
        gx, gu, gmean = prob.cost_gradients(x, u, t, u_mean)
        cx, cu = prob.constraint_jacobians(x, u, t)
        outputs.update(
            jac_dynamics_x=jx,
            jac_dynamics_u=ju,
            grad_cost_x=gx,
            grad_cost_u=gu,
            grad_cost_mean=gmean,
            jac_constraints_x=cx,
            jac_constraints_u=cu,
        )
    return {name: np.asarray(value, dtype=float) for name, value in outputs.items()}


def _expected_shapes(prob: OcpProblem) -> dict[str, tuple]:
    n, m, p = prob.n, prob.m, prob.p
    return {
        "dynamics": (n,),
        "running_cost": (),
        "path_constraints": (p,),
        "jac_dynamics_x": (n, n),
        "jac_dynamics_u": (n, m),
        "grad_cost_x": (n,),
        "grad_cost_u": (m,),
        "grad_cost_mean": (m,),
        "jac_constraints_x": (p, n),
        "jac_constraints_u": (p, m),
    }


def _check_definition(prob: OcpProblem, report: ValidationReport) -> bool:
    ok = report.add(
        "dimensions",
        prob.n >= 1 and prob.m >= 1 and prob.p >= 0,
        f"n={prob.n}, m={prob.m}, p={prob.p}",
    )
    ok &= report.add(
        "period", math.isfinite(prob.T) and prob.T > 0.0, f"T={prob.T} must be positive"
    )
    ok &= report.add(
        "coupling",
        all(0 <= i < prob.m for i in prob.cost_mean_control_coupling),
        f"coupled controls {prob.cost_mean_control_coupling} must index into m={prob.m}",
    )
    for label, scale, size in (
        ("state_scale", prob.state_scale, prob.n),
        ("control_scale", prob.control_scale, prob.m),
        ("constraint_scale", prob.constraint_scale, prob.p),
    ):
        if scale is not None:
            ok &= report.add(
                label,
                len(scale) == size and all(s > 0.0 for s in scale),
                f"{label} needs {size} positive entries, got {scale}",
            )
    if prob.is_analytic:
        required = ["jac_dynamics_x", "jac_dynamics_u", "grad_cost_x", "grad_cost_u"]
        if prob.p > 0:
            required += ["jac_constraints_x", "jac_constraints_u"]
        if prob.cost_mean_control_coupling:
            required.append("grad_cost_mean")
        missing = [name for name in required if getattr(prob, name) is None]
        ok &= report.add("analytic_callbacks", not missing, f"missing callbacks: {missing}")
    if prob.p > 0:
        ok &= report.add(
            "path_constraints", prob.path_constraints is not None, "p > 0 needs path_constraints"
        )
    return ok


def _check_samples(prob: OcpProblem, report: ValidationReport) -> None:
    rng = np.random.default_rng(0)
    expected = _expected_shapes(prob)
    times = np.array([0.0, prob.T / 3.0, prob.T])
    points = [_sample_point(prob, rng) for _ in times]
    # u_mean is a property of the whole period, shared by every sample
    u_mean = points[0][2]

    single = []
    for t, (x, u, _) in zip(times, points):
        try:
            outputs = _callback_outputs(prob, x, u, t, u_mean)
        except Exception as e:
            report.add(f"sample_t={t:.6g}", False, f"callback raised {type(e).__name__}: {e}")
            return
        for name, value in outputs.items():
            if value.shape != expected[name]:
                report.add(
                    f"shape:{name}",
                    False,
                    f"{name} returned shape {value.shape}, expected {expected[name]} at t={t:.6g}",
                )
                return
            if not np.all(np.isfinite(value)):
                report.add(f"finite:{name}", False, f"{name} is not finite at t={t:.6g}")
                return
        single.append(outputs)
    report.add("shapes", True, f"callbacks consistent at t in {times.tolist()}")

    x = np.stack([pt[0] for pt in points])
    u = np.stack([pt[1] for pt in points])
    try:
        batched = _callback_outputs(prob, x, u, times, u_mean)
    except Exception as e:
        report.add("batch", False, f"batched call raised {type(e).__name__}: {e}")
        return
    mismatched = [
        name
        for name, value in batched.items()
        if value.shape != (3,) + expected[name]
        or not np.allclose(
            value, np.stack([out[name] for out in single]), rtol=BATCH_RTOL, atol=1e-12
        )
    ]
    report.add("batch", not mismatched, f"batched outputs differ for {mismatched}")


def _relative_deviation(analytic: np.ndarray, numeric: np.ndarray) -> float:
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric)) / max(1.0, float(np.max(np.abs(numeric)))))


def _check_derivatives(prob: OcpProblem, report: ValidationReport) -> None:
    rng = np.random.default_rng(0)
    x, u, u_mean = _sample_point(prob, rng, (DERIVATIVE_SAMPLES,))
    t = prob.T * rng.uniform(0.0, 1.0, DERIVATIVE_SAMPLES)
    u_mean = np.broadcast_to(u_mean, u.shape).copy()

    jx, ju = prob.dynamics_jacobians(x, u, t)
    gx, gu, gmean = prob.cost_gradients(x, u, t, u_mean)
    cx, cu = prob.constraint_jacobians(x, u, t)
    numeric = {
        "jac_dynamics_x": (jx, central_difference(lambda v: prob.dynamics(v, u, t), x)),
        "jac_dynamics_u": (ju, central_difference(lambda v: prob.dynamics(x, v, t), u)),
        "grad_cost_x": (gx, central_difference(lambda v: prob.running_cost(v, u, t, u_mean), x)),
        "grad_cost_u": (gu, central_difference(lambda v: prob.running_cost(x, v, t, u_mean), u)),
        "jac_constraints_x": (cx, central_difference(lambda v: prob.constraints(v, u, t), x)),
        "jac_constraints_u": (cu, central_difference(lambda v: prob.constraints(x, v, t), u)),
    }
    if prob.cost_mean_control_coupling:
        fd_mean = central_difference(lambda v: prob.running_cost(x, u, t, v), u_mean)
        numeric["grad_cost_mean"] = (gmean, np.where(prob.coupling_mask, fd_mean, 0.0))

    # Each sample is normalised on its own so large-magnitude points do not mask small ones
    for name, (analytic, fd) in numeric.items():
        worst = max(_relative_deviation(analytic[i], fd[i]) for i in range(DERIVATIVE_SAMPLES))
        report.add(
            f"derivative:{name}",
            worst <= DERIVATIVE_RTOL,
            f"max relative deviation {worst:.3e} vs central differences",
        )


def validate_problem(prob: OcpProblem) -> ValidationReport:
    """Exercise every callback for shape, finiteness, batching and derivative accuracy.

    Never raises; failures are returned as report entries.
    """
    report = ValidationReport(problem=prob.name)
    if not _check_definition(prob, report):
        return report
    _check_samples(prob, report)
    if report.passed and prob.is_analytic:
        try:
            _check_derivatives(prob, report)
        except Exception as e:
            report.add("derivatives", False, f"derivative check raised {type(e).__name__}: {e}")

    if report.passed:
        logger.debug(f"Problem {prob.name} passed {len(report.checks)} checks")
    else:
        logger.warning(
            f"Problem {prob.name} failed: {[check.name for check in report.failures]}"
        )
    return report


def require_valid(prob: OcpProblem) -> None:
    """Raise ProblemDefinitionError unless ``validate_problem`` passes."""
    report = validate_problem(prob)
    if not report.passed:
        raise ProblemDefinitionError(
            f"Problem {prob.name} failed validation",
            {"failures": [check.model_dump() for check in report.failures]},
        )
