"""Built-in benchmark problems.

Problem 1 is a nonconvex two-state problem whose static solution x = 0, u = 0
(J = 0) can be beaten by a periodic orbit. Problem 2 is a solar heating system
with collector/storage (T_S) and enclosure (T_E) temperatures, an auxiliary
heater Q_aux and a storage-to-enclosure heat flow Q_S, driven by a daily
ambient temperature and insolation cycle.
"""

import math
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, Field

from src.control.ocp import DerivativeMode, OcpProblem

MACHINE_EPSILON = 2.2204e-16
INSOLATION_PEAK_HALF = 13333.0
AMBIENT_AMPLITUDE = 10.0


class Problem1Params(BaseModel):
    b: float = Field(0.2475, gt=0.0, description="Control weight")
    T: float = Field(4.431736, gt=0.0, description="Period")


class Problem2Params(BaseModel):
    UA_S: float = Field(20.07, gt=0.0, description="Storage loss coefficient, kJ/(degC h)")
    UA_E: float = Field(949.5, gt=0.0, description="Enclosure loss coefficient, kJ/(degC h)")
    mCp_S: float = Field(19000.0, gt=0.0, description="Storage heat capacity, kJ/degC")
    mCp_E: float = Field(18890.0, gt=0.0, description="Enclosure heat capacity, kJ/degC")
    Tbar_S: float = Field(30.0, gt=0.0, description="Storage set point, degC")
    Tbar_E: float = Field(20.0, gt=0.0, description="Enclosure set point, degC")
    T: float = Field(24.0, gt=0.0, description="Period, h")
    omega: float = Field(math.pi / 12.0, gt=0.0, description="Daily angular frequency, 1/h")
    u1_lower: float = Field(8000.0, gt=0.0, description="Auxiliary heat lower bound, kJ/h")
    eps_u2: float = Field(MACHINE_EPSILON, gt=0.0, description="Lower bound on Q_S")


class ReferenceRow(NamedTuple):
    b: float
    T: float
    N: int
    reference_J: float


# Reference optima for Problem 1; each N is paired with its own period
REFERENCE_ROWS: tuple[ReferenceRow, ...] = (
    ReferenceRow(0.2475, 4.431736, 12, -4.02232772e-2),
    ReferenceRow(0.2475, 4.43173625, 16, -4.08422489e-2),
    ReferenceRow(0.2250, 4.32786300, 12, -4.42143743e-2),
    ReferenceRow(0.2250, 4.32786260, 16, -4.48293692e-2),
    ReferenceRow(0.1000, 3.6343100, 12, -7.75663473e-2),
    ReferenceRow(0.1000, 3.6343132, 16, -7.81094298e-2),
)


def _batch_zeros(t, *shape) -> np.ndarray:
    return np.zeros(np.shape(t) + shape)


def make_problem1(params: Problem1Params | None = None) -> OcpProblem:
    """x1' = x2, x2' = u with g = x1^2/2 + x2^4/4 - x2^2/2 + b u^2/2; no path constraints."""
    params = params or Problem1Params()
    b = params.b

    def dynamics(x, u, t):
        return np.stack([x[..., 1], u[..., 0]], axis=-1)

    def jac_dynamics_x(x, u, t):
        jac = _batch_zeros(t, 2, 2)
        jac[..., 0, 1] = 1.0
        return jac

    def jac_dynamics_u(x, u, t):
        jac = _batch_zeros(t, 2, 1)
        jac[..., 1, 0] = 1.0
        return jac

    def running_cost(x, u, t, u_mean):
        x1, x2, u1 = x[..., 0], x[..., 1], u[..., 0]
        return 0.5 * x1**2 + 0.25 * x2**4 - 0.5 * x2**2 + 0.5 * b * u1**2

    def grad_cost_x(x, u, t, u_mean):
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([x1, x2**3 - x2], axis=-1)

    def grad_cost_u(x, u, t, u_mean):
        return b * u

    return OcpProblem(
        name="problem1",
        n=2,
        m=1,
        p=0,
        T=params.T,
        dynamics=dynamics,
        running_cost=running_cost,
        jac_dynamics_x=jac_dynamics_x,
        jac_dynamics_u=jac_dynamics_u,
        grad_cost_x=grad_cost_x,
        grad_cost_u=grad_cost_u,
        derivative_mode=DerivativeMode.ANALYTIC,
    )


def ambient_temperature(t, omega: float = math.pi / 12.0):
    """T_A(t) = -10 sin(omega t), degC."""
    return -AMBIENT_AMPLITUDE * np.sin(omega * np.asarray(t, dtype=float))


def insolation(t, omega: float = math.pi / 12.0):
    """Q_C(t) = 13333 (1 - cos(omega t)), kJ/h."""
    return INSOLATION_PEAK_HALF * (1.0 - np.cos(omega * np.asarray(t, dtype=float)))


def make_problem2(params: Problem2Params | None = None) -> OcpProblem:
    """Solar heating system with x = [T_E, T_S] and u = [Q_aux, Q_S].

    The cost penalises set-point deviations, the auxiliary heat spent and its
    deviation from the daily mean Q_aux; that mean enters through the
    mean-coupling on control 0.
    """
    params = params or Problem2Params()
    P = params

    def dynamics(x, u, t):
        t_amb = ambient_temperature(t, P.omega)
        x1, x2, u1, u2 = x[..., 0], x[..., 1], u[..., 0], u[..., 1]
        enclosure = (u1 + u2 - P.UA_E * (x1 - t_amb)) / P.mCp_E
        storage = (insolation(t, P.omega) - u2 - P.UA_S * (x2 - t_amb)) / P.mCp_S
        return np.stack([enclosure, storage], axis=-1)

    def jac_dynamics_x(x, u, t):
        jac = _batch_zeros(t, 2, 2)
        jac[..., 0, 0] = -P.UA_E / P.mCp_E
        jac[..., 1, 1] = -P.UA_S / P.mCp_S
        return jac

    def jac_dynamics_u(x, u, t):
        jac = _batch_zeros(t, 2, 2)
        jac[..., 0, 0] = 1.0 / P.mCp_E
        jac[..., 0, 1] = 1.0 / P.mCp_E
        jac[..., 1, 1] = -1.0 / P.mCp_S
        return jac

    def running_cost(x, u, t, u_mean):
        x1, x2, u1 = x[..., 0], x[..., 1], u[..., 0]
        u1_mean = np.asarray(u_mean)[..., 0]
        return (
            1000.0 * (x1 - P.Tbar_E) ** 2
            + 10.0 * (x2 - P.Tbar_S) ** 2
            + 0.1 * (u1 - u1_mean) ** 2
            + u1
        )

    def grad_cost_x(x, u, t, u_mean):
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([2000.0 * (x1 - P.Tbar_E), 20.0 * (x2 - P.Tbar_S)], axis=-1)

    def grad_cost_u(x, u, t, u_mean):
        deviation = u[..., 0] - np.asarray(u_mean)[..., 0]
        return np.stack([0.2 * deviation + 1.0, np.zeros_like(deviation)], axis=-1)

    def grad_cost_mean(x, u, t, u_mean):
        deviation = u[..., 0] - np.asarray(u_mean)[..., 0]
        return np.stack([-0.2 * deviation, np.zeros_like(deviation)], axis=-1)

    def path_constraints(x, u, t):
        return np.stack(
            [-x[..., 0], -x[..., 1], P.u1_lower - u[..., 0], P.eps_u2 - u[..., 1]], axis=-1
        )

    def jac_constraints_x(x, u, t):
        jac = _batch_zeros(t, 4, 2)
        jac[..., 0, 0] = -1.0
        jac[..., 1, 1] = -1.0
        return jac

    def jac_constraints_u(x, u, t):
        jac = _batch_zeros(t, 4, 2)
        jac[..., 2, 0] = -1.0
        jac[..., 3, 1] = -1.0
        return jac

    return OcpProblem(
        name="problem2",
        n=2,
        m=2,
        p=4,
        T=P.T,
        dynamics=dynamics,
        running_cost=running_cost,
        path_constraints=path_constraints,
        jac_dynamics_x=jac_dynamics_x,
        jac_dynamics_u=jac_dynamics_u,
        grad_cost_x=grad_cost_x,
        grad_cost_u=grad_cost_u,
        grad_cost_mean=grad_cost_mean,
        jac_constraints_x=jac_constraints_x,
        jac_constraints_u=jac_constraints_u,
        derivative_mode=DerivativeMode.ANALYTIC,
        cost_mean_control_coupling=(0,),
        state_scale=(P.Tbar_E, P.Tbar_S),
        control_scale=(1e4, 1e4),
        constraint_scale=(P.Tbar_E, P.Tbar_S, 1e4, 1e4),
    )
