"""
Test configuration and fixtures.

This file is loaded automatically by pytest.
Fixtures are available to all test files.
"""
import math

import numpy as np
import pytest

from src.control.ocp import OcpProblem
from src.control.problems import make_problem1, make_problem2
from src.solver.config import SolverConfig
from src.spectral.grid import make_grid


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so every randomized test is reproducible."""
    return np.random.default_rng(12345)


@pytest.fixture
def grid8():
    """N=8 grid on one 2*pi period."""
    return make_grid(8, 2.0 * math.pi)


@pytest.fixture
def problem1():
    return make_problem1()


@pytest.fixture
def problem2():
    return make_problem2()


@pytest.fixture
def strict_config() -> SolverConfig:
    """Tighter first inner solve for small textbook NLPs."""
    return SolverConfig(inner_tolerance=1e-8)


def central_difference_jacobian(fun, z: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Dense Jacobian of a vector (or scalar) function by central differences."""
    z = np.asarray(z, dtype=float)
    columns = []
    for i in range(z.size):
        h = rel_step * (1.0 + abs(z[i]))
        plus, minus = z.copy(), z.copy()
        plus[i] += h
        minus[i] -= h
        columns.append((np.asarray(fun(plus)) - np.asarray(fun(minus))) / (plus[i] - minus[i]))
    return np.stack(columns, axis=-1)


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max deviation normalised by max(1, max|expected|)."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if expected.size == 0:
        return 0.0
    return float(np.max(np.abs(actual - expected)) / max(1.0, float(np.max(np.abs(expected)))))


def forced_oscillator_problem(T: float = 2.0) -> OcpProblem:
    """x' = cos(2 pi t/T) with an inert control; exact state T sin(2 pi t/T)/(2 pi)."""
    w = 2.0 * math.pi / T

    def zeros(t):
        return np.zeros(np.shape(t) + (1, 1))

    return OcpProblem(
        name="forced",
        n=1,
        m=1,
        p=0,
        T=T,
        dynamics=lambda x, u, t: np.cos(w * np.asarray(t))[..., None] + 0.0 * x,
        running_cost=lambda x, u, t, m: x[..., 0] ** 2 + u[..., 0] ** 2,
        jac_dynamics_x=lambda x, u, t: zeros(t),
        jac_dynamics_u=lambda x, u, t: zeros(t),
        grad_cost_x=lambda x, u, t, m: 2.0 * x,
        grad_cost_u=lambda x, u, t, m: 2.0 * u,
    )
