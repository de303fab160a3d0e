"""
Unit tests for the pseudospectral transcription.

Run with: pytest tests/unit/test_discretizer.py -v

Tests:
- Decision vector layout and NLP sizes
- Objective, equality and inequality values on known trajectories
- Analytic derivatives against central differences
- Feasibility error, solution recovery and report assembly
"""
import dataclasses
import math

import numpy as np
import pytest

from src.control.discretizer import (
    SolverStatus,
    build_report,
    compute_adfe,
    discretize,
    objective_and_gradient,
    recover_solution,
    sample_trajectory,
)
from src.control.ocp import OcpProblem
from src.utils.errors import InvalidInputError, ProblemDefinitionError
from tests.conftest import (
    central_difference_jacobian,
    forced_oscillator_problem,
    relative_error,
)


def _batch(t, *shape):
    return np.zeros(np.shape(t) + shape)


def _unit_cost() -> OcpProblem:
    """f = 0 and g = 1."""
    return OcpProblem(
        name="unit",
        n=2,
        m=1,
        p=0,
        T=1.0,
        dynamics=lambda x, u, t: np.zeros_like(x),
        running_cost=lambda x, u, t, m: np.ones(np.shape(t)),
        jac_dynamics_x=lambda x, u, t: _batch(t, 2, 2),
        jac_dynamics_u=lambda x, u, t: _batch(t, 2, 1),
        grad_cost_x=lambda x, u, t, m: np.zeros_like(x),
        grad_cost_u=lambda x, u, t, m: np.zeros_like(u),
    )


DERIVATIVE_POINTS = 5


def _random_point(nlp, rng) -> np.ndarray:
    return nlp.variable_scale * rng.uniform(0.5, 1.5, size=nlp.num_vars)


class TestDiscretize:
    """Test NLP construction."""

    @pytest.mark.parametrize("N,periodic", [(8, True), (12, False)])
    def test_sizes(self, problem2, N, periodic):
        nlp = discretize(problem2, N, enforce_periodicity=periodic)

        assert nlp.num_vars == 4 * N
        assert nlp.num_eq == 2 * N + (2 if periodic else 0)
        assert nlp.num_ineq == 4 * N
        assert nlp.fim.shape == (N, N)
        assert nlp.terminal_row.shape == (1, N)

    @pytest.mark.parametrize("N", [2, 7, 0])
    def test_bad_node_count(self, problem1, N):
        with pytest.raises(InvalidInputError):
            discretize(problem1, N)

    def test_invalid_problem_rejected(self, problem1):
        with pytest.raises(ProblemDefinitionError):
            discretize(dataclasses.replace(problem1, grad_cost_u=None), 8)

    def test_layout_is_component_major(self, problem2):
        """
        TEST: z = [x_1 nodes, x_2 nodes, u_1 nodes, u_2 nodes]

        Expected: decode/encode use that layout and invert each other
        """
        nlp = discretize(problem2, 4)
        z = np.arange(16.0)
        X, U = nlp.decode(z)

        np.testing.assert_array_equal(X[:, 0], [0, 1, 2, 3])
        np.testing.assert_array_equal(X[:, 1], [4, 5, 6, 7])
        np.testing.assert_array_equal(U[:, 0], [8, 9, 10, 11])
        np.testing.assert_array_equal(nlp.encode(X, U), z)

    def test_decode_wrong_length(self, problem1):
        nlp = discretize(problem1, 8)
        with pytest.raises(InvalidInputError):
            nlp.decode(np.zeros(10))

    def test_scales_follow_layout(self, problem2):
        nlp = discretize(problem2, 4)
        np.testing.assert_array_equal(nlp.variable_scale[:4], 20.0)
        np.testing.assert_array_equal(nlp.variable_scale[4:8], 30.0)
        np.testing.assert_array_equal(nlp.variable_scale[8:], 1e4)
        np.testing.assert_array_equal(nlp.eq_scale[-2:], [20.0, 30.0])
        np.testing.assert_array_equal(nlp.ineq_scale[:4], [20.0, 30.0, 1e4, 1e4])


class TestNlpValues:
    """Test objective and constraint values on known points."""

    def test_unit_cost_and_zero_dynamics(self, rng):
        """
        TEST: f = 0, g = 1 with constant states

        Expected: J_N = 1, zero gradient, zero equality residual
        """
        nlp = discretize(_unit_cost(), 8)
        X = np.tile(rng.normal(size=2), (8, 1))
        z = nlp.encode(X, rng.normal(size=(8, 1)))

        value, grad = objective_and_gradient(nlp, z)
        assert value == pytest.approx(1.0, abs=1e-15)
        assert np.all(grad == 0.0)
        assert np.max(np.abs(nlp.eq_constraints(z))) <= 1e-15

    def test_problem1_static_solution(self, problem1):
        """
        TEST: x = 0, u = 0 is a feasible stationary point of Problem 1

        Expected: J_N = 0, zero gradient, zero residuals
        """
        nlp = discretize(problem1, 12)
        z = np.zeros(nlp.num_vars)

        assert nlp.objective(z) == 0.0
        assert np.all(nlp.objective_gradient(z) == 0.0)
        assert np.all(nlp.eq_constraints(z) == 0.0)
        assert nlp.ineq_constraints(z).shape == (0,)
        assert nlp.ineq_jacobian(z).shape == (0, nlp.num_vars)

    def test_manufactured_trajectory(self):
        """
        TEST: Sampling the exact solution of x' = cos(2 pi t/T) satisfies the collocation

        Expected: Equality residual (periodicity rows included) <= 1e-12
        """
        print("\n🧪 Testing manufactured solution...")
        prob = forced_oscillator_problem()
        nlp = discretize(prob, 8)
        w = 2.0 * math.pi / prob.T
        X = (np.sin(w * nlp.grid.nodes) / w)[:, None]
        z = nlp.encode(X, np.zeros((8, 1)))

        assert np.max(np.abs(nlp.eq_constraints(z))) <= 1e-12
        print("✅ Collocation residual at roundoff")

    def test_row_zero_residual_vanishes(self, problem2, rng):
        """
        TEST: The l = 0 residual is x(t_0) - x(t_0) - 0 for every component

        Expected: Exactly zero at any z
        """
        nlp = discretize(problem2, 8)
        residual = nlp.eq_constraints(_random_point(nlp, rng))

        assert residual[0] == 0.0
        assert residual[8] == 0.0

    def test_inequalities_node_major(self, problem2, rng):
        nlp = discretize(problem2, 4)
        z = _random_point(nlp, rng)
        X, U = nlp.decode(z)
        c = nlp.ineq_constraints(z)

        expected = problem2.constraints(X[1], U[1], nlp.grid.nodes[1])
        np.testing.assert_array_equal(c[4:8], expected)

    def test_control_mean(self, problem2):
        nlp = discretize(problem2, 8)
        U = np.column_stack([np.arange(8.0), np.full(8, 3.0)])
        np.testing.assert_allclose(nlp.control_mean(U), [3.5, 3.0], rtol=1e-14)


class TestNlpDerivatives:
    """Analytic gradients and Jacobians against central differences."""

    @pytest.mark.parametrize("N", [8, 12])
    @pytest.mark.parametrize("factory", ["problem1", "problem2"])
    def test_objective_gradient(self, factory, N, rng, request):
        """
        TEST: dJ_N/dz, mean-coupling path included

        Expected: Relative deviation <= 1e-6
        """
        nlp = discretize(request.getfixturevalue(factory), N)
        for _ in range(DERIVATIVE_POINTS):
            z = _random_point(nlp, rng)
            numeric = central_difference_jacobian(nlp.objective, z)
            assert relative_error(nlp.objective_gradient(z), numeric) <= 1e-6

    @pytest.mark.parametrize("N", [8, 12])
    @pytest.mark.parametrize("factory", ["problem1", "problem2"])
    @pytest.mark.parametrize("periodic", [True, False])
    def test_eq_jacobian(self, factory, N, periodic, rng, request):
        nlp = discretize(request.getfixturevalue(factory), N, enforce_periodicity=periodic)
        for _ in range(DERIVATIVE_POINTS):
            z = _random_point(nlp, rng)
            numeric = central_difference_jacobian(nlp.eq_constraints, z)
            analytic = nlp.eq_jacobian(z)
            assert analytic.shape == (nlp.num_eq, nlp.num_vars)
            assert relative_error(analytic, numeric) <= 1e-6

    @pytest.mark.parametrize("N", [8, 12])
    def test_ineq_jacobian(self, problem2, N, rng):
        nlp = discretize(problem2, N)
        for _ in range(DERIVATIVE_POINTS):
            z = _random_point(nlp, rng)
            numeric = central_difference_jacobian(nlp.ineq_constraints, z)
            analytic = nlp.ineq_jacobian(z)
            assert analytic.shape == (nlp.num_ineq, nlp.num_vars)
            assert relative_error(analytic, numeric) <= 1e-9

    def test_mean_coupling_gradient(self, problem2):
        """
        TEST: With Q_aux constant the deviation term drops out

        Expected: dJ/dQ_aux_j = 1/N for every node
        """
        nlp = discretize(problem2, 8)
        X = np.tile([20.0, 30.0], (8, 1))
        U = np.tile([9000.0, 100.0], (8, 1))
        grad = nlp.objective_gradient(nlp.encode(X, U))

        np.testing.assert_allclose(grad[16:24], 1.0 / 8.0, rtol=1e-14)
        np.testing.assert_allclose(grad[:16], 0.0, atol=1e-12)
        np.testing.assert_allclose(grad[24:], 0.0, atol=1e-12)


class TestFeasibilityAndRecovery:
    """Test ADFE, reports and interpolated trajectories."""

    def _exact_report(self):
        prob = forced_oscillator_problem()
        nlp = discretize(prob, 8)
        w = 2.0 * math.pi / prob.T
        X = (np.sin(w * nlp.grid.nodes) / w)[:, None]
        z = nlp.encode(X, np.zeros((8, 1)))
        report = build_report(
            nlp, z, solver_iters=3, inner_iters=10, status=SolverStatus.CONVERGED
        )
        return nlp, report, w

    def test_adfe_of_exact_solution(self):
        nlp, report, _ = self._exact_report()

        assert len(report.adfe) == 8
        assert report.adfe_inf <= 1e-12
        np.testing.assert_allclose(
            compute_adfe(nlp.problem, nlp.grid, nlp.fim, report.x_nodes, report.u_nodes),
            report.adfe,
        )

    def test_adfe_detects_infeasibility(self, problem1):
        nlp = discretize(problem1, 8)
        X = np.zeros((8, 2))
        X[3, 0] = 0.5
        adfe = compute_adfe(problem1, nlp.grid, nlp.fim, X, np.zeros((8, 1)))

        assert adfe[3] == pytest.approx(0.5)
        assert adfe.shape == (16,)

    def test_adfe_shape_mismatch(self, problem1):
        nlp = discretize(problem1, 8)
        with pytest.raises(InvalidInputError):
            compute_adfe(problem1, nlp.grid, nlp.fim, np.zeros((7, 2)), np.zeros((8, 1)))

    def test_report_fields(self):
        _, report, w = self._exact_report()

        assert report.converged
        assert report.problem == "forced"
        assert report.x_array.shape == (8, 1)
        assert report.constraint_slack_minima == []
        assert abs(report.mean_state[0]) <= 1e-15
        assert report.J_N == pytest.approx(1.0 / (2.0 * w**2), rel=1e-12)

    def test_recover_between_nodes(self, rng):
        """
        TEST: The interpolated state matches the band-limited exact solution

        Expected: Agreement to 1e-12 at random times
        """
        nlp, report, w = self._exact_report()
        t = rng.uniform(0.0, nlp.grid.T, size=25)

        x, u = recover_solution(report, nlp.grid, t)

        assert x.shape == (25, 1) and u.shape == (25, 1)
        np.testing.assert_allclose(x[:, 0], np.sin(w * t) / w, atol=1e-12)

    def test_sample_trajectory(self):
        nlp, report, _ = self._exact_report()
        sample = sample_trajectory(report, nlp.grid, 16)

        assert len(sample.t) == 16
        assert sample.t[0] == 0.0 and sample.t[-1] < nlp.grid.T
        np.testing.assert_allclose(np.array(sample.x)[::2], report.x_array, atol=1e-13)

    def test_sample_trajectory_rejects_zero(self):
        nlp, report, _ = self._exact_report()
        with pytest.raises(InvalidInputError):
            sample_trajectory(report, nlp.grid, 0)
