"""
Unit tests for the augmented Lagrangian solver and its configuration.

Run with: pytest tests/unit/test_solver.py -v

Tests:
- Textbook NLPs with known solutions (unconstrained, equality, active and
  inactive inequality)
- Stopping rules, penalty growth and the merit gradient
- KKT residuals, failure handling, determinism and multi-start
- Periodicity modes of solve_problem
- Solver config files
"""
import math

import numpy as np
import pytest

from src.control.discretizer import SolverStatus, discretize
from src.solver.auglag import (
    AugmentedLagrangian,
    DenseNlp,
    PeriodicityMode,
    kkt_residuals,
    minimize,
    multistart,
    solve,
    solve_problem,
)
from src.solver.config import SolverConfig, load_solver_config, resolve_initial_guess
from src.utils.errors import ConfigError, SolverError
from tests.conftest import central_difference_jacobian, forced_oscillator_problem, relative_error


def unconstrained_nlp() -> DenseNlp:
    """min (z0 - 3)^2 + 2 (z1 + 1)^2; solution (3, -1)."""
    return DenseNlp(
        num_vars=2,
        objective_fn=lambda z: (z[0] - 3.0) ** 2 + 2.0 * (z[1] + 1.0) ** 2,
        gradient_fn=lambda z: np.array([2.0 * (z[0] - 3.0), 4.0 * (z[1] + 1.0)]),
    )


def equality_nlp() -> DenseNlp:
    """min z0^2 + z1^2 s.t. z0 + z1 = 2; solution (1, 1), lambda = -2."""
    return DenseNlp(
        num_vars=2,
        objective_fn=lambda z: z @ z,
        gradient_fn=lambda z: 2.0 * z,
        eq_fn=lambda z: np.array([z[0] + z[1] - 2.0]),
        eq_jacobian_fn=lambda z: np.array([[1.0, 1.0]]),
    )


def active_inequality_nlp() -> DenseNlp:
    """min (z0 - 3)^2 + (z1 - 3)^2 s.t. z0 + z1 <= 2; solution (1, 1), mu = 4."""
    return DenseNlp(
        num_vars=2,
        objective_fn=lambda z: (z[0] - 3.0) ** 2 + (z[1] - 3.0) ** 2,
        gradient_fn=lambda z: 2.0 * (z - 3.0),
        ineq_fn=lambda z: np.array([z[0] + z[1] - 2.0]),
        ineq_jacobian_fn=lambda z: np.array([[1.0, 1.0]]),
    )


def inactive_inequality_nlp() -> DenseNlp:
    """min (z - 1)^2 s.t. z <= 5; solution 1, mu = 0."""
    return DenseNlp(
        num_vars=1,
        objective_fn=lambda z: (z[0] - 1.0) ** 2,
        gradient_fn=lambda z: 2.0 * (z - 1.0),
        ineq_fn=lambda z: z - 5.0,
        ineq_jacobian_fn=lambda z: np.array([[1.0]]),
    )


def infeasible_nlp() -> DenseNlp:
    """min z^2 s.t. z^2 + 1 = 0; no feasible point."""
    return DenseNlp(
        num_vars=1,
        objective_fn=lambda z: float(z[0] ** 2),
        gradient_fn=lambda z: 2.0 * z,
        eq_fn=lambda z: z**2 + 1.0,
        eq_jacobian_fn=lambda z: np.array([[2.0 * z[0]]]),
    )


class TestTextbookProblems:
    """Solve small NLPs with closed-form solutions."""

    def test_unconstrained(self, strict_config):
        """
        TEST: Without constraints the solver reduces to L-BFGS-B

        Expected: Converged at (3, -1)
        """
        print("\n🎯 Solving unconstrained quadratic...")
        result = minimize(unconstrained_nlp(), strict_config)

        assert result.status is SolverStatus.CONVERGED
        np.testing.assert_allclose(result.z, [3.0, -1.0], atol=1e-6)
        assert result.eq_inf == 0.0 and result.ineq_violation == 0.0
        print(f"✅ Converged in {result.outer_iters} outer iterations")

    def test_equality(self, strict_config):
        """
        TEST: Linear equality constraint from an infeasible start

        Expected: Converged at (1, 1) with ||h|| <= 1e-9
        """
        result = minimize(equality_nlp(), strict_config, z0=np.array([3.0, -2.0]))

        assert result.converged
        np.testing.assert_allclose(result.z, [1.0, 1.0], atol=1e-6)
        assert result.eq_inf <= 1e-9
        assert result.eq_multipliers.shape == (1,)

    def test_active_inequality(self, strict_config):
        """
        TEST: The unconstrained minimiser (3, 3) violates z0 + z1 <= 2

        Expected: Converged on the boundary at (1, 1) with a positive multiplier
        """
        result = minimize(active_inequality_nlp(), strict_config)

        assert result.converged
        np.testing.assert_allclose(result.z, [1.0, 1.0], atol=1e-6)
        assert result.ineq_violation <= 1e-9
        assert result.ineq_multipliers[0] > 0.0

    def test_inactive_inequality(self, strict_config):
        result = minimize(inactive_inequality_nlp(), strict_config, z0=np.array([4.0]))

        assert result.converged
        assert abs(result.z[0] - 1.0) <= 1e-6
        assert result.ineq_multipliers[0] == 0.0

    def test_objective_or_feasibility_improves(self):
        """
        TEST: The returned point is no worse than the start

        Expected: J drops or the constraint violation drops
        """
        nlp = active_inequality_nlp()
        z0 = np.array([4.0, 4.0])
        result = minimize(nlp, SolverConfig(max_outer_iters=3), z0=z0)

        start_violation = max(0.0, float(nlp.ineq_constraints(z0)[0]))
        assert result.objective <= nlp.objective(z0) or result.ineq_violation < start_violation

    def test_history_recorded(self, strict_config):
        result = minimize(equality_nlp(), strict_config, z0=np.array([3.0, -2.0]))

        assert len(result.history) == result.outer_iters
        assert [h.iteration for h in result.history] == list(range(1, result.outer_iters + 1))
        assert all(h.penalty >= strict_config.initial_penalty for h in result.history)


class TestSolverFailures:
    """Test non-convergence and failure reporting."""

    def test_infeasible_problem_not_converged(self):
        """
        TEST: z^2 + 1 = 0 has no solution

        Expected: max_iter or stalled, best iterate returned with eq_inf >= 1
        """
        result = minimize(infeasible_nlp(), SolverConfig(max_outer_iters=30))

        assert result.status in (SolverStatus.MAX_ITER, SolverStatus.STALLED)
        assert result.eq_inf >= 1.0 - 1e-9
        assert result.message

    def test_nan_objective_fails(self):
        nlp = DenseNlp(
            num_vars=2,
            objective_fn=lambda z: float("nan"),
            gradient_fn=lambda z: np.zeros(2),
        )
        result = minimize(nlp)

        assert result.status is SolverStatus.FAILED
        assert result.outer_iters == 0
        assert "non-finite" in result.message

    def test_wrong_initial_guess_length(self):
        with pytest.raises(SolverError):
            minimize(unconstrained_nlp(), z0=np.zeros(3))
        with pytest.raises(SolverError):
            minimize(unconstrained_nlp(), SolverConfig(initial_guess=[1.0, 2.0, 3.0]))


class TestStoppingRules:
    """Convergence comes only from the step or objective rule; the penalty reacts to stalls."""

    @pytest.mark.parametrize(
        "factory,z0",
        [
            (unconstrained_nlp, None),
            (equality_nlp, np.array([3.0, -2.0])),
            (active_inequality_nlp, None),
            (inactive_inequality_nlp, np.array([4.0])),
        ],
    )
    def test_converged_by_step_or_objective(self, factory, z0):
        """
        TEST: Every converged textbook run names the rule that stopped it

        Expected: "step" or "objective", and the final iterate is feasible
        """
        config = SolverConfig()
        result = minimize(factory(), config, z0=z0)

        assert result.converged, result.message
        assert result.message in ("converged by step rule", "converged by objective rule")
        last = result.history[-1]
        assert last.eq_inf <= config.eq_tolerance
        assert last.ineq_violation <= config.ineq_tolerance
        if result.message == "converged by step rule":
            assert last.step <= config.step_tolerance

    def test_optimality_tolerance_not_a_setting(self):
        with pytest.raises(ValueError):
            SolverConfig(optimality_tolerance=1e-6)

    @pytest.mark.parametrize(
        "factory,z0,max_outer",
        [
            (infeasible_nlp, None, 30),
            (equality_nlp, np.array([3.0, -2.0]), 100),
            (active_inequality_nlp, np.array([4.0, 4.0]), 100),
        ],
    )
    def test_infeasibility_shrinks_or_penalty_grows(self, factory, z0, max_outer):
        """
        TEST: Between consecutive outer iterations the scaled infeasibility does
        not increase, or else the penalty grows (or already sits at its cap)

        Expected: The rule holds for every pair before a converged final step
        """
        config = SolverConfig(max_outer_iters=max_outer)
        result = minimize(factory(), config, z0=z0)

        history = result.history[:-1] if result.converged else result.history
        for prev, cur in zip(history, history[1:]):
            assert (
                cur.infeasibility <= prev.infeasibility
                or cur.penalty > prev.penalty
                or cur.penalty == config.penalty_max
            ), (prev, cur)

    def test_infeasible_problem_drives_penalty_up(self):
        result = minimize(infeasible_nlp(), SolverConfig(max_outer_iters=30))

        penalties = [h.penalty for h in result.history]
        assert penalties == sorted(penalties)
        assert penalties[-1] > penalties[0]


class TestMeritGradient:
    """AugmentedLagrangian.value_and_grad against central differences."""

    @pytest.mark.parametrize("periodic", [True, False])
    @pytest.mark.parametrize("factory", ["problem1", "problem2"])
    def test_gradient_at_initial_guess(self, factory, periodic, rng, request):
        """
        TEST: Gradient of the scaled merit function in y = z / scale at the
        all-ones guess, with nonzero equality multipliers

        Expected: Relative deviation <= 1e-5
        """
        nlp = discretize(request.getfixturevalue(factory), 8, enforce_periodicity=periodic)
        z0 = np.ones(nlp.num_vars)
        al = AugmentedLagrangian(
            nlp,
            variable_scale=nlp.variable_scale,
            eq_scale=nlp.eq_scale,
            ineq_scale=nlp.ineq_scale,
            objective_scale=1.0 / max(1.0, abs(nlp.objective(z0))),
            penalty=10.0,
        )
        al.eq_multipliers = rng.normal(size=nlp.num_eq)
        y0 = al.to_y(z0)

        _, analytic = al.value_and_grad(y0)
        numeric = central_difference_jacobian(lambda y: al.value_and_grad(y)[0], y0)

        assert analytic.shape == (nlp.num_vars,)
        assert relative_error(analytic, numeric) <= 1e-5


class TestKktResiduals:
    """Test kkt_residuals."""

    def test_zero_at_solution(self):
        stationarity, eq_inf, ineq, comp = kkt_residuals(
            equality_nlp(), np.array([1.0, 1.0]), (np.array([-2.0]), np.zeros(0))
        )
        assert stationarity == pytest.approx(0.0, abs=1e-15)
        assert eq_inf == 0.0 and ineq == 0.0 and comp == 0.0

    def test_active_inequality_at_solution(self):
        residuals = kkt_residuals(
            active_inequality_nlp(), np.array([1.0, 1.0]), (np.zeros(0), np.array([4.0]))
        )
        assert residuals == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-15)

    def test_default_multipliers_are_zero(self):
        stationarity, eq_inf, _, _ = kkt_residuals(equality_nlp(), np.array([1.0, 1.0]))
        assert stationarity == 2.0
        assert eq_inf == 0.0

    def test_violation_and_complementarity(self):
        _, _, ineq, comp = kkt_residuals(
            active_inequality_nlp(), np.array([2.0, 2.0]), (np.zeros(0), np.array([0.5]))
        )
        assert ineq == 2.0
        assert comp == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(SolverError):
            kkt_residuals(equality_nlp(), np.array([1.0, 1.0]), (np.zeros(2), np.zeros(0)))
        with pytest.raises(SolverError):
            kkt_residuals(equality_nlp(), np.array([1.0]))


class TestDeterminism:
    """Identical inputs give identical outputs."""

    def test_minimize_repeatable(self, strict_config):
        first = minimize(active_inequality_nlp(), strict_config)
        second = minimize(active_inequality_nlp(), strict_config)

        assert np.array_equal(first.z, second.z)
        assert first.outer_iters == second.outer_iters

    def test_multistart_independent_of_threads(self):
        """
        TEST: Seeded restarts pick the same winner however many workers run them

        Expected: Same index and bitwise-equal solution
        """
        config = SolverConfig(multistart_restarts=3, seed=7, inner_tolerance=1e-8)
        serial, serial_index = multistart(active_inequality_nlp(), config, threads=1)
        parallel, parallel_index = multistart(active_inequality_nlp(), config, threads=4)

        assert serial_index == parallel_index
        assert np.array_equal(serial.z, parallel.z)
        assert serial.converged


class TestSolveDiscretized:
    """Test solve on a transcribed problem."""

    def test_forced_oscillator(self):
        """
        TEST: Minimising the mean of x^2 + u^2 for x' = cos(2 pi t/T)

        Expected: x = T sin(2 pi t/T)/(2 pi), u = 0 and J_N = 1/(2 w^2)
        """
        print("\n🚀 Solving transcribed forced oscillator...")
        prob = forced_oscillator_problem()
        w = 2.0 * math.pi / prob.T
        report = solve(discretize(prob, 8))

        assert report.converged, report.message
        assert report.J_N == pytest.approx(1.0 / (2.0 * w**2), rel=1e-6)
        assert report.adfe_inf <= 1e-9
        np.testing.assert_allclose(report.u_array, 0.0, atol=1e-5)
        assert report.wall_time_s >= 0.0
        assert report.kkt is not None
        print(f"✅ J_N={report.J_N:.10e}")


class TestSolveProblem:
    """Test solve_problem periodicity modes."""

    @pytest.mark.parametrize("mode,flag", [("on", True), ("off", False)])
    def test_fixed_modes(self, mode, flag):
        report = solve_problem(forced_oscillator_problem(), 8, periodicity=mode)

        assert report.enforce_periodicity is flag
        assert report.converged, report.message

    def test_best_keeps_lower_converged_objective(self, problem1):
        """
        TEST: Problem 1 solved with the rows on, off and best-of-both

        Expected: best returns the converged report with the lower J_N
        """
        print("\n🔁 Solving Problem 1 with periodicity rows on and off...")
        on = solve_problem(problem1, 12, periodicity=PeriodicityMode.ON)
        off = solve_problem(problem1, 12, periodicity=PeriodicityMode.OFF)
        best = solve_problem(problem1, 12)

        candidates = [r for r in (on, off) if r.converged]
        assert best.converged
        assert best.J_N == min(r.J_N for r in candidates)
        expected = on if on.converged and (not off.converged or on.J_N <= off.J_N) else off
        assert best.enforce_periodicity is expected.enforce_periodicity
        print(f"✅ on J_N={on.J_N:.6e}, off J_N={off.J_N:.6e}, kept {best.J_N:.6e}")

    def test_invalid_mode(self, problem1):
        with pytest.raises(ValueError):
            solve_problem(problem1, 8, periodicity="sometimes")


class TestSolverConfig:
    """Test SolverConfig validation and file loading."""

    def test_defaults(self):
        config = SolverConfig()
        assert config.max_outer_iters == 100
        assert config.initial_guess == "ones"
        assert config.feasibility_polish is True
        np.testing.assert_array_equal(resolve_initial_guess(config, 3), np.ones(3))

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(max_iterations=5)

    def test_load_file(self, tmp_path):
        """
        TEST: key=value file with mixed-case keys and an explicit initial guess

        Expected: Values override defaults and the guess is parsed as floats
        """
        path = tmp_path / "solver.env"
        path.write_text(
            "# solver settings\n"
            "MAX_OUTER_ITERS=20\n"
            "initial_penalty=100\n"
            "feasibility_polish=false\n"
            "initial_guess=1.0, -2.5\n"
        )
        config = load_solver_config(path)

        assert config.max_outer_iters == 20
        assert config.initial_penalty == 100.0
        assert config.feasibility_polish is False
        assert config.initial_guess == [1.0, -2.5]

    def test_unknown_key_in_file(self, tmp_path):
        path = tmp_path / "solver.env"
        path.write_text("max_iterations=5\n")

        with pytest.raises(ConfigError) as exc:
            load_solver_config(path)
        assert exc.value.code == "E005"

    def test_invalid_value_in_file(self, tmp_path):
        path = tmp_path / "solver.env"
        path.write_text("penalty_growth=0.5\n")

        with pytest.raises(ConfigError):
            load_solver_config(path)

    def test_bad_initial_guess_in_file(self, tmp_path):
        path = tmp_path / "solver.env"
        path.write_text("initial_guess=1.0,abc\n")

        with pytest.raises(ConfigError):
            load_solver_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_solver_config(tmp_path / "absent.env")
