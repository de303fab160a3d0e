from src.solver.auglag import (
    AugmentedLagrangian,
    DenseNlp,
    OuterIteration,
    PeriodicityMode,
    SolverResult,
    kkt_residuals,
    minimize,
    multistart,
    solve,
    solve_problem,
)
from src.solver.config import SolverConfig, load_solver_config, resolve_initial_guess

__all__ = [
    "AugmentedLagrangian",
    "DenseNlp",
    "OuterIteration",
    "SolverResult",
    "kkt_residuals",
    "minimize",
    "multistart",
    "PeriodicityMode",
    "solve",
    "solve_problem",
    "SolverConfig",
    "load_solver_config",
    "resolve_initial_guess",
]
