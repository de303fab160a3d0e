from src.analysis.error_bounds import (
    ConvergenceReport,
    ConvergenceRow,
    fpsq_error_bound,
    mu_factor,
    quadrature_errors,
    run_convergence_study,
)
from src.analysis.functions import (
    BUILTIN_FUNCTIONS,
    AnalyticTestFunction,
    get_test_function,
    make_f1,
    make_f2,
    make_f3,
    strip_sup_norm,
)

__all__ = [
    "ConvergenceReport",
    "ConvergenceRow",
    "fpsq_error_bound",
    "mu_factor",
    "quadrature_errors",
    "run_convergence_study",
    "BUILTIN_FUNCTIONS",
    "AnalyticTestFunction",
    "get_test_function",
    "make_f1",
    "make_f2",
    "make_f3",
    "strip_sup_norm",
]
