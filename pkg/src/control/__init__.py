from src.control.discretizer import (
    DiscreteNlp,
    KktSummary,
    SolveReport,
    SolverStatus,
    TrajectorySample,
    build_report,
    compute_adfe,
    discretize,
    objective_and_gradient,
    recover_solution,
    sample_trajectory,
)
from src.control.ocp import (
    CheckResult,
    DerivativeMode,
    OcpProblem,
    ValidationReport,
    central_difference,
    require_valid,
    validate_problem,
)
from src.control.problems import (
    REFERENCE_ROWS,
    Problem1Params,
    Problem2Params,
    ReferenceRow,
    ambient_temperature,
    insolation,
    make_problem1,
    make_problem2,
)

__all__ = [
    "DiscreteNlp",
    "KktSummary",
    "SolveReport",
    "SolverStatus",
    "TrajectorySample",
    "build_report",
    "compute_adfe",
    "discretize",
    "objective_and_gradient",
    "recover_solution",
    "sample_trajectory",
    "CheckResult",
    "DerivativeMode",
    "OcpProblem",
    "ValidationReport",
    "central_difference",
    "require_valid",
    "validate_problem",
    "REFERENCE_ROWS",
    "Problem1Params",
    "Problem2Params",
    "ReferenceRow",
    "ambient_temperature",
    "insolation",
    "make_problem1",
    "make_problem2",
]
