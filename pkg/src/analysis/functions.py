"""Analytic periodic test functions for the quadrature convergence study.

Each function knows its period, the half-width of its strip of analyticity and
its sup-norm on that strip. f2 and f3 have poles on the imaginary axis, so their
sup-norm over the closed strip is attained at x = 0, y = +-beta; the closed forms
below are cross-checked by ``strip_sup_norm`` (see scripts/strip_norms.py).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.utils.errors import InvalidInputError

# Closed strip widths are shrunk by this factor so the bound sees a strictly smaller strip
STRIP_MARGIN = 0.999

F2_POLE_DISTANCE = math.log(2.0 + math.sqrt(3.0))  # Im(arccos 2)
F3_POLE_DISTANCE = math.log(4.0 + math.sqrt(17.0))  # arcsinh 4


@dataclass(frozen=True)
class AnalyticTestFunction:
    """A T-periodic function with a known antiderivative and analyticity strip."""

    id: str
    T: float
    beta: float
    sup_norm_on_strip: Optional[float]
    evaluator: Callable[[np.ndarray], np.ndarray]
    exact_cumulative: Callable[[np.ndarray], np.ndarray]

    @property
    def is_entire(self) -> bool:
        return math.isinf(self.beta)

    def __call__(self, t):
        return self.evaluator(t)


def _periodic_cumulative(
    one_period: Callable[[np.ndarray], np.ndarray], T: float, period_integral: float
) -> Callable[[np.ndarray], np.ndarray]:
    """Extend an antiderivative known on [0, T] to all real t."""

    def cumulative(t):
        t = np.asarray(t, dtype=float)
        turns = np.floor(t / T)
        return turns * period_integral + one_period(t - turns * T)

    return cumulative


def _f1_value(t):
    return 2.0 * np.sin(3.0 * t - 1.0) + 1.0


def _f1_cumulative(t):
    t = np.asarray(t, dtype=float)
    return t + (2.0 / 3.0) * (np.cos(1.0) - np.cos(3.0 * t - 1.0))


def _f2_value(t):
    return 1.0 / (2.0 - np.cos(t))


def _f2_one_period(t):
    # Weierstrass substitution; atan2 keeps the branch continuous across t = pi
    return (2.0 / math.sqrt(3.0)) * np.arctan2(math.sqrt(3.0) * np.sin(t / 2.0), np.cos(t / 2.0))


def _f3_value(t):
    return 1.0 / (np.sin(t) ** 2 + 16.0)


def _f3_one_period(t):
    return np.arctan2(math.sqrt(17.0) * np.sin(t), 4.0 * np.cos(t)) / (4.0 * math.sqrt(17.0))


def make_f1() -> AnalyticTestFunction:
    """f1(t) = 2 sin(3t - 1) + 1 on T = 2*pi/3; entire, so beta = inf."""
    return AnalyticTestFunction(
        id="f1",
        T=2.0 * math.pi / 3.0,
        beta=math.inf,
        sup_norm_on_strip=None,
        evaluator=_f1_value,
        exact_cumulative=_f1_cumulative,
    )


def make_f2(margin: float = STRIP_MARGIN) -> AnalyticTestFunction:
    """f2(t) = 1/(2 - cos t) on T = 2*pi; poles at +-i ln(2 + sqrt 3)."""
    T = 2.0 * math.pi
    beta = margin * F2_POLE_DISTANCE
    return AnalyticTestFunction(
        id="f2",
        T=T,
        beta=beta,
        sup_norm_on_strip=1.0 / (2.0 - math.cosh(beta)),
        evaluator=_f2_value,
        exact_cumulative=_periodic_cumulative(_f2_one_period, T, 2.0 * math.pi / math.sqrt(3.0)),
    )


def make_f3(margin: float = STRIP_MARGIN) -> AnalyticTestFunction:
    """f3(t) = 1/(sin^2 t + 16) on T = pi; poles at +-i arcsinh 4."""
    T = math.pi
    beta = margin * F3_POLE_DISTANCE
    return AnalyticTestFunction(
        id="f3",
        T=T,
        beta=beta,
        sup_norm_on_strip=1.0 / (16.0 - math.sinh(beta) ** 2),
        evaluator=_f3_value,
        exact_cumulative=_periodic_cumulative(
            _f3_one_period, T, math.pi / (4.0 * math.sqrt(17.0))
        ),
    )


BUILTIN_FUNCTIONS: dict[str, Callable[[], AnalyticTestFunction]] = {
    "f1": make_f1,
    "f2": make_f2,
    "f3": make_f3,
}


def get_test_function(function_id: str) -> AnalyticTestFunction:
    """Look up a built-in test function by id."""
    try:
        return BUILTIN_FUNCTIONS[function_id]()
    except KeyError:
        raise InvalidInputError(
            f"Unknown test function {function_id!r}; choose from {sorted(BUILTIN_FUNCTIONS)}",
            {"function_id": function_id},
        ) from None


def strip_sup_norm(
    evaluator: Callable[[np.ndarray], np.ndarray],
    T: float,
    beta: float,
    nx: int = 2001,
    ny: int = 201,
) -> float:
    """Grid search for max |f(x + iy)| over [0, T] x [-beta, beta].

    Args:
        evaluator: Function accepting complex arrays
        T: Period
        beta: Strip half-width
        nx: Grid points along the real axis
        ny: Grid points along the imaginary axis

    Returns:
        Largest modulus found on the grid
    """
    if not math.isfinite(beta) or beta <= 0.0:
        raise InvalidInputError(f"Strip half-width must be positive and finite, got {beta}")
    x = np.linspace(0.0, T, nx)
    y = np.linspace(-beta, beta, ny)
    z = x[None, :] + 1j * y[:, None]
    return float(np.max(np.abs(evaluator(z))))
