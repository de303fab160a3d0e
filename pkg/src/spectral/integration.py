"""Fourier integration matrices (FIMs).

Row l of a FIM holds the integrals over [0, y_l] of the cardinal functions F_j,
so applying it to nodal samples integrates the trigonometric interpolant.
Entries come from the complex exponential sum over k != 0, with the Nyquist
wavenumber split evenly between k = -N/2 and k = N/2; the real part is the
integral of the real cardinal function and the leftover imaginary part is pure
roundoff, recorded as ``max_imag_residual``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional, Sequence

import numpy as np

from src.spectral.grid import EquispacedGrid
from src.utils.errors import InvalidInputError, QuadratureError
from src.utils.logging import get_logger

logger = get_logger(__name__)

IMAG_RESIDUAL_WARN = 1e-11
IMAG_RESIDUAL_LIMIT = 1e-8
NODE_COINCIDENCE_RTOL = 1e-12

Summation = Literal["complex", "paired"]


class FimKind(str, Enum):
    SQUARE = "square"
    RECTANGULAR = "rectangular"
    TERMINAL_ROW = "terminal_row"


@dataclass(frozen=True)
class IntegrationMatrix:
    """Quadrature operator mapping N nodal samples to M cumulative integrals."""

    kind: FimKind
    grid: EquispacedGrid
    entries: np.ndarray = field(repr=False, compare=False)
    eval_points: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    max_imag_residual: float = 0.0

    def __post_init__(self):
        self.entries.setflags(write=False)
        if self.eval_points is not None:
            self.eval_points.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def upper_limits(self) -> np.ndarray:
        """Upper integration limit of every row."""
        if self.kind is FimKind.SQUARE:
            return self.grid.nodes
        if self.kind is FimKind.TERMINAL_ROW:
            return np.array([self.grid.T])
        return self.eval_points

    def apply(self, samples) -> np.ndarray:
        return apply_quadrature(self, samples)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "N": self.grid.N,
            "T": self.grid.T,
            "eval_points": None if self.eval_points is None else self.eval_points.tolist(),
            "entries": self.entries.tolist(),
            "max_imag_residual": self.max_imag_residual,
        }


def _nonzero_wavenumbers(N: int) -> tuple[np.ndarray, np.ndarray]:
    """k in {-N/2, ..., N/2} minus {0}, with weight 1/2 on the two Nyquist terms."""
    half = N // 2
    k = np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])
    weights = np.where(np.abs(k) == half, 0.5, 1.0)
    return k, weights


def _node_phases(grid: EquispacedGrid, k: np.ndarray) -> np.ndarray:
    """omega_k * t_j as exact multiples of 2*pi/N; shape (len(k), N)."""
    j = np.arange(grid.N)
    return 2.0 * np.pi * np.mod(np.outer(k, j), grid.N) / grid.N


def _point_phases(grid: EquispacedGrid, k: np.ndarray, points: np.ndarray) -> np.ndarray:
    """omega_k * y_l reduced to one turn; shape (M, len(k))."""
    turns = np.mod(np.outer(points / grid.T, k), 1.0)
    return 2.0 * np.pi * turns


def _complex_entries(
    grid: EquispacedGrid, upper: np.ndarray, upper_phases: np.ndarray, k: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, float]:
    node_terms = np.exp(-1j * _node_phases(grid, k))
    upper_terms = (1.0 - np.exp(1j * upper_phases)) * (w / k)
    total = upper_terms @ node_terms
    entries = (upper[:, None] + (grid.T * 1j / (2.0 * np.pi)) * total) / grid.N
    return entries.real.copy(), float(np.max(np.abs(entries.imag)))


def _paired_entries(
    grid: EquispacedGrid, upper: np.ndarray, upper_phases: np.ndarray, k: np.ndarray, w: np.ndarray
) -> np.ndarray:
    # Real arithmetic: terms k and -k combine to (T/(pi*k)) [sin a + sin(b - a)]
    positive = k > 0
    kp, wp = k[positive], w[positive]
    alpha = _node_phases(grid, kp)
    beta = upper_phases[:, positive]
    c = wp * grid.T / (np.pi * kp)
    sin_a, cos_a = np.sin(alpha), np.cos(alpha)
    total = (
        (c @ sin_a)[None, :]
        + (np.sin(beta) * c) @ cos_a
        - (np.cos(beta) * c) @ sin_a
    )
    return (upper[:, None] + total) / grid.N


def _build(
    grid: EquispacedGrid,
    upper: np.ndarray,
    upper_phases: np.ndarray,
    summation: Summation,
) -> tuple[np.ndarray, float]:
    k, w = _nonzero_wavenumbers(grid.N)
    if summation == "complex":
        entries, residual = _complex_entries(grid, upper, upper_phases, k, w)
    elif summation == "paired":
        entries, residual = _paired_entries(grid, upper, upper_phases, k, w), 0.0
    else:
        raise InvalidInputError(f"Unknown summation {summation!r}", {"summation": summation})

    if residual > IMAG_RESIDUAL_LIMIT:
        raise QuadratureError(
            f"Imaginary residual {residual:.3e} exceeds {IMAG_RESIDUAL_LIMIT:.0e}",
            {"N": grid.N, "T": grid.T, "max_imag_residual": residual},
        )
    if residual > IMAG_RESIDUAL_WARN:
        logger.warning(f"FIM imaginary residual {residual:.3e} for N={grid.N}")
    return entries, residual


def build_square_fim(grid: EquispacedGrid, summation: Summation = "complex") -> IntegrationMatrix:
    """Square FIM: row l integrates the interpolant over [0, t_l].

    Args:
        grid: Interpolation grid
        summation: "complex" exponential sum or the equivalent real "paired" form

    Returns:
        N x N IntegrationMatrix whose first row is zero
    """
    k, _ = _nonzero_wavenumbers(grid.N)
    upper_phases = _node_phases(grid, k).T
    entries, residual = _build(grid, grid.nodes, upper_phases, summation)
    logger.debug(f"Square FIM N={grid.N} T={grid.T} imag residual {residual:.2e}")
    return IntegrationMatrix(
        kind=FimKind.SQUARE, grid=grid, entries=entries, max_imag_residual=residual
    )


def build_rectangular_fim(
    grid: EquispacedGrid, eval_points: Sequence[float], summation: Summation = "complex"
) -> IntegrationMatrix:
    """Rectangular FIM: row l integrates the interpolant over [0, y_l].

    Args:
        grid: Interpolation grid
        eval_points: Upper limits y_l in (0, T], none on a grid node
        summation: "complex" exponential sum or the equivalent real "paired" form

    Returns:
        M x N IntegrationMatrix
    """
    points = np.array(eval_points, dtype=float).reshape(-1)
    if points.size == 0:
        raise InvalidInputError("At least one evaluation point is required")
    outside = points[(points <= 0.0) | (points > grid.T) | ~np.isfinite(points)]
    if outside.size:
        raise InvalidInputError(
            f"Evaluation points must lie in (0, {grid.T}]", {"outside": outside.tolist()}
        )
    for y in points:
        j = grid.node_index(y, rtol=NODE_COINCIDENCE_RTOL)
        if j is not None:
            raise InvalidInputError(
                f"Evaluation point {y} coincides with node t_{j}; use row {j} of the square FIM",
                {"point": float(y), "node_index": j},
            )

    k, _ = _nonzero_wavenumbers(grid.N)
    entries, residual = _build(grid, points, _point_phases(grid, k, points), summation)
    return IntegrationMatrix(
        kind=FimKind.RECTANGULAR,
        grid=grid,
        entries=entries,
        eval_points=points,
        max_imag_residual=residual,
    )


def terminal_quadrature(grid: EquispacedGrid) -> IntegrationMatrix:
    """Full-period row Theta_N = (T/N) 1^t, built directly."""
    entries = np.full((1, grid.N), grid.T / grid.N)
    return IntegrationMatrix(
        kind=FimKind.TERMINAL_ROW,
        grid=grid,
        entries=entries,
        eval_points=np.array([grid.T]),
    )


def apply_quadrature(matrix: IntegrationMatrix, samples) -> np.ndarray:
    """Matrix-vector (or matrix-matrix, one column per component) product.

    Args:
        matrix: Any IntegrationMatrix
        samples: N nodal samples, or an N x d array

    Returns:
        M cumulative integrals (M x d for 2-D samples)
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim not in (1, 2) or samples.shape[0] != matrix.grid.N:
        raise InvalidInputError(
            f"Expected {matrix.grid.N} samples, got shape {samples.shape}",
            {"N": matrix.grid.N, "shape": samples.shape},
        )
    return matrix.entries @ samples
