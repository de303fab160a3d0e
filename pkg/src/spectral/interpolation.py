"""Discrete Fourier coefficients and the real trigonometric Lagrange interpolant.

The interpolant is evaluated through the real cardinal functions

    F_j(t) = sin(pi*N*(t - t_j)/T) * cot(pi*(t - t_j)/T) / N,

which equal the symmetric (Nyquist-halved) exponential sum and therefore stay
real for real samples. Times are reduced modulo T before evaluation.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src.spectral.grid import EquispacedGrid
from src.utils.errors import InvalidInputError

# Below this |sin(pi*(t - t_j)/T)| the cardinal function takes its limit value 1
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class FourierCoefficients:
    """DFT coefficients indexed by k = -N/2, ..., N/2 - 1."""

    grid: EquispacedGrid
    coeffs: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.grid.wavenumbers

    def coefficient(self, k: int) -> complex:
        """Coefficient of wavenumber k, with -N/2 <= k < N/2."""
        half = self.grid.N // 2
        if not -half <= k < half:
            raise InvalidInputError(
                f"Wavenumber {k} outside [-{half}, {half - 1}]", {"k": k, "N": self.grid.N}
            )
        return complex(self.coeffs[k + half])


@dataclass(frozen=True)
class TrigInterpolant:
    """Nodal samples on a grid, evaluable anywhere through the cardinal basis."""

    grid: EquispacedGrid
    values: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.N,):
            raise InvalidInputError(
                f"Expected {self.grid.N} samples, got shape {values.shape}",
                {"N": self.grid.N, "shape": values.shape},
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        return eval_interpolant(self, t)


def _check_samples(samples, grid: EquispacedGrid) -> np.ndarray:
    samples = np.asarray(samples)
    if samples.ndim != 1 or samples.shape[0] != grid.N:
        raise InvalidInputError(
            f"Expected {grid.N} samples, got shape {samples.shape}",
            {"N": grid.N, "shape": samples.shape},
        )
    return samples


def _phase_matrix(grid: EquispacedGrid, sign: float) -> np.ndarray:
    # Integer reduction of k*j keeps the phases exact multiples of 2*pi/N
    k = grid.wavenumbers
    j = np.arange(grid.N)
    products = np.mod(np.outer(k, j), grid.N)
    return np.exp(sign * 2j * np.pi * products / grid.N)


def dft_coefficients(samples, grid: EquispacedGrid) -> FourierCoefficients:
    """Direct O(N^2) discrete Fourier transform of nodal samples.

    Args:
        samples: N real (or complex) nodal values
        grid: Grid the samples live on

    Returns:
        FourierCoefficients with coeffs[k + N/2] = (1/N) sum_j f_j exp(-2*pi*i*j*k/N)
    """
    samples = _check_samples(samples, grid)
    coeffs = _phase_matrix(grid, -1.0) @ samples.astype(complex) / grid.N
    return FourierCoefficients(grid=grid, coeffs=coeffs)


def inverse_dft(coefficients: FourierCoefficients) -> np.ndarray:
    """Primed inverse sum f_j = sum_{k=-N/2}^{N/2-1} c_k exp(2*pi*i*j*k/N)."""
    return _phase_matrix(coefficients.grid, 1.0).T @ np.asarray(coefficients.coeffs)


def _cardinal_values(delta: np.ndarray, grid: EquispacedGrid) -> np.ndarray:
    x = np.pi * delta / grid.T
    s = np.sin(x)
    singular = np.abs(s) < SINGULAR_TOL
    safe = np.where(singular, 1.0, s)
    values = np.sin(grid.N * x) * np.cos(x) / (grid.N * safe)
    return np.where(singular, 1.0, values)


def lagrange_basis(j: int, t, grid: EquispacedGrid):
    """Cardinal function F_j evaluated at t (scalar or array).

    Args:
        j: Node index, 0 <= j < N
        t: Evaluation time(s)
        grid: Interpolation grid

    Returns:
        F_j(t); 1 where t coincides with t_j modulo T
    """
    if not 0 <= j < grid.N:
        raise InvalidInputError(f"Node index {j} outside [0, {grid.N})", {"j": j, "N": grid.N})
    delta = grid.reduce(t) - grid.nodes[j]
    values = _cardinal_values(delta, grid)
    return float(values) if np.ndim(values) == 0 else values


def cardinal_matrix(grid: EquispacedGrid, t) -> np.ndarray:
    """All cardinal functions at t: shape ``t.shape + (N,)``."""
    reduced = grid.reduce(t)
    delta = reduced[..., None] - grid.nodes
    return _cardinal_values(delta, grid)


def eval_interpolant(interp: TrigInterpolant, t):
    """Evaluate I_N f(t) = sum_j f_j F_j(t)."""
    values = cardinal_matrix(interp.grid, t) @ interp.values
    return float(values) if np.ndim(values) == 0 else values


def eval_vector_interpolant(values_matrix, grid: EquispacedGrid, t) -> np.ndarray:
    """Column-wise interpolation of an N x d matrix of nodal values.

    Args:
        values_matrix: Nodal values, one column per component
        grid: Interpolation grid
        t: Evaluation time(s)

    Returns:
        Array of shape ``t.shape + (d,)``
    """
    values_matrix = np.asarray(values_matrix, dtype=float)
    if values_matrix.ndim == 1:
        values_matrix = values_matrix[:, None]
    if values_matrix.ndim != 2 or values_matrix.shape[0] != grid.N:
        raise InvalidInputError(
            f"Expected {grid.N} rows, got shape {values_matrix.shape}",
            {"N": grid.N, "shape": values_matrix.shape},
        )
    return cardinal_matrix(grid, t) @ values_matrix


def interpolation_error(
    f: Callable[[np.ndarray], np.ndarray], grid: EquispacedGrid, points
) -> float:
    """Max |f - I_N f| over the given evaluation points."""
    points = np.asarray(points, dtype=float)
    interp = TrigInterpolant(grid=grid, values=f(grid.nodes))
    return float(np.max(np.abs(f(points) - eval_interpolant(interp, points))))
