from src.spectral.grid import EquispacedGrid, make_grid
from src.spectral.integration import (
    FimKind,
    IntegrationMatrix,
    apply_quadrature,
    build_rectangular_fim,
    build_square_fim,
    terminal_quadrature,
)
from src.spectral.interpolation import (
    FourierCoefficients,
    TrigInterpolant,
    cardinal_matrix,
    dft_coefficients,
    eval_interpolant,
    eval_vector_interpolant,
    interpolation_error,
    inverse_dft,
    lagrange_basis,
)

__all__ = [
    "EquispacedGrid",
    "make_grid",
    "FimKind",
    "IntegrationMatrix",
    "apply_quadrature",
    "build_rectangular_fim",
    "build_square_fim",
    "terminal_quadrature",
    "FourierCoefficients",
    "TrigInterpolant",
    "cardinal_matrix",
    "dft_coefficients",
    "eval_interpolant",
    "eval_vector_interpolant",
    "interpolation_error",
    "inverse_dft",
    "lagrange_basis",
]
