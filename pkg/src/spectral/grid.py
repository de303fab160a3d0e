from dataclasses import dataclass, field

import numpy as np

from src.utils.errors import InvalidInputError


@dataclass(frozen=True)
class EquispacedGrid:
    """The N equally spaced nodes t_j = T*j/N of one period [0, T)."""

    N: int
    T: float
    nodes: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)

    @property
    def spacing(self) -> float:
        return self.T / self.N

    @property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers k = -N/2, ..., N/2 - 1."""
        return np.arange(-self.N // 2, self.N // 2)

    def angular_frequency(self, k) -> np.ndarray:
        """omega_k = 2*pi*k/T."""
        return 2.0 * np.pi * np.asarray(k, dtype=float) / self.T

    def reduce(self, t) -> np.ndarray:
        """Map times into [0, T)."""
        reduced = np.mod(np.asarray(t, dtype=float), self.T)
        # np.mod can round a tiny negative input up to exactly T
        return np.where(reduced >= self.T, 0.0, reduced)

    def node_index(self, t: float, rtol: float = 1e-12) -> int | None:
        """Index of the node coinciding with ``t`` (within rtol*T), or None."""
        distance = np.abs(self.nodes - float(t))
        j = int(np.argmin(distance))
        if distance[j] <= rtol * self.T:
            return j
        return None


def make_grid(N: int, T: float) -> EquispacedGrid:
    """Build the equispaced periodic grid with N (even) nodes on [0, T).

    Args:
        N: Number of nodes; must be even and at least 2
        T: Period; must be positive

    Returns:
        EquispacedGrid with nodes[j] = T*j/N
    """
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise InvalidInputError(f"N must be an integer, got {N!r}", {"N": N})
    N = int(N)
    if N < 2:
        raise InvalidInputError(f"N must be at least 2, got {N}", {"N": N})
    if N % 2 != 0:
        raise InvalidInputError(f"N must be even, got {N}", {"N": N})
    T = float(T)
    if not np.isfinite(T) or T <= 0.0:
        raise InvalidInputError(f"Period T must be positive and finite, got {T}", {"T": T})

    nodes = T * np.arange(N, dtype=float) / N
    return EquispacedGrid(N=N, T=T, nodes=nodes)
