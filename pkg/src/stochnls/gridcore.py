"""Spatial mesh, time grid, model coefficients, and the discrete state.

The computational domain is (0, 1) with homogeneous Dirichlet ends. Only
interior node values are ever stored; the boundary zeros are structural,
which is what makes the discrete conservation identities exact instead of
exact-up-to-boundary-terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# A state is a 1-D complex128 array holding u at the interior nodes x_j.
StateVector = np.ndarray


@dataclass(frozen=True)
class GridSpec:
    """Uniform mesh of ``n_cells`` cells on (0, 1).

    Interior nodes are x_j = j*h for j = 1..n_cells-1 with h = 1/n_cells;
    there is at least one interior node.
    """

    n_cells: int

    def __post_init__(self) -> None:
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be at least 2, got {self.n_cells}")

    @property
    def h(self) -> float:
        """Mesh width."""
        return 1.0 / self.n_cells

    @property
    def n_interior(self) -> int:
        return self.n_cells - 1

    def interior_nodes(self) -> np.ndarray:
        """Node coordinates x_j = j*h, j = 1..n_cells-1."""
        return np.arange(1, self.n_cells) * self.h

    def cell_midpoints(self) -> np.ndarray:
        """Half-grid coordinates x_{j+1/2} = (j+1/2)*h, j = 0..n_cells-1."""
        return (np.arange(self.n_cells) + 0.5) * self.h


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_n = n*tau, n = 0..n_steps."""

    tau: float
    n_steps: int

    def __post_init__(self) -> None:
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be at least 1, got {self.n_steps}")

    @property
    def horizon(self) -> float:
        return self.tau * self.n_steps

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.tau


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of i*du + (Lap u + theta*x^2*u + lam*|u|^(2*sigma)*u) dt = dW.

    theta   strength of the quadratic potential (theta < 0 is the trapping case)
    lam     nonlinearity strength; 0 is allowed for linear benchmarks
    sigma   nonlinearity exponent, restricted to (0, 2)
    epsilon noise amplitude; the increments produced by the noise module
            already carry this factor
    """

    theta: float = 1.0
    lam: float = 1.0
    sigma: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 2.0:
            raise ValueError(f"sigma must lie in (0,2), got {self.sigma}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")


def initial_condition(
    grid: GridSpec, kind: str = "sine", samples: np.ndarray | None = None
) -> StateVector:
    """Initial state on the interior nodes.

    kind = "sine" returns sin(pi*x_j); kind = "custom-samples" takes the
    values from ``samples``, which must match the interior node count.
    """
    if kind == "sine":
        return np.sin(np.pi * grid.interior_nodes()).astype(np.complex128)
    if kind == "custom-samples":
        if samples is None:
            raise ValueError("custom-samples requires a samples array")
        values = np.asarray(samples, dtype=np.complex128)
        if values.shape != (grid.n_interior,):
            raise ValueError(
                f"custom-samples length {values.shape} does not match "
                f"{grid.n_interior} interior nodes"
            )
        return values.copy()
    raise ValueError(f"unknown initial condition kind {kind!r}")


def discrete_l2_norm(u: StateVector, grid: GridSpec) -> float:
    """sqrt(h * sum_j |u_j|^2), the mesh-weighted l2 norm."""
    u = np.asarray(u)
    if u.shape != (grid.n_interior,):
        raise ValueError(f"state length {u.shape} does not match grid {grid.n_interior}")
    return float(np.sqrt(grid.h * np.sum(np.abs(u) ** 2)))


def forward_differences(u: StateVector, grid: GridSpec) -> np.ndarray:
    """(u_{j+1} - u_j)/h over all n_cells cells, with zero boundary ghosts.

    Output index c corresponds to the cell [x_c, x_{c+1}], c = 0..n_cells-1.
    """
    padded = np.concatenate(([0.0 + 0.0j], np.asarray(u, dtype=np.complex128), [0.0 + 0.0j]))
    return (padded[1:] - padded[:-1]) / grid.h


def half_grid_values(u: StateVector, grid: GridSpec) -> np.ndarray:
    """Arithmetic averages (u_j + u_{j+1})/2 on all cells, zero ghosts.

    Output index c corresponds to the midpoint x_{c+1/2}, c = 0..n_cells-1.
    """
    padded = np.concatenate(([0.0 + 0.0j], np.asarray(u, dtype=np.complex128), [0.0 + 0.0j]))
    return 0.5 * (padded[:-1] + padded[1:])


def discrete_h1_norm(u: StateVector, grid: GridSpec) -> float:
    """sqrt(h*sum|u_j|^2 + h*sum|forward difference|^2) with Dirichlet ghosts."""
    du = forward_differences(u, grid)
    return float(
        np.sqrt(grid.h * np.sum(np.abs(u) ** 2) + grid.h * np.sum(np.abs(du) ** 2))
    )


@lru_cache(maxsize=32)
def sine_basis(n_cells: int, n_modes: int) -> np.ndarray:
    """Matrix sin(pi*k*x_j), shape (n_interior, n_modes); cached, read-only.

    With n_modes = n_cells - 1 the columns are a complete orthogonal basis
    of the interior-node space: sum_j sin(pi*k*x_j)*sin(pi*m*x_j)
    = (n_cells/2) * delta_km.
    """
    x = np.arange(1, n_cells) / n_cells
    k = np.arange(1, n_modes + 1)
    basis = np.sin(np.pi * np.outer(x, k))
    basis.setflags(write=False)
    return basis
