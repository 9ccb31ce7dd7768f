"""Spectrally truncated Q-Wiener increments and their regularity norms.

The driving noise is W(t, x) = sum_{k=1}^{M} k^(-decay) * e_k(x) * beta_k(t)
with e_k(x) = sin(pi*k*x) and independent scalar Brownian motions beta_k,
scaled by an overall amplitude epsilon. One time step contributes the
increment W(t_{n+1}) - W(t_n), whose mode-k coefficient is a centered
Gaussian of variance tau.

Note the basis functions are not unit-normalized (||e_k||^2 = 1/2 on (0,1));
the 1/2 factors are carried explicitly in `hs_norm_squared` so that the
statistics produced here and the norms reported there agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridcore import GridSpec, sine_basis


@dataclass(frozen=True)
class NoiseSpec:
    """Spectral truncation and amplitude of the driving Wiener process.

    n_modes number of retained sine modes M
    decay   mode k is weighted by k^(-decay); must be positive so the
            weights strictly decrease
    epsilon overall amplitude (0 switches the noise off)
    kind    "real" for real-valued Brownian coefficients, "complex" for
            independent real and imaginary parts, each of variance tau
    """

    n_modes: int = 50
    decay: float = 4.6
    epsilon: float = 0.0
    kind: str = "real"

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be at least 1, got {self.n_modes}")
        if self.decay <= 0.0:
            raise ValueError(f"decay must be positive, got {self.decay}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.kind not in ("real", "complex"):
            raise ValueError(f"kind must be 'real' or 'complex', got {self.kind!r}")

    def mode_weights(self) -> np.ndarray:
        """Amplitudes k^(-decay), k = 1..n_modes."""
        return np.arange(1, self.n_modes + 1, dtype=float) ** (-self.decay)


@dataclass(frozen=True)
class WienerIncrement:
    """One sampled increment on the interior nodes, amplitude included."""

    values: np.ndarray
    step_index: int = 0


def sample_increment(
    spec: NoiseSpec,
    grid: GridSpec,
    tau: float,
    rng: np.random.Generator,
    step_index: int = 0,
    coeffs: np.ndarray | None = None,
) -> WienerIncrement:
    """Draw one increment: epsilon * sum_k k^(-decay) * xi_k * sin(pi*k*x_j).

    The xi_k are independent Gaussians of variance tau ("real" kind) or
    complex with independent N(0, tau) real and imaginary parts ("complex"
    kind). Passing ``coeffs`` substitutes deterministic xi_k and bypasses
    the generator entirely, which is the hook the exact-value tests use.
    """
    if tau <= 0.0 and coeffs is None:
        raise ValueError(f"tau must be positive, got {tau}")
    if coeffs is not None:
        xi = np.asarray(coeffs)
        if xi.shape != (spec.n_modes,):
            raise ValueError(f"coeffs must have shape ({spec.n_modes},), got {xi.shape}")
    elif spec.kind == "real":
        xi = rng.standard_normal(spec.n_modes) * np.sqrt(tau)
    else:
        xi = (
            rng.standard_normal(spec.n_modes) + 1j * rng.standard_normal(spec.n_modes)
        ) * np.sqrt(tau)
    basis = sine_basis(grid.n_cells, spec.n_modes)
    values = spec.epsilon * (basis @ (spec.mode_weights() * xi))
    return WienerIncrement(values=values.astype(np.complex128), step_index=step_index)


def sample_path(
    spec: NoiseSpec,
    grid: GridSpec,
    tau: float,
    n_steps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """All increments of one trajectory, shape (n_steps, n_interior).

    Implemented as successive `sample_increment` calls so the stream order
    is identical to stepping a scheme with per-step draws. Summing rows in
    consecutive groups of m yields the increments of the coarser step m*tau
    on the same Brownian path.
    """
    out = np.empty((n_steps, grid.n_interior), dtype=np.complex128)
    for n in range(n_steps):
        out[n] = sample_increment(spec, grid, tau, rng, step_index=n).values
    return out


def hs_norm_squared(spec: NoiseSpec, derivative_order: int = 0) -> float:
    """Squared Hilbert-Schmidt norm of the covariance factor, closed form.

    derivative_order 0 uses ||e_k||^2 = 1/2; order 1 additionally counts
    the gradient, ||e_k||_{H^1}^2 = (1 + (pi*k)^2)/2. No grid is involved.
    """
    if derivative_order not in (0, 1):
        raise ValueError(f"derivative_order must be 0 or 1, got {derivative_order}")
    k = np.arange(1, spec.n_modes + 1, dtype=float)
    mode_norms = 0.5 * np.ones_like(k)
    if derivative_order == 1:
        mode_norms = 0.5 * (1.0 + (np.pi * k) ** 2)
    return float(spec.epsilon**2 * np.sum(k ** (-2.0 * spec.decay) * mode_norms))
