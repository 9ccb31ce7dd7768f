"""Time-stepping kernels for the stochastic Schroedinger dynamics.

Four steps are provided:

* `midpoint_step`: implicit midpoint in time on the semi-discrete system,
  i.e. Crank-Nicolson for the Laplacian with potential and nonlinearity
  evaluated at the temporal half point.
* `truncated_midpoint_step`: the same step written in mild form with the
  nonlinearity damped by a cutoff of the discrete H1 norm, so the drift is
  globally Lipschitz regardless of the state's size.
* `multisymplectic_step`: midpoint in both time and space; field values at
  cell midpoints are arithmetic averages of the node values with Dirichlet
  ghost zeros.
* `tangent_step`: the linearization of `midpoint_step` along a computed
  trajectory, used to check that the scheme transports the symplectic form
  exactly. The noise increment cancels in the linearized relation.

All implicit relations are solved by fixed-point (Picard) sweeps on the
half-step value w = (u_n + u_{n+1})/2. Each sweep solves the constant
tridiagonal linear core exactly with the lower-order terms frozen at the
previous iterate, then the defining relation (multiplied through by tau)
is evaluated directly; the iteration stops once that residual drops below
fp_tol * (1 + ||u_n||) in the mesh-weighted l2 norm. Contraction requires
tau to be small relative to the state magnitude, which covers every
configuration exercised here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gridcore import (
    GridSpec,
    ModelParams,
    StateVector,
    discrete_h1_norm,
    discrete_l2_norm,
    half_grid_values,
)
from .linops import TridiagonalSolver, apply_laplacian, cayley_apply, solve_shifted
from .noise import WienerIncrement

SCHEME_NAMES = ("midpoint", "truncated-midpoint", "multi-symplectic")
CUTOFF_KINDS = ("smooth-bump", "hard-clip")


class NonConvergence(RuntimeError):
    """Fixed-point iteration failed to meet fp_tol within fp_max_iter."""

    def __init__(self, message: str, iterations: int = 0, residual: float = math.nan,
                 step_index: int | None = None) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.step_index = step_index


class StateNotFinite(RuntimeError):
    """A step produced NaN or Inf entries; the trajectory must abort."""


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme selection and implicit-solver knobs.

    truncation_radius is the H1 radius R of the cutoff and is required by
    the truncated scheme only. cutoff_kind selects the C-infinity bump or
    a piecewise-linear clip, both equal to 1 on [0, R] and 0 beyond 2R.
    """

    scheme: str = "midpoint"
    fp_tol: float = 1e-12
    fp_max_iter: int = 100
    truncation_radius: float | None = None
    cutoff_kind: str = "smooth-bump"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEME_NAMES:
            raise ValueError(f"scheme must be one of {SCHEME_NAMES}, got {self.scheme!r}")
        if self.fp_tol <= 0.0:
            raise ValueError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise ValueError(f"fp_max_iter must be at least 1, got {self.fp_max_iter}")
        if self.cutoff_kind not in CUTOFF_KINDS:
            raise ValueError(
                f"cutoff_kind must be one of {CUTOFF_KINDS}, got {self.cutoff_kind!r}"
            )
        if self.scheme == "truncated-midpoint":
            if self.truncation_radius is None or self.truncation_radius <= 0.0:
                raise ValueError("truncated-midpoint requires truncation_radius > 0")


@dataclass
class IterationLog:
    """Aggregate solver statistics across the steps of one trajectory."""

    steps: int = 0
    total_iterations: int = 0
    max_iterations: int = 0
    max_residual: float = 0.0

    def record(self, iterations: int, residual: float) -> None:
        self.steps += 1
        self.total_iterations += iterations
        self.max_iterations = max(self.max_iterations, iterations)
        self.max_residual = max(self.max_residual, residual)


def increment_values(dw: WienerIncrement | np.ndarray) -> np.ndarray:
    """Accept either a WienerIncrement or a bare complex array."""
    return np.asarray(getattr(dw, "values", dw), dtype=np.complex128)


def _bump(s: float) -> float:
    return math.exp(-1.0 / s) if s > 0.0 else 0.0


def smooth_cutoff(r: float) -> float:
    """C-infinity transition: 1 on (-inf, 1], 0 on [2, inf), monotone between."""
    if r <= 1.0:
        return 1.0
    if r >= 2.0:
        return 0.0
    up = _bump(2.0 - r)
    return up / (up + _bump(r - 1.0))


def hard_cutoff(r: float) -> float:
    """Piecewise-linear transition with the same support as smooth_cutoff."""
    return float(min(1.0, max(0.0, 2.0 - r)))


def cutoff_factor(u: StateVector, grid: GridSpec, radius: float, kind: str) -> float:
    """Damping factor applied to the nonlinearity at H1 size ||u|| / radius."""
    r = discrete_h1_norm(u, grid) / radius
    return smooth_cutoff(r) if kind == "smooth-bump" else hard_cutoff(r)


def _power_nonlinearity(w: np.ndarray, sigma: float) -> np.ndarray:
    """|w|^(2*sigma) * w."""
    mod2 = w.real**2 + w.imag**2
    if sigma == 1.0:
        return mod2 * w
    return mod2 ** sigma * w


def _ensure_finite(u: np.ndarray, context: str) -> None:
    if not np.all(np.isfinite(u.real)) or not np.all(np.isfinite(u.imag)):
        raise StateNotFinite(f"non-finite values in {context}")


def midpoint_step(
    u_n: StateVector,
    dw: WienerIncrement | np.ndarray,
    params: ModelParams,
    grid: GridSpec,
    tau: float,
    cfg: SchemeConfig,
    log: IterationLog | None = None,
) -> StateVector:
    """One implicit midpoint step of the semi-discrete system.

    Solves, for w = (u_n + u_{n+1})/2,

        i*(u_{n+1} - u_n) + tau*(Lap w + theta*x^2*w + lam*|w|^(2s)*w) = dW

    by Picard sweeps w <- T[u_n + i*tau/2*(theta*x^2*w + lam*|w|^(2s)*w)
    - i/2*dW] with T the shifted tridiagonal solve. Raises NonConvergence
    when fp_max_iter sweeps cannot push the relation's residual below
    fp_tol * (1 + ||u_n||).
    """
    dw_vals = increment_values(dw)
    u_n = np.asarray(u_n, dtype=np.complex128)
    _ensure_finite(u_n, "input to midpoint step")
    _ensure_finite(dw_vals, "input to midpoint step")
    x2 = grid.interior_nodes() ** 2
    tol = cfg.fp_tol * (1.0 + discrete_l2_norm(u_n, grid))
    base = u_n - 0.5j * dw_vals
    w = u_n.copy()
    residual = math.inf
    for sweep in range(1, cfg.fp_max_iter + 1):
        frozen = params.theta * x2 * w + params.lam * _power_nonlinearity(w, params.sigma)
        w = solve_shifted(base + 0.5j * tau * frozen, tau, grid, sign="minus")
        u_next = 2.0 * w - u_n
        relation = (
            1j * (u_next - u_n)
            + tau
            * (
                apply_laplacian(w, grid)
                + params.theta * x2 * w
                + params.lam * _power_nonlinearity(w, params.sigma)
            )
            - dw_vals
        )
        residual = discrete_l2_norm(relation, grid)
        if residual <= tol:
            _ensure_finite(u_next, "midpoint step")
            if log is not None:
                log.record(sweep, residual)
            return u_next
    raise NonConvergence(
        f"midpoint step stalled at residual {residual:.3e} after "
        f"{cfg.fp_max_iter} sweeps (tol {tol:.3e}); reduce tau",
        iterations=cfg.fp_max_iter,
        residual=residual,
    )


def truncated_midpoint_step(
    u_n: StateVector,
    dw: WienerIncrement | np.ndarray,
    params: ModelParams,
    grid: GridSpec,
    tau: float,
    cfg: SchemeConfig,
    log: IterationLog | None = None,
) -> StateVector:
    """Midpoint step in mild form with the nonlinearity cut off in H1.

    Iterates u_{n+1} <- S u_n + T[i*tau*theta*x^2*w + i*tau*lam*f(w) - i*dW]
    with w = (u_n + u_{n+1})/2 and f(w) = mu(||w||_H1 / R) * |w|^2 * w.
    With the cutoff inactive this is algebraically the same step as
    `midpoint_step`; the two outputs then agree to solver tolerance.

    Stops when successive iterates move less than fp_tol * (1 + ||u_n||);
    since the sweep map is a contraction, the fixed-point defect of the
    returned state is strictly smaller than that.
    """
    if params.sigma != 1.0:
        raise ValueError("truncated scheme requires sigma = 1")
    if cfg.truncation_radius is None or cfg.truncation_radius <= 0.0:
        raise ValueError("truncated scheme requires truncation_radius > 0")
    dw_vals = increment_values(dw)
    u_n = np.asarray(u_n, dtype=np.complex128)
    _ensure_finite(u_n, "input to truncated midpoint step")
    _ensure_finite(dw_vals, "input to truncated midpoint step")
    x2 = grid.interior_nodes() ** 2
    tol = cfg.fp_tol * (1.0 + discrete_l2_norm(u_n, grid))
    propagated = cayley_apply(u_n, tau, grid)
    u_next = u_n.copy()
    change = math.inf
    for sweep in range(1, cfg.fp_max_iter + 1):
        w = 0.5 * (u_n + u_next)
        damping = cutoff_factor(w, grid, cfg.truncation_radius, cfg.cutoff_kind)
        forcing = (
            1j * tau * params.theta * x2 * w
            + 1j * tau * params.lam * damping * _power_nonlinearity(w, 1.0)
            - 1j * dw_vals
        )
        candidate = propagated + solve_shifted(forcing, tau, grid, sign="minus")
        change = discrete_l2_norm(candidate - u_next, grid)
        u_next = candidate
        if change <= tol:
            _ensure_finite(u_next, "truncated midpoint step")
            if log is not None:
                log.record(sweep, change)
            return u_next
    raise NonConvergence(
        f"truncated midpoint step stalled at change {change:.3e} after "
        f"{cfg.fp_max_iter} sweeps (tol {tol:.3e}); reduce tau",
        iterations=cfg.fp_max_iter,
        residual=change,
    )


def _average_neighbors(v: np.ndarray) -> np.ndarray:
    """Tridiagonal averaging (v_{j-1} + 2 v_j + v_{j+1})/4 with zero ghosts.

    Equals the node-j mean of the two adjacent cell-midpoint values, and is
    B^T B for the node-to-cell averaging map B.
    """
    out = 0.5 * v.copy()
    out[:-1] += 0.25 * v[1:]
    out[1:] += 0.25 * v[:-1]
    return out


def _cells_to_nodes(z: np.ndarray) -> np.ndarray:
    """Sum of the two cell values adjacent to each interior node."""
    return z[:-1] + z[1:]


@lru_cache(maxsize=64)
def _multisym_solver(tau: float, n_cells: int) -> TridiagonalSolver:
    """Factorization of the space-time midpoint linear core A - i*tau/2*Lap.

    A has eigenvalues cos^2(pi*k*h/2) and the Laplacian part contributes
    2i*tau/h^2 * sin^2(pi*k*h/2), so the core's eigenvalues never vanish.
    """
    h = 1.0 / n_cells
    n = n_cells - 1
    diag = np.full(n, 0.5 + 1j * tau / h**2, dtype=np.complex128)
    off = np.full(n - 1, 0.25 - 0.5j * tau / h**2, dtype=np.complex128)
    return TridiagonalSolver(off, diag, off.copy())


def multisymplectic_step(
    u_n: StateVector,
    dw: WienerIncrement | np.ndarray,
    params: ModelParams,
    grid: GridSpec,
    tau: float,
    cfg: SchemeConfig,
    log: IterationLog | None = None,
) -> StateVector:
    """One step of the midpoint-in-time, midpoint-in-space discretization.

    At every interior node j, with w = (u_n + u_{n+1})/2 and cell-midpoint
    values given by arithmetic averages (ghosts zero),

        i*(dt w_{j+1/2} + dt w_{j-1/2}) = -2*(second difference of w)_j
            - theta*(x^2 w at j+1/2 and j-1/2) - lam*(|w|^(2s) w at j+-1/2)
            + (dW_{j+1/2} + dW_{j-1/2})/tau

    where dt v = (v^{n+1} - v^n)/tau and the increment already carries the
    noise amplitude. The averaging couples neighboring nodes, so the linear
    core is the tridiagonal matrix A - i*tau/2*Lap.
    """
    dw_vals = increment_values(dw)
    u_n = np.asarray(u_n, dtype=np.complex128)
    _ensure_finite(u_n, "input to multisymplectic step")
    _ensure_finite(dw_vals, "input to multisymplectic step")
    xh2 = grid.cell_midpoints() ** 2
    tol = cfg.fp_tol * (1.0 + discrete_l2_norm(u_n, grid))
    solver = _multisym_solver(float(tau), grid.n_cells)
    noise_nodes = _cells_to_nodes(half_grid_values(dw_vals, grid))
    rhs_const = _average_neighbors(u_n) - 0.25j * noise_nodes
    w = u_n.copy()
    residual = math.inf
    for sweep in range(1, cfg.fp_max_iter + 1):
        wh = half_grid_values(w, grid)
        frozen = params.theta * _cells_to_nodes(xh2 * wh) + params.lam * _cells_to_nodes(
            _power_nonlinearity(wh, params.sigma)
        )
        w = solver.solve(rhs_const + 0.25j * tau * frozen)
        u_next = 2.0 * w - u_n
        wh = half_grid_values(w, grid)
        relation = (
            2j * _average_neighbors(u_next - u_n)
            + 2.0 * tau * apply_laplacian(w, grid)
            + tau * params.theta * _cells_to_nodes(xh2 * wh)
            + tau * params.lam * _cells_to_nodes(_power_nonlinearity(wh, params.sigma))
            - noise_nodes
        )
        residual = discrete_l2_norm(relation, grid)
        if residual <= tol:
            _ensure_finite(u_next, "multisymplectic step")
            if log is not None:
                log.record(sweep, residual)
            return u_next
    raise NonConvergence(
        f"multisymplectic step stalled at residual {residual:.3e} after "
        f"{cfg.fp_max_iter} sweeps (tol {tol:.3e}); reduce tau",
        iterations=cfg.fp_max_iter,
        residual=residual,
    )


def tangent_step(
    u_n: StateVector,
    xi_n: StateVector,
    dw: WienerIncrement | np.ndarray,
    params: ModelParams,
    grid: GridSpec,
    tau: float,
    cfg: SchemeConfig,
    u_np1: StateVector | None = None,
    log: IterationLog | None = None,
) -> StateVector:
    """Propagate a perturbation through the linearized midpoint step.

    With w the base step's half-point state, solves the linear implicit
    relation (chi = (xi_n + xi_{n+1})/2)

        i*(xi_{n+1} - xi_n) + tau*(Lap chi + theta*x^2*chi
            + lam*(2|w|^2 chi + w^2 conj(chi))) = 0

    using the real-linear Jacobian of |w|^2 w, which requires sigma = 1.
    The increment cancels in the linearization but is still needed to
    recompute the base step when ``u_np1`` is not supplied. Iterates to the
    round-off floor (well below fp_tol) so that the transported symplectic
    form is exact to accumulated machine precision.
    """
    if params.sigma != 1.0:
        raise ValueError("tangent propagation requires sigma = 1")
    if u_np1 is None:
        u_np1 = midpoint_step(u_n, dw, params, grid, tau, cfg)
    xi_n = np.asarray(xi_n, dtype=np.complex128)
    u_n = np.asarray(u_n, dtype=np.complex128)
    _ensure_finite(xi_n, "input to tangent step")
    x2 = grid.interior_nodes() ** 2
    w = 0.5 * (u_n + np.asarray(u_np1, dtype=np.complex128))
    mod2 = w.real**2 + w.imag**2
    wsq = w * w
    scale = 1.0 + discrete_l2_norm(xi_n, grid)
    target = max(1e-3 * cfg.fp_tol, 1e-15) * scale
    acceptable = cfg.fp_tol * scale
    chi = xi_n.copy()
    best = math.inf
    residual = math.inf
    for sweep in range(1, cfg.fp_max_iter + 1):
        jacobian = params.theta * x2 * chi + params.lam * (
            2.0 * mod2 * chi + wsq * np.conj(chi)
        )
        chi = solve_shifted(xi_n + 0.5j * tau * jacobian, tau, grid, sign="minus")
        xi_next = 2.0 * chi - xi_n
        jacobian = params.theta * x2 * chi + params.lam * (
            2.0 * mod2 * chi + wsq * np.conj(chi)
        )
        relation = 1j * (xi_next - xi_n) + tau * (apply_laplacian(chi, grid) + jacobian)
        residual = discrete_l2_norm(relation, grid)
        converged = residual <= target
        # Accept the round-off floor: no progress but already below fp_tol.
        stalled = residual >= best and residual <= acceptable
        if converged or stalled:
            _ensure_finite(xi_next, "tangent step")
            if log is not None:
                log.record(sweep, residual)
            return xi_next
        best = min(best, residual)
    raise NonConvergence(
        f"tangent step stalled at residual {residual:.3e} after "
        f"{cfg.fp_max_iter} sweeps (target {target:.3e})",
        iterations=cfg.fp_max_iter,
        residual=residual,
    )


SCHEME_STEPS = {
    "midpoint": midpoint_step,
    "truncated-midpoint": truncated_midpoint_step,
    "multi-symplectic": multisymplectic_step,
}
