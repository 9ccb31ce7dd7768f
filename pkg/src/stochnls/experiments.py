"""Trajectory driver, seeded Monte Carlo ensembles, and convergence studies.

Reproducibility contract: trajectory i of a run with master seed s draws
its noise from a private generator seeded by a 64-bit avalanche mix of
(s, i). Identical configurations therefore produce bit-identical outputs
on one platform, trajectories are independent, and no stream is shared
across refinement levels of a convergence study; level consistency comes
from summing reference-resolution increments instead of resampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gridcore import (
    GridSpec,
    ModelParams,
    StateVector,
    TimeGrid,
    discrete_l2_norm,
    initial_condition,
)
from .noise import NoiseSpec, WienerIncrement, sample_increment, sample_path
from .observables import (
    ObservableSeries,
    charge,
    charge_recursion_residual,
    energy,
    energy_recursion_residual,
)
from .schemes import (
    SCHEME_STEPS,
    IterationLog,
    NonConvergence,
    SchemeConfig,
    StateNotFinite,
)

_MASK64 = (1 << 64) - 1


def mix_seed(master_seed: int, trajectory_index: int) -> int:
    """64-bit avalanche mix (splitmix64 finalizer) of seed and index.

    Adjacent indices land far apart in seed space, so per-trajectory
    generators are effectively independent streams.
    """
    z = (master_seed + 0x9E3779B97F4A7C15 * (trajectory_index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run."""

    grid: GridSpec
    time: TimeGrid
    params: ModelParams
    noise: NoiseSpec
    scheme_cfg: SchemeConfig
    n_trajectories: int = 1
    master_seed: int = 12345
    record_every: int = 1

    def __post_init__(self) -> None:
        if self.n_trajectories < 1:
            raise ValueError(f"n_trajectories must be at least 1, got {self.n_trajectories}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be at least 1, got {self.record_every}")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class TrajectoryResult:
    final_state: StateVector
    observables: ObservableSeries
    seed: int
    solver_stats: IterationLog


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time mean and standard error of the recorded observables."""

    times: np.ndarray
    mean_charge: np.ndarray
    se_charge: np.ndarray
    mean_energy: np.ndarray
    se_energy: np.ndarray
    n_trajectories: int


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors against a common-path reference and the fitted order."""

    taus: np.ndarray
    errors: np.ndarray
    std_errors: np.ndarray
    fitted_slope: float
    fit_residual: float


class EnsembleError(RuntimeError):
    """Raised when too many trajectories of an ensemble fail."""


def _observable_forms(scheme: str) -> tuple[str, str]:
    if scheme == "multi-symplectic":
        return "half-grid", "multisym"
    return "node", "semi"


def run_trajectory(
    cfg: RunConfig,
    trajectory_index: int = 0,
    increments: np.ndarray | None = None,
) -> TrajectoryResult:
    """Advance the sine initial state through the configured time grid.

    ``increments`` overrides noise sampling with precomputed rows (one per
    step); otherwise each step draws from this trajectory's private
    generator. Observables are recorded at step 0, every record_every
    steps, and after the final step. The residual recorded with a state is
    the identity defect of the step that produced it.
    """
    grid, time = cfg.grid, cfg.time
    scheme = cfg.scheme_cfg.scheme
    step = SCHEME_STEPS[scheme]
    charge_form, energy_form = _observable_forms(scheme)
    has_energy_identity = scheme == "multi-symplectic" and cfg.params.sigma == 1.0
    seed = mix_seed(cfg.master_seed, trajectory_index)
    rng = np.random.default_rng(seed)
    log = IterationLog()

    recorded = sorted({0, time.n_steps} | set(range(0, time.n_steps + 1, cfg.record_every)))
    record_set = set(recorded)

    u = initial_condition(grid, "sine")
    times, charges, energies, charge_res, energy_res = [], [], [], [], []

    def record(n: int, resid_charge: float, resid_energy: float) -> None:
        times.append(n * time.tau)
        charges.append(charge(u, grid, charge_form))
        energies.append(energy(u, grid, cfg.params, energy_form))
        charge_res.append(resid_charge)
        energy_res.append(resid_energy)

    record(0, math.nan, math.nan)
    for n in range(time.n_steps):
        if increments is not None:
            dw = WienerIncrement(values=np.asarray(increments[n]), step_index=n)
        else:
            dw = sample_increment(cfg.noise, grid, time.tau, rng, step_index=n)
        try:
            u_next = step(u, dw, cfg.params, grid, time.tau, cfg.scheme_cfg, log=log)
        except NonConvergence as exc:
            raise NonConvergence(
                f"trajectory {trajectory_index}, step {n}: {exc}",
                iterations=exc.iterations,
                residual=exc.residual,
                step_index=n,
            ) from exc
        except StateNotFinite as exc:
            raise StateNotFinite(f"trajectory {trajectory_index}, step {n}: {exc}") from exc
        if n + 1 in record_set:
            resid_c = charge_recursion_residual(u, u_next, dw, grid, scheme)
            resid_e = (
                energy_recursion_residual(u, u_next, dw, grid, cfg.params, time.tau)
                if has_energy_identity
                else math.nan
            )
            u = u_next
            record(n + 1, resid_c, resid_e)
        else:
            u = u_next

    series = ObservableSeries(
        times=np.array(times),
        charge=np.array(charges),
        energy=np.array(energies),
        charge_residual=np.array(charge_res),
        energy_residual=np.array(energy_res),
    )
    return TrajectoryResult(final_state=u, observables=series, seed=seed, solver_stats=log)


def run_ensemble(cfg: RunConfig) -> tuple[list[TrajectoryResult], EnsembleStats]:
    """Run all trajectories sequentially and aggregate observable statistics.

    Failed trajectories are tolerated up to 5% of the ensemble; beyond
    that the whole ensemble aborts. Statistics are over the survivors, in
    trajectory order, so the floating-point reduction is deterministic.
    """
    results: list[TrajectoryResult] = []
    failures: list[tuple[int, str]] = []
    for i in range(cfg.n_trajectories):
        try:
            results.append(run_trajectory(cfg, i))
        except (NonConvergence, StateNotFinite) as exc:
            failures.append((i, str(exc)))
            if len(failures) > 0.05 * cfg.n_trajectories:
                raise EnsembleError(
                    f"{len(failures)} of {cfg.n_trajectories} trajectories failed; "
                    f"first failure: trajectory {failures[0][0]}: {failures[0][1]}"
                ) from exc
    if not results:
        raise EnsembleError("all trajectories failed")

    charges = np.stack([r.observables.charge for r in results])
    energies = np.stack([r.observables.energy for r in results])
    n = len(results)
    if n > 1:
        se_charge = charges.std(axis=0, ddof=1) / math.sqrt(n)
        se_energy = energies.std(axis=0, ddof=1) / math.sqrt(n)
        # Identical samples (eps = 0) must report exactly zero, not the
        # round-off of mean subtraction.
        se_charge[np.ptp(charges, axis=0) == 0.0] = 0.0
        se_energy[np.ptp(energies, axis=0) == 0.0] = 0.0
    else:
        se_charge = np.zeros(charges.shape[1])
        se_energy = np.zeros(energies.shape[1])
    stats = EnsembleStats(
        times=results[0].observables.times.copy(),
        mean_charge=charges.mean(axis=0),
        se_charge=se_charge,
        mean_energy=energies.mean(axis=0),
        se_energy=se_energy,
        n_trajectories=n,
    )
    return results, stats


def slope_fit(log_taus: np.ndarray, log_errors: np.ndarray) -> tuple[float, float]:
    """Ordinary least squares slope and RMS residual of log error vs log tau."""
    lt = np.asarray(log_taus, dtype=float)
    le = np.asarray(log_errors, dtype=float)
    if lt.shape != le.shape or lt.ndim != 1:
        raise ValueError("log_taus and log_errors must be 1-D of equal length")
    if len(lt) < 3:
        raise ValueError(f"need at least 3 points for a slope fit, got {len(lt)}")
    if np.ptp(lt) == 0.0:
        raise ValueError("degenerate fit: all step sizes equal")
    slope, intercept = np.polyfit(lt, le, 1)
    fitted = slope * lt + intercept
    return float(slope), float(np.sqrt(np.mean((le - fitted) ** 2)))


def _as_integer_ratio(value: float, base: float, what: str) -> int:
    ratio = value / base
    m = round(ratio)
    if m < 1 or abs(ratio - m) > 1e-9 * ratio:
        raise ValueError(f"{what}: {value} is not an integer multiple of {base}")
    return m


def convergence_study(
    base_cfg: RunConfig, taus: list[float], tau_ref: float
) -> ConvergenceReport:
    """Strong-error decay against a fine reference on shared Brownian paths.

    For every trajectory, all increments are sampled once at resolution
    tau_ref; each coarser level consumes the sums of consecutive fine
    increments, so every level sees the same path. The error per
    trajectory and level is the discrete l2 distance of final states, the
    level error is the RMS over trajectories, and the reported slope is
    the OLS fit in log2-log2 coordinates.
    """
    taus_sorted = sorted(set(float(t) for t in taus), reverse=True)
    if len(taus_sorted) != len(taus):
        raise ValueError("duplicate step sizes in taus")
    if len(taus_sorted) < 3:
        raise ValueError(f"need at least 3 step sizes, got {len(taus_sorted)}")
    if tau_ref >= taus_sorted[-1]:
        raise ValueError(f"tau_ref = {tau_ref} must be smaller than every tested tau")
    horizon = base_cfg.time.horizon
    n_ref = _as_integer_ratio(horizon, tau_ref, "horizon over tau_ref")
    multiples = [_as_integer_ratio(t, tau_ref, "tau over tau_ref") for t in taus_sorted]
    for t, m in zip(taus_sorted, multiples):
        if n_ref % m != 0:
            raise ValueError(f"tau = {t} does not divide the horizon {horizon} evenly")

    n_traj = base_cfg.n_trajectories
    errors = np.zeros((len(taus_sorted), n_traj))
    ref_cfg = replace(
        base_cfg, time=TimeGrid(tau_ref, n_ref), record_every=n_ref, n_trajectories=1
    )
    for i in range(n_traj):
        rng = np.random.default_rng(mix_seed(base_cfg.master_seed, i))
        fine = sample_path(base_cfg.noise, base_cfg.grid, tau_ref, n_ref, rng)
        u_ref = run_trajectory(ref_cfg, i, increments=fine).final_state
        for level, (tau, m) in enumerate(zip(taus_sorted, multiples)):
            n_steps = n_ref // m
            coarse = fine.reshape(n_steps, m, -1).sum(axis=1)
            level_cfg = replace(
                base_cfg, time=TimeGrid(tau, n_steps), record_every=n_steps, n_trajectories=1
            )
            u_level = run_trajectory(level_cfg, i, increments=coarse).final_state
            errors[level, i] = discrete_l2_norm(u_level - u_ref, base_cfg.grid)

    mean_sq = np.mean(errors**2, axis=1)
    rms = np.sqrt(mean_sq)
    if n_traj > 1:
        # Delta method: se(sqrt(m)) = se(m) / (2 sqrt(m)) for the mean square m.
        se_mean_sq = np.std(errors**2, axis=1, ddof=1) / math.sqrt(n_traj)
        std_errors = se_mean_sq / (2.0 * rms)
    else:
        std_errors = np.zeros_like(rms)
    slope, residual = slope_fit(np.log2(taus_sorted), np.log2(rms))
    return ConvergenceReport(
        taus=np.array(taus_sorted),
        errors=rms,
        std_errors=std_errors,
        fitted_slope=slope,
        fit_residual=residual,
    )
