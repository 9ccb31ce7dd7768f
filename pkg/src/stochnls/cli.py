"""Command-line entry point.

Subcommands:

    simulate     one trajectory; writes its observable series and final state
    ensemble     n_trajectories independent trajectories plus mean/SE series
    converge     strong-convergence study against a shared-path reference
    invariants   per-step identity suite; prints a pass/fail table
    noise-check  statistical tests of the sampled increments

Every run writes a ``manifest.txt`` with the configuration fingerprint and
all seeds, so any output file can be regenerated exactly. Exit status is 0
only if every requested check passed and no trajectory aborted.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    config_hash,
    parse_config,
    parse_converge,
    serialize_config,
)
from .csvio import (
    write_convergence_csv,
    write_ensemble_csv,
    write_manifest,
    write_observables_csv,
    write_state_csv,
)
from .experiments import (
    EnsembleError,
    RunConfig,
    convergence_study,
    mix_seed,
    run_ensemble,
    run_trajectory,
)
from .gridcore import discrete_l2_norm, initial_condition, sine_basis
from .linops import cayley_apply, solve_shifted
from .noise import sample_increment
from .observables import (
    charge_recursion_residual,
    energy_recursion_residual,
    symplectic_form,
)
from .schemes import NonConvergence, StateNotFinite, midpoint_step, tangent_step

CheckRow = tuple[str, bool, float, float]


def _random_states(grid, count: int, rng: np.random.Generator) -> np.ndarray:
    states = rng.standard_normal((count, grid.n_interior)) + 1j * rng.standard_normal(
        (count, grid.n_interior)
    )
    return states


def invariant_checks(cfg: RunConfig) -> list[CheckRow]:
    """Operator facts and per-step identities on the configured problem.

    Returns (name, passed, observed, bound) rows. Deterministic charge
    rows force epsilon to 0; the recursion rows use the configured noise.
    """
    grid, tau = cfg.grid, cfg.time.tau
    fp_tol = cfg.scheme_cfg.fp_tol
    rng = np.random.default_rng(mix_seed(cfg.master_seed, 977))
    rows: list[CheckRow] = []

    # Unitarity and the resolvent identity of the step operator.
    worst_unitary = 0.0
    worst_identity = 0.0
    for u in _random_states(grid, 100, rng):
        norm_u = discrete_l2_norm(u, grid)
        s_u = cayley_apply(u, tau, grid)
        t_u = solve_shifted(u, tau, grid, "minus")
        worst_unitary = max(worst_unitary, abs(discrete_l2_norm(s_u, grid) - norm_u) / norm_u)
        worst_identity = max(
            worst_identity, float(np.max(np.abs(s_u - (2.0 * t_u - u)))) / norm_u
        )
    rows.append(("cayley step is unitary (100 random states)", worst_unitary <= 1e-12,
                 worst_unitary, 1e-12))
    rows.append(("step operator equals 2*resolvent - 1", worst_identity <= 1e-12,
                 worst_identity, 1e-12))

    # Deterministic per-step charge drift for both conservative schemes.
    for scheme in ("midpoint", "multi-symplectic"):
        det = replace(
            cfg,
            params=replace(cfg.params, epsilon=0.0),
            noise=replace(cfg.noise, epsilon=0.0),
            scheme_cfg=replace(cfg.scheme_cfg, scheme=scheme, truncation_radius=None),
            n_trajectories=1,
        )
        series = run_trajectory(det, 0).observables
        drift = float(np.max(np.abs(np.diff(series.charge)))) / series.charge[0]
        rows.append((f"deterministic per-step charge drift, {scheme}", drift <= 1e-10,
                     drift, 1e-10))

    # One-step recursion identities under the configured noise.
    for scheme in ("midpoint", "multi-symplectic"):
        noisy = replace(
            cfg,
            scheme_cfg=replace(cfg.scheme_cfg, scheme=scheme, truncation_radius=None),
            n_trajectories=1,
        )
        series = run_trajectory(noisy, 0).observables
        worst = float(np.nanmax(series.charge_residual))
        rows.append((f"one-step charge recursion, {scheme}", worst <= 10 * fp_tol,
                     worst, 10 * fp_tol))
        if scheme == "multi-symplectic" and cfg.params.sigma == 1.0:
            worst_e = float(np.nanmax(series.energy_residual))
            rows.append(("one-step energy recursion, multi-symplectic",
                         worst_e <= 100 * fp_tol, worst_e, 100 * fp_tol))

    # Transport of the symplectic form by the linearized midpoint step.
    if cfg.params.sigma == 1.0:
        mid_cfg = replace(cfg.scheme_cfg, scheme="midpoint", truncation_radius=None)
        u = initial_condition(grid, "sine")
        xi = np.exp(-10.0 * (grid.interior_nodes() - 0.3) ** 2).astype(complex)
        eta = 1j * np.sin(2 * np.pi * grid.interior_nodes()) + 0.5
        omega_prev = symplectic_form(xi, eta, grid)
        worst_step = 0.0
        for n in range(cfg.time.n_steps):
            dw = sample_increment(cfg.noise, grid, tau, rng, step_index=n)
            u_next = midpoint_step(u, dw, cfg.params, grid, tau, mid_cfg)
            xi = tangent_step(u, xi, dw, cfg.params, grid, tau, mid_cfg, u_np1=u_next)
            eta = tangent_step(u, eta, dw, cfg.params, grid, tau, mid_cfg, u_np1=u_next)
            u = u_next
            omega = symplectic_form(xi, eta, grid)
            worst_step = max(worst_step, abs(omega - omega_prev))
            omega_prev = omega
        rows.append(("symplectic form drift per linearized step",
                     worst_step <= 100 * fp_tol, worst_step, 100 * fp_tol))
    return rows


def noise_checks(cfg: RunConfig, n_samples: int = 100_000) -> list[CheckRow]:
    """Sampled-increment statistics against the exact Gaussian moments.

    Mode coefficients are recovered from the grid values by discrete sine
    projection, which is exact while n_modes fits below the grid's Nyquist
    limit. Variances must match tau * epsilon^2 * k^(-2*decay) within 5
    relative standard errors; coefficients of disjoint steps must be
    uncorrelated within 5 standard errors of zero.
    """
    grid, tau, spec = cfg.grid, cfg.time.tau, cfg.noise
    if spec.epsilon == 0.0:
        return [("noise disabled (epsilon = 0), nothing to test", True, 0.0, 0.0)]
    if spec.n_modes > grid.n_interior:
        raise ConfigError(
            f"noise-check needs n_modes <= {grid.n_interior} for exact projection, "
            f"got {spec.n_modes}"
        )
    rng = np.random.default_rng(mix_seed(cfg.master_seed, 6229))
    basis = sine_basis(grid.n_cells, spec.n_modes)
    project = (2.0 / grid.n_cells) * basis.T

    coeffs = np.empty((n_samples, spec.n_modes))
    for i in range(n_samples):
        draw = sample_increment(spec, grid, tau, rng, step_index=i).values
        coeffs[i] = (project @ draw).real
    target = tau * spec.epsilon**2 * spec.mode_weights() ** 2
    observed = coeffs.var(axis=0, ddof=1)
    rel_se = np.sqrt(2.0 / (n_samples - 1))
    worst_var = float(np.max(np.abs(observed / target - 1.0)))
    rows = [(f"mode variance vs tau*eps^2*k^(-2*decay) ({n_samples} draws)",
             worst_var <= 5 * rel_se, worst_var, 5 * rel_se)]

    n_pairs = min(n_samples, 10_000)
    first = np.empty((n_pairs, spec.n_modes))
    second = np.empty((n_pairs, spec.n_modes))
    for i in range(n_pairs):
        first[i] = (project @ sample_increment(spec, grid, tau, rng).values).real
        second[i] = (project @ sample_increment(spec, grid, tau, rng).values).real
    cov = np.mean(first * second, axis=0) - first.mean(axis=0) * second.mean(axis=0)
    se_cov = np.sqrt(first.var(axis=0) * second.var(axis=0) / n_pairs)
    worst_cov = float(np.max(np.abs(cov / se_cov)))
    rows.append((f"cross-step coefficient covariance ({n_pairs} pairs)",
                 worst_cov <= 5.0, worst_cov, 5.0))
    return rows


def _print_table(rows: list[CheckRow]) -> bool:
    all_ok = True
    for name, ok, value, bound in rows:
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {value:.3e} (bound {bound:.3e})")
        all_ok &= ok
    return all_ok


def _write_common_manifest(out: Path, cfg: RunConfig, command: str,
                           extra: dict[str, str] | None = None) -> None:
    serialized = serialize_config(cfg)
    entries = {
        "tool": f"stochnls {__version__}",
        "command": command,
        "config_sha256": config_hash(serialized),
        "master_seed": str(cfg.master_seed),
        "trajectory_seeds": ", ".join(
            str(mix_seed(cfg.master_seed, i)) for i in range(cfg.n_trajectories)
        ),
    }
    entries.update(extra or {})
    write_manifest(out / "manifest.txt", entries)
    (out / "config.ini").write_text(serialized, encoding="utf-8")


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="configuration file (defaults used when omitted)")
    sub.add_argument("--out", default="out", help="output directory (default: ./out)")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key (repeatable)")
    sub.add_argument("--seed", type=int, help="override ensemble.master_seed")
    sub.add_argument("--trajectories", type=int, help="override ensemble.n_trajectories")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")


def _load_config(args: argparse.Namespace) -> RunConfig:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"master_seed={args.seed}")
    if args.trajectories is not None:
        overrides.append(f"n_trajectories={args.trajectories}")
    return parse_config(args.config, overrides)


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_trajectory(cfg, 0)
    write_observables_csv(out / "trajectory_0.csv", result.observables, cfg.time.tau)
    write_state_csv(out / "final_state_0.csv", result.final_state, cfg.grid)
    _write_common_manifest(out, cfg, "simulate")
    if not args.quiet:
        stats = result.solver_stats
        print(f"simulated {cfg.time.n_steps} steps of {cfg.scheme_cfg.scheme}; "
              f"max solver residual {stats.max_residual:.3e}, "
              f"max sweeps {stats.max_iterations}")
    return 0


def _cmd_ensemble(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results, stats = run_ensemble(cfg)
    for i, result in enumerate(results):
        write_observables_csv(out / f"trajectory_{i}.csv", result.observables, cfg.time.tau)
        write_state_csv(out / f"final_state_{i}.csv", result.final_state, cfg.grid)
    write_ensemble_csv(out / "ensemble_stats.csv", stats)
    _write_common_manifest(out, cfg, "ensemble")
    if not args.quiet:
        print(f"ensemble of {stats.n_trajectories} trajectories; final mean charge "
              f"{stats.mean_charge[-1]:.6f} (se {stats.se_charge[-1]:.2e})")
    return 0


def _cmd_converge(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    taus, tau_ref = parse_converge(args.config, args.overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = convergence_study(cfg, taus, tau_ref)
    write_convergence_csv(out / "convergence.csv", report)
    exponents = tuple(int(round(np.log2(t))) for t in report.taus)
    _write_common_manifest(
        out, cfg, "converge",
        extra={
            "tau_ref": repr(tau_ref),
            "fitted_slope": format(report.fitted_slope, ".17g"),
            "fit_residual": format(report.fit_residual, ".17g"),
            "tau_exponents": ", ".join(str(e) for e in exponents),
        },
    )
    print(f"fitted slope: {report.fitted_slope:.4f} "
          f"(rms fit residual {report.fit_residual:.3e})")
    return 0


def _cmd_invariants(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = invariant_checks(cfg)
    ok = _print_table(rows)
    _write_common_manifest(out, cfg, "invariants",
                           extra={"all_passed": str(ok).lower()})
    return 0 if ok else 1


def _cmd_noise_check(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = noise_checks(cfg, n_samples=args.samples)
    ok = _print_table(rows)
    _write_common_manifest(out, cfg, "noise-check",
                           extra={"all_passed": str(ok).lower()})
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="stochnls",
        description="Structure-preserving integrators for the stochastic "
        "nonlinear Schroedinger equation with a quadratic potential.",
    )
    parser.add_argument("--version", action="version", version=f"stochnls {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "simulate": _cmd_simulate,
        "ensemble": _cmd_ensemble,
        "converge": _cmd_converge,
        "invariants": _cmd_invariants,
        "noise-check": _cmd_noise_check,
    }
    descriptions = {
        "simulate": "run one trajectory and write its observables",
        "ensemble": "run independent trajectories and aggregate statistics",
        "converge": "estimate the strong convergence order",
        "invariants": "verify the per-step conservation identities",
        "noise-check": "verify the sampled noise statistics",
    }
    for name, desc in descriptions.items():
        sub = subparsers.add_parser(name, help=desc)
        _add_common_flags(sub)
        if name == "noise-check":
            sub.add_argument("--samples", type=int, default=100_000,
                             help="number of increments to draw (default 100000)")
    args = parser.parse_args(argv)
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergence, StateNotFinite, EnsembleError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
