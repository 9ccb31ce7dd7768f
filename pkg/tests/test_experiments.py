import math

import numpy as np
import pytest

from stochnls import (
    EnsembleError,
    GridSpec,
    ModelParams,
    NoiseSpec,
    RunConfig,
    SchemeConfig,
    TimeGrid,
    convergence_study,
    discrete_l2_norm,
    exact_semigroup,
    initial_condition,
    mix_seed,
    operator_deviation,
    run_ensemble,
    run_trajectory,
    slope_fit,
)


def make_config(**kw):
    defaults = dict(
        grid=GridSpec(16),
        time=TimeGrid(tau=2.0**-6, n_steps=16),
        params=ModelParams(epsilon=0.3),
        noise=NoiseSpec(n_modes=5, decay=4.6, epsilon=0.3),
        scheme_cfg=SchemeConfig(fp_tol=1e-12),
        n_trajectories=3,
        master_seed=42,
        record_every=1,
    )
    defaults.update(kw)
    return RunConfig(**defaults)


def test_mix_seed_properties():
    seeds = {mix_seed(42, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)
    assert mix_seed(42, 7) == mix_seed(42, 7)
    assert mix_seed(42, 7) != mix_seed(43, 7)


def test_run_config_validation():
    with pytest.raises(ValueError):
        make_config(n_trajectories=0)
    with pytest.raises(ValueError):
        make_config(record_every=0)


def test_trajectory_deterministic():
    cfg = make_config()
    a = run_trajectory(cfg, 0)
    b = run_trajectory(cfg, 0)
    np.testing.assert_array_equal(a.final_state, b.final_state)
    assert a.seed == b.seed == mix_seed(42, 0)
    c = run_trajectory(cfg, 1)
    assert not np.array_equal(a.final_state, c.final_state)


def test_trajectory_recording_grid():
    cfg = make_config(time=TimeGrid(tau=0.125, n_steps=10), record_every=4)
    series = run_trajectory(cfg, 0).observables
    np.testing.assert_allclose(series.times, [0.0, 0.5, 1.0, 1.25])
    assert math.isnan(series.charge_residual[0])
    assert np.all(np.isfinite(series.charge_residual[1:]))
    # No energy identity for the midpoint scheme.
    assert np.all(np.isnan(series.energy_residual))


def test_trajectory_explicit_increments_match_zero_noise():
    cfg = make_config(
        params=ModelParams(epsilon=0.0), noise=NoiseSpec(n_modes=5, decay=4.6, epsilon=0.0)
    )
    direct = run_trajectory(cfg, 0)
    forced = run_trajectory(
        make_config(), 0, increments=np.zeros((cfg.time.n_steps, cfg.grid.n_interior))
    )
    np.testing.assert_allclose(forced.final_state, direct.final_state, atol=1e-14)


def test_free_trajectory_matches_semigroup_up_to_phase_error():
    # With all terms off, N midpoint steps differ from the exact discrete
    # flow only by the accumulated rational-phase error, whose size the
    # eigenline formula predicts; the two must agree to near round-off.
    grid = GridSpec(64)
    tau, n_steps = 1e-3, 100
    cfg = make_config(
        grid=grid,
        time=TimeGrid(tau=tau, n_steps=n_steps),
        params=ModelParams(theta=0.0, lam=0.0, epsilon=0.0),
        noise=NoiseSpec(n_modes=5, decay=4.6, epsilon=0.0),
        scheme_cfg=SchemeConfig(fp_tol=1e-13),
        n_trajectories=1,
    )
    final = run_trajectory(cfg, 0).final_state
    u0 = initial_condition(grid, "sine")
    gap = discrete_l2_norm(final - exact_semigroup(u0, tau * n_steps, grid), grid)
    assert gap == pytest.approx(operator_deviation(n_steps, tau, grid, u0), abs=1e-10)


def test_deterministic_ensemble_collapses():
    cfg = make_config(
        params=ModelParams(epsilon=0.0),
        noise=NoiseSpec(n_modes=5, decay=4.6, epsilon=0.0),
        n_trajectories=3,
    )
    results, stats = run_ensemble(cfg)
    np.testing.assert_array_equal(results[0].final_state, results[1].final_state)
    assert np.all(stats.se_charge == 0.0)


def test_multisymplectic_trajectory_has_energy_residuals():
    cfg = make_config(scheme_cfg=SchemeConfig(scheme="multi-symplectic", fp_tol=1e-12))
    series = run_trajectory(cfg, 0).observables
    assert np.all(np.isfinite(series.energy_residual[1:]))
    assert np.nanmax(series.energy_residual) < 1e-10


def test_ensemble_stats_against_manual_average():
    cfg = make_config(n_trajectories=4)
    results, stats = run_ensemble(cfg)
    assert stats.n_trajectories == 4
    charges = np.array([r.observables.charge for r in results])
    np.testing.assert_allclose(stats.mean_charge, charges.mean(axis=0), rtol=1e-13)
    np.testing.assert_allclose(
        stats.se_charge, charges.std(axis=0, ddof=1) / 2.0, rtol=1e-12
    )


def test_ensemble_single_trajectory_has_zero_se():
    _, stats = run_ensemble(make_config(n_trajectories=1))
    assert np.all(stats.se_charge == 0.0)
    assert np.all(stats.se_energy == 0.0)


def test_ensemble_aborts_on_failures():
    # One Picard sweep cannot resolve the stiff step, so every trajectory
    # fails and the ensemble must abort rather than return partial stats.
    cfg = make_config(
        time=TimeGrid(tau=0.5, n_steps=4),
        params=ModelParams(epsilon=0.0),
        noise=NoiseSpec(n_modes=5, decay=4.6, epsilon=0.0),
        scheme_cfg=SchemeConfig(fp_tol=1e-14, fp_max_iter=1),
    )
    with pytest.raises(EnsembleError, match="trajectory"):
        run_ensemble(cfg)


def test_slope_fit_exact_line():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    slope, resid = slope_fit(x, 2.0 * x + 1.0)
    assert slope == pytest.approx(2.0, abs=1e-13)
    assert resid == pytest.approx(0.0, abs=1e-13)


def test_slope_fit_alternating_perturbation():
    # Symmetric +-0.1 pattern around a unit-slope line is orthogonal to x,
    # so the fitted slope is exactly 1 and the rms residual is sqrt(0.0096).
    x = np.arange(5.0)
    pert = np.array([0.1, -0.1, 0.1, -0.1, 0.1])
    slope, resid = slope_fit(x, x + pert)
    assert slope == pytest.approx(1.0, abs=1e-12)
    assert resid == pytest.approx(math.sqrt(0.0096), rel=1e-12)


def test_slope_fit_rejects_degenerate_input():
    with pytest.raises(ValueError):
        slope_fit(np.array([0.0, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        slope_fit(np.zeros(4), np.arange(4.0))


def test_convergence_study_deterministic_order():
    cfg = make_config(
        grid=GridSpec(32),
        time=TimeGrid(tau=2.0**-7, n_steps=2**7 // 4),  # T = 0.25
        params=ModelParams(epsilon=0.0),
        noise=NoiseSpec(n_modes=5, decay=4.6, epsilon=0.0),
        n_trajectories=1,
    )
    report = convergence_study(cfg, taus=[2.0**-7, 2.0**-8, 2.0**-9], tau_ref=2.0**-11)
    assert report.taus[0] > report.taus[-1]
    assert np.all(report.errors > 0.0)
    assert np.all(report.std_errors == 0.0)
    assert 1.5 < report.fitted_slope < 2.5


def test_convergence_study_deterministic_across_calls():
    cfg = make_config(n_trajectories=2, time=TimeGrid(tau=2.0**-6, n_steps=8))
    kw = dict(taus=[2.0**-4, 2.0**-5, 2.0**-6], tau_ref=2.0**-8)
    a = convergence_study(cfg, **kw)
    b = convergence_study(cfg, **kw)
    np.testing.assert_array_equal(a.errors, b.errors)
    assert a.fitted_slope == b.fitted_slope


def test_convergence_study_validates_ladder():
    cfg = make_config(n_trajectories=1)
    with pytest.raises(ValueError):
        convergence_study(cfg, taus=[0.25, 0.125], tau_ref=0.5)  # ref coarser
    with pytest.raises(ValueError):
        convergence_study(cfg, taus=[0.3, 0.2, 0.1], tau_ref=0.07)  # not multiples
