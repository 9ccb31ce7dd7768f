import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochnls import (
    ConfigError,
    config_hash,
    parse_config,
    parse_converge,
    serialize_config,
)
from stochnls.csvio import (
    read_convergence_csv,
    read_state_csv,
    write_convergence_csv,
    write_manifest,
    write_state_csv,
)
from stochnls.experiments import ConvergenceReport
from stochnls.gridcore import GridSpec


def test_defaults_without_file():
    cfg = parse_config()
    assert cfg.grid.n_cells == 64
    assert cfg.time.tau == 2.0**-8
    assert cfg.time.n_steps == 128
    assert cfg.params.theta == 1.0
    assert cfg.params.lam == 1.0
    assert cfg.noise.n_modes == 50
    assert cfg.noise.decay == 4.6
    assert cfg.noise.kind == "real"
    assert cfg.scheme_cfg.scheme == "midpoint"
    assert cfg.scheme_cfg.fp_tol == 1e-12
    assert cfg.scheme_cfg.truncation_radius is None
    assert cfg.n_trajectories == 1
    assert cfg.master_seed == 12345


def test_file_and_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[grid]\nn_cells = 32\n\n[params]\ntheta = -1.0\nepsilon = 0.2\n"
        "[scheme]\nscheme = multi-symplectic\n",
        encoding="utf-8",
    )
    cfg = parse_config(str(ini))
    assert cfg.grid.n_cells == 32
    assert cfg.params.theta == -1.0
    assert cfg.scheme_cfg.scheme == "multi-symplectic"
    # epsilon feeds both the model parameters and the sampler.
    assert cfg.params.epsilon == cfg.noise.epsilon == 0.2
    # Bare-key override, as accepted on the command line.
    cfg2 = parse_config(str(ini), overrides=["tau=0.001", "ensemble.master_seed=7"])
    assert cfg2.time.tau == 0.001
    assert cfg2.master_seed == 7


def test_lambda_key_maps_to_lam(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[params]\nlambda = 0.0\n", encoding="utf-8")
    assert parse_config(str(ini)).params.lam == 0.0


def test_unknown_keys_rejected(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[grid]\nn_cells = 32\nspacing = 0.1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="spacing"):
        parse_config(str(ini))
    ini.write_text("[mesh]\nn_cells = 32\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="mesh"):
        parse_config(str(ini))
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(None, overrides=["spacing=0.1"])
    with pytest.raises(ConfigError):
        parse_config(None, overrides=["garbage"])


def test_invalid_values_become_config_errors():
    with pytest.raises(ConfigError, match=r"sigma must lie in \(0,2\)"):
        parse_config(None, overrides=["sigma=2.5"])
    with pytest.raises(ConfigError):
        parse_config(None, overrides=["n_cells=not-a-number"])
    with pytest.raises(ConfigError):
        parse_config(None, overrides=["scheme=truncated-midpoint"])  # radius missing


def test_truncation_radius_parsing():
    cfg = parse_config(None, overrides=["scheme=truncated-midpoint", "truncation_radius=6.5"])
    assert cfg.scheme_cfg.truncation_radius == 6.5
    cfg2 = parse_config(None, overrides=["truncation_radius=none"])
    assert cfg2.scheme_cfg.truncation_radius is None


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(str(tmp_path / "absent.ini"))


def test_serialize_round_trip(tmp_path):
    cfg = parse_config(None, overrides=["epsilon=0.7", "n_cells=32", "scheme=multi-symplectic"])
    text = serialize_config(cfg)
    ini = tmp_path / "round.ini"
    ini.write_text(text, encoding="utf-8")
    again = parse_config(str(ini))
    assert again == cfg
    assert config_hash(text) == config_hash(serialize_config(again))
    other = serialize_config(parse_config(None, overrides=["epsilon=0.8"]))
    assert config_hash(other) != config_hash(text)


@given(eps=st.floats(min_value=0.0, max_value=10.0, allow_nan=False))
def test_serialize_round_trip_epsilon_exact(tmp_path_factory, eps):
    # repr-based serialization must survive parsing bit for bit.
    cfg = parse_config(None, overrides=[f"epsilon={eps!r}"])
    path = tmp_path_factory.mktemp("cfg") / "x.ini"
    path.write_text(serialize_config(cfg), encoding="utf-8")
    assert parse_config(str(path)).params.epsilon == eps


def test_parse_converge_defaults_and_validation(tmp_path):
    taus, tau_ref = parse_converge(None, [])
    np.testing.assert_allclose(taus, [2.0**p for p in range(-7, -12, -1)])
    assert tau_ref == 2.0**-12
    with pytest.raises(ConfigError):
        parse_converge(None, ["tau_exponents=-5, -6"])  # too short
    with pytest.raises(ConfigError):
        parse_converge(None, ["tau_ref_exponent=-7"])  # not finer than ladder


def test_state_csv_round_trip(tmp_path):
    grid = GridSpec(8)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(grid.n_interior) + 1j * rng.standard_normal(grid.n_interior)
    path = tmp_path / "state.csv"
    write_state_csv(path, u, grid)
    lines = path.read_text().splitlines()
    assert lines[0] == "j,x,re,im"
    assert len(lines) == 1 + grid.n_interior
    values, xs = read_state_csv(path)
    np.testing.assert_array_equal(values, u)  # 17 significant digits round-trip
    np.testing.assert_array_equal(xs, grid.interior_nodes())


def test_convergence_csv_round_trip(tmp_path):
    report = ConvergenceReport(
        taus=np.array([0.25, 0.125]),
        errors=np.array([1e-2, 5e-3]),
        std_errors=np.array([1e-4, 5e-5]),
        fitted_slope=1.0,
        fit_residual=0.0,
    )
    path = tmp_path / "conv.csv"
    write_convergence_csv(path, report)
    table = read_convergence_csv(path)
    np.testing.assert_array_equal(table["tau"], report.taus)
    np.testing.assert_array_equal(table["rms_error"], report.errors)
    np.testing.assert_allclose(table["log2_tau"], [-2.0, -3.0])


def test_manifest_format(tmp_path):
    path = tmp_path / "manifest.txt"
    write_manifest(path, {"command": "simulate", "master_seed": "42"})
    assert path.read_text() == "command: simulate\nmaster_seed: 42\n"
