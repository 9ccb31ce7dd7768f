"""Run configuration: INI-style file with typed, validated keys.

Sections and keys (defaults reproduce the standard experiment at desk
scale):

    [grid]      n_cells
    [time]      tau, n_steps
    [params]    theta, lambda, sigma, epsilon
    [noise]     n_modes, decay, kind
    [scheme]    scheme, fp_tol, fp_max_iter, truncation_radius, cutoff_kind
    [ensemble]  n_trajectories, master_seed, record_every
    [converge]  tau_exponents, tau_ref_exponent

Step sizes for convergence studies are given as powers of two (tau = 2^e)
so that every level divides the reference exactly. Keys are unique across
sections, so overrides may be written either as ``key=value`` or
``section.key=value``. Unknown sections or keys are rejected rather than
ignored; a typo must not silently fall back to a default.

The single ``epsilon`` key feeds both the model parameters and the noise
spec; the noise module is the only place the amplitude is applied.
"""

from __future__ import annotations

import configparser
import hashlib
import io

from .experiments import RunConfig
from .gridcore import GridSpec, ModelParams, TimeGrid
from .noise import NoiseSpec
from .schemes import SchemeConfig


class ConfigError(ValueError):
    """A configuration file or override failed to parse or validate."""


def _parse_int(text: str) -> int:
    return int(text, 0)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    return text.strip()


def _parse_int_list(text: str) -> tuple[int, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(int(part, 0) for part in items)


def _parse_optional_float(text: str) -> float | None:
    text = text.strip()
    if not text or text.lower() == "none":
        return None
    return float(text)


# section -> key -> (converter, default). Defaults are the desk-scale
# standard problem: 64 cells, T = 0.5 at tau = 2^-8, deterministic.
_SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {"n_cells": (_parse_int, 64)},
    "time": {"tau": (_parse_float, 2.0**-8), "n_steps": (_parse_int, 128)},
    "params": {
        "theta": (_parse_float, 1.0),
        "lambda": (_parse_float, 1.0),
        "sigma": (_parse_float, 1.0),
        "epsilon": (_parse_float, 0.0),
    },
    "noise": {
        "n_modes": (_parse_int, 50),
        "decay": (_parse_float, 4.6),
        "kind": (_parse_str, "real"),
    },
    "scheme": {
        "scheme": (_parse_str, "midpoint"),
        "fp_tol": (_parse_float, 1e-12),
        "fp_max_iter": (_parse_int, 100),
        "truncation_radius": (_parse_optional_float, None),
        "cutoff_kind": (_parse_str, "smooth-bump"),
    },
    "ensemble": {
        "n_trajectories": (_parse_int, 1),
        "master_seed": (_parse_int, 12345),
        "record_every": (_parse_int, 1),
    },
    "converge": {
        "tau_exponents": (_parse_int_list, (-7, -8, -9, -10, -11)),
        "tau_ref_exponent": (_parse_int, -12),
    },
}

_KEY_TO_SECTION = {
    key: section for section, keys in _SCHEMA.items() for key in keys
}
assert len(_KEY_TO_SECTION) == sum(len(keys) for keys in _SCHEMA.values())


def _read_file(path: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {section}.{key}")
            raw.setdefault(section, {})[key] = value
    return raw


def _apply_overrides(raw: dict[str, dict[str, str]], overrides) -> None:
    if overrides is None:
        return
    if isinstance(overrides, dict):
        overrides = [f"{k}={v}" for k, v in overrides.items()]
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." in key:
            section, key = key.split(".", 1)
            if section not in _SCHEMA or key not in _SCHEMA[section]:
                raise ConfigError(f"override references unknown key {section}.{key}")
        else:
            if key not in _KEY_TO_SECTION:
                raise ConfigError(f"override references unknown key {key!r}")
            section = _KEY_TO_SECTION[key]
        raw.setdefault(section, {})[key] = value.strip()


def _resolve(raw: dict[str, dict[str, str]]) -> dict[str, dict]:
    values: dict[str, dict] = {}
    for section, keys in _SCHEMA.items():
        values[section] = {}
        for key, (convert, default) in keys.items():
            if section in raw and key in raw[section]:
                text = raw[section][key]
                try:
                    values[section][key] = convert(text)
                except ValueError as exc:
                    raise ConfigError(
                        f"{section}.{key}: cannot parse {text!r} ({exc})"
                    ) from exc
            else:
                values[section][key] = default
    return values


def _build(values: dict[str, dict]) -> RunConfig:
    try:
        grid = GridSpec(n_cells=values["grid"]["n_cells"])
        time = TimeGrid(tau=values["time"]["tau"], n_steps=values["time"]["n_steps"])
        params = ModelParams(
            theta=values["params"]["theta"],
            lam=values["params"]["lambda"],
            sigma=values["params"]["sigma"],
            epsilon=values["params"]["epsilon"],
        )
        noise = NoiseSpec(
            n_modes=values["noise"]["n_modes"],
            decay=values["noise"]["decay"],
            epsilon=values["params"]["epsilon"],
            kind=values["noise"]["kind"],
        )
        scheme_cfg = SchemeConfig(
            scheme=values["scheme"]["scheme"],
            fp_tol=values["scheme"]["fp_tol"],
            fp_max_iter=values["scheme"]["fp_max_iter"],
            truncation_radius=values["scheme"]["truncation_radius"],
            cutoff_kind=values["scheme"]["cutoff_kind"],
        )
        return RunConfig(
            grid=grid,
            time=time,
            params=params,
            noise=noise,
            scheme_cfg=scheme_cfg,
            n_trajectories=values["ensemble"]["n_trajectories"],
            master_seed=values["ensemble"]["master_seed"],
            record_every=values["ensemble"]["record_every"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str | None = None, overrides=None) -> RunConfig:
    """Load, override, validate. ``path`` may be None to use pure defaults.

    ``overrides`` is an iterable of ``key=value`` strings (or a dict); keys
    may carry an explicit ``section.`` prefix but do not need one.
    """
    raw = _read_file(path) if path is not None else {}
    _apply_overrides(raw, overrides)
    return _build(_resolve(raw))


def parse_converge(path: str | None = None, overrides=None) -> tuple[list[float], float]:
    """Step sizes and reference step for a convergence study, from [converge]."""
    raw = _read_file(path) if path is not None else {}
    _apply_overrides(raw, overrides)
    values = _resolve(raw)
    exponents = values["converge"]["tau_exponents"]
    ref_exp = values["converge"]["tau_ref_exponent"]
    if len(exponents) < 3:
        raise ConfigError("converge.tau_exponents needs at least 3 entries")
    if ref_exp >= min(exponents):
        raise ConfigError(
            "converge.tau_ref_exponent must be smaller than every tau exponent"
        )
    return [2.0**e for e in exponents], 2.0**ref_exp


def serialize_config(
    cfg: RunConfig,
    tau_exponents: tuple[int, ...] | None = None,
    tau_ref_exponent: int | None = None,
) -> str:
    """Canonical text form; reparsing it reproduces an equal RunConfig."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["grid"] = {"n_cells": str(cfg.grid.n_cells)}
    parser["time"] = {"tau": repr(cfg.time.tau), "n_steps": str(cfg.time.n_steps)}
    parser["params"] = {
        "theta": repr(cfg.params.theta),
        "lambda": repr(cfg.params.lam),
        "sigma": repr(cfg.params.sigma),
        "epsilon": repr(cfg.params.epsilon),
    }
    parser["noise"] = {
        "n_modes": str(cfg.noise.n_modes),
        "decay": repr(cfg.noise.decay),
        "kind": cfg.noise.kind,
    }
    scheme: dict[str, str] = {
        "scheme": cfg.scheme_cfg.scheme,
        "fp_tol": repr(cfg.scheme_cfg.fp_tol),
        "fp_max_iter": str(cfg.scheme_cfg.fp_max_iter),
        "cutoff_kind": cfg.scheme_cfg.cutoff_kind,
    }
    if cfg.scheme_cfg.truncation_radius is not None:
        scheme["truncation_radius"] = repr(cfg.scheme_cfg.truncation_radius)
    parser["scheme"] = scheme
    parser["ensemble"] = {
        "n_trajectories": str(cfg.n_trajectories),
        "master_seed": str(cfg.master_seed),
        "record_every": str(cfg.record_every),
    }
    if tau_exponents is not None and tau_ref_exponent is not None:
        parser["converge"] = {
            "tau_exponents": ", ".join(str(e) for e in tau_exponents),
            "tau_ref_exponent": str(tau_ref_exponent),
        }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def config_hash(serialized: str) -> str:
    """Stable fingerprint of a serialized configuration."""
    return hashlib.sha256(serialized.encode("utf-8")).hexdigest()
