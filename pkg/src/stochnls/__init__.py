"""Structure-preserving time integrators for a stochastic NLS equation.

The model is the cubic-type Schroedinger equation on (0, 1) with Dirichlet
boundaries, a quadratic potential, and additive spectral noise, discretized
by central differences in space. Three one-step schemes are provided: an
implicit midpoint rule, a truncated variant that damps the nonlinearity at
large amplitude, and a box-type scheme that also preserves a multi-symplectic
structure. All of them conserve the discrete charge exactly in the absence
of noise and satisfy exact one-step recursion identities with it.
"""

from .config import ConfigError, config_hash, parse_config, parse_converge, serialize_config
from .experiments import (
    ConvergenceReport,
    EnsembleError,
    EnsembleStats,
    RunConfig,
    TrajectoryResult,
    convergence_study,
    mix_seed,
    run_ensemble,
    run_trajectory,
    slope_fit,
)
from .gridcore import (
    GridSpec,
    ModelParams,
    TimeGrid,
    discrete_h1_norm,
    discrete_l2_norm,
    initial_condition,
)
from .linops import (
    apply_laplacian,
    cayley_apply,
    exact_semigroup,
    laplacian_eigenvalues,
    operator_deviation,
    solve_shifted,
)
from .noise import NoiseSpec, WienerIncrement, hs_norm_squared, sample_increment, sample_path
from .observables import (
    ObservableSeries,
    charge,
    charge_recursion_residual,
    energy,
    energy_recursion_residual,
    symplectic_form,
)
from .schemes import (
    CUTOFF_KINDS,
    SCHEME_NAMES,
    SCHEME_STEPS,
    IterationLog,
    NonConvergence,
    SchemeConfig,
    StateNotFinite,
    midpoint_step,
    multisymplectic_step,
    tangent_step,
    truncated_midpoint_step,
)

__version__ = "0.1.0"

__all__ = [
    "CUTOFF_KINDS",
    "ConfigError",
    "ConvergenceReport",
    "EnsembleError",
    "EnsembleStats",
    "GridSpec",
    "IterationLog",
    "ModelParams",
    "NoiseSpec",
    "NonConvergence",
    "ObservableSeries",
    "RunConfig",
    "SCHEME_NAMES",
    "SCHEME_STEPS",
    "SchemeConfig",
    "StateNotFinite",
    "TimeGrid",
    "TrajectoryResult",
    "WienerIncrement",
    "apply_laplacian",
    "cayley_apply",
    "charge",
    "charge_recursion_residual",
    "config_hash",
    "convergence_study",
    "discrete_h1_norm",
    "discrete_l2_norm",
    "energy",
    "energy_recursion_residual",
    "exact_semigroup",
    "hs_norm_squared",
    "initial_condition",
    "laplacian_eigenvalues",
    "mix_seed",
    "midpoint_step",
    "multisymplectic_step",
    "operator_deviation",
    "parse_config",
    "parse_converge",
    "run_ensemble",
    "run_trajectory",
    "sample_increment",
    "sample_path",
    "serialize_config",
    "slope_fit",
    "solve_shifted",
    "symplectic_form",
    "tangent_step",
    "truncated_midpoint_step",
    "__version__",
]
