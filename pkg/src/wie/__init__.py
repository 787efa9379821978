"""Weighted inertia-energy selection for linear nonlocal diffusion.

The package picks, for each regularization strength, the single
finite-energy solution of the elliptic-in-time equation, compares it with
the exact evolution semigroup, and ships the measurement harness: root
estimate audits, convergence ladders, branch-divergence demos, and a CLI
that turns JSON configs into deterministic reports.
"""

from .config import SCHEMA_VERSION, ConfigError, ExperimentConfig, parse_config, validate_config
from .forcing import (
    ForcingTerm,
    GrowthClass,
    TimeProfile,
    TransformabilityCertificate,
    TransformabilityError,
    certify_transformable,
    constant_profile,
    exponential_profile,
    power_profile,
    sampled_profile,
)
from .lab import (
    BoundAuditResult,
    BranchDivergenceResult,
    ConvergenceReport,
    LemmaTechProfile,
    bound_audit,
    branch_divergence,
    convergence_study,
    fit_rate,
    lemma_tech_profile,
)
from .ode import (
    OdeProblem,
    eigendecompose,
    energy_ode,
    exact_solution,
    regularized_spectrum,
    selected_minimizer,
    selection_initial,
    viscous_residual,
)
from .quadrature import (
    DEFAULT_SPEC,
    ENERGY_CEILING,
    DivergenceError,
    ExponentOverflowError,
    QuadratureError,
    QuadratureFailure,
    QuadratureSpec,
    convolution_integral,
    finite_interval,
    laplace_tail,
    laplace_tail_shifted,
    poincare_sides,
    weighted_energy,
    weighted_halfline,
)
from .spectral import (
    FrequencyGrid,
    SpectralField,
    SpectralProblem,
    apriori_bound,
    el_residual,
    energy_physical,
    energy_spectral,
    inequality_report,
    l2_norm,
    minimizer_hat,
    real_field,
    root_data,
    semigroup_solution,
    vl_norm,
)
from .symbols import EpsilonPolicy, MultiplierSymbol, build_symbol

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SCHEMA_VERSION",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "validate_config",
    "ForcingTerm",
    "GrowthClass",
    "TimeProfile",
    "TransformabilityCertificate",
    "TransformabilityError",
    "certify_transformable",
    "constant_profile",
    "exponential_profile",
    "power_profile",
    "sampled_profile",
    "BoundAuditResult",
    "BranchDivergenceResult",
    "ConvergenceReport",
    "LemmaTechProfile",
    "bound_audit",
    "branch_divergence",
    "convergence_study",
    "fit_rate",
    "lemma_tech_profile",
    "OdeProblem",
    "eigendecompose",
    "energy_ode",
    "exact_solution",
    "regularized_spectrum",
    "selected_minimizer",
    "selection_initial",
    "viscous_residual",
    "DEFAULT_SPEC",
    "ENERGY_CEILING",
    "DivergenceError",
    "ExponentOverflowError",
    "QuadratureError",
    "QuadratureFailure",
    "QuadratureSpec",
    "convolution_integral",
    "finite_interval",
    "laplace_tail",
    "laplace_tail_shifted",
    "poincare_sides",
    "weighted_energy",
    "weighted_halfline",
    "FrequencyGrid",
    "SpectralField",
    "SpectralProblem",
    "apriori_bound",
    "el_residual",
    "energy_physical",
    "energy_spectral",
    "inequality_report",
    "l2_norm",
    "minimizer_hat",
    "real_field",
    "root_data",
    "semigroup_solution",
    "vl_norm",
    "EpsilonPolicy",
    "MultiplierSymbol",
    "build_symbol",
]
