"""Covariate-dependent copula density estimation.

Dirichlet process mixtures of conditional Gaussian copulas, fitted by a
slice-sampling Gibbs algorithm, with conditional Kendall's-tau summaries,
posterior predictive sampling and mixture diagnostics.
"""

from .calibration import CalibrationSpec, conditional_density, eval_calibration, link_rho
from .copulas import (
    SingularCorrelationError,
    frank_kendall_tau,
    frank_theta_for_tau,
    gaussian_copula_cdf,
    gaussian_copula_density,
    gaussian_copula_kendall_tau,
    sample_frank_copula,
    sample_gaussian_copula,
    std_normal_cdf,
    std_normal_quantile,
)
from .posterior import (
    ComponentSummary,
    TauCurve,
    component_rho_means,
    component_summary,
    mixture_kendall_tau,
    predictive_sample,
    tau_curve,
)
from .pseudo import Dataset, PseudoDataset, from_pseudo, to_pseudo
from .sampler import (
    ChainConsistencyError,
    ChainTrace,
    MCMCConfig,
    MixtureState,
    PriorConfig,
    run_chain,
)
from .synth import SimulationPlan, simulate_dataset, true_tau

__version__ = "0.1.0"

__all__ = [
    "CalibrationSpec",
    "ChainConsistencyError",
    "ChainTrace",
    "ComponentSummary",
    "Dataset",
    "MCMCConfig",
    "MixtureState",
    "PriorConfig",
    "PseudoDataset",
    "SimulationPlan",
    "SingularCorrelationError",
    "TauCurve",
    "component_rho_means",
    "component_summary",
    "conditional_density",
    "eval_calibration",
    "frank_kendall_tau",
    "frank_theta_for_tau",
    "from_pseudo",
    "gaussian_copula_cdf",
    "gaussian_copula_density",
    "gaussian_copula_kendall_tau",
    "link_rho",
    "mixture_kendall_tau",
    "predictive_sample",
    "run_chain",
    "sample_frank_copula",
    "sample_gaussian_copula",
    "simulate_dataset",
    "std_normal_cdf",
    "std_normal_quantile",
    "tau_curve",
    "to_pseudo",
    "true_tau",
]
