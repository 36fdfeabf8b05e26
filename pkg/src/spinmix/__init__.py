"""Second-moment thresholds and finite-N Monte Carlo for multi-species
spherical mixed p-spin models."""

__version__ = "0.1.0"

from .mixture import Mixture, SpeciesSet
from .model import (
    ModelSpec,
    ModelFormatError,
    load_model,
    loads_model,
    dumps_model,
    model_hash,
    sk_model,
    pure_model,
    two_species_quadratic_model,
)
from .landscape import (
    MaximizeResult,
    f_beta,
    f_tilde_beta,
    g_beta,
    f_grad,
    f_hessian,
    hessian_at_zero,
    maximize_f,
)
from .criticality import (
    CritReport,
    Verdict,
    beta_m,
    beta_m_tilde,
    beta_hessian_singular,
    beta_c_talagrand,
    check_nsd,
    verdict,
)
from .montecarlo import (
    FiniteModel,
    DisorderSample,
    EstimatorResult,
    BudgetError,
    CoefficientLawError,
    build_finite_model,
    sample_disorder,
    evaluate_H,
    evaluate_H_batch,
    covariance_exact,
    overlap,
    sample_uniform,
    sample_on_band,
    estimate_free_energy,
    estimate_level_set,
    estimate_band_free_energy,
    band_prediction,
)
from .quadrature import QuadratureError, log_E_Z2_exact

__all__ = [
    "Mixture",
    "SpeciesSet",
    "ModelSpec",
    "ModelFormatError",
    "load_model",
    "loads_model",
    "dumps_model",
    "model_hash",
    "sk_model",
    "pure_model",
    "two_species_quadratic_model",
    "MaximizeResult",
    "f_beta",
    "f_tilde_beta",
    "g_beta",
    "f_grad",
    "f_hessian",
    "hessian_at_zero",
    "maximize_f",
    "CritReport",
    "Verdict",
    "beta_m",
    "beta_m_tilde",
    "beta_hessian_singular",
    "beta_c_talagrand",
    "check_nsd",
    "verdict",
    "FiniteModel",
    "DisorderSample",
    "EstimatorResult",
    "BudgetError",
    "CoefficientLawError",
    "build_finite_model",
    "sample_disorder",
    "evaluate_H",
    "evaluate_H_batch",
    "covariance_exact",
    "overlap",
    "sample_uniform",
    "sample_on_band",
    "estimate_free_energy",
    "estimate_level_set",
    "estimate_band_free_energy",
    "band_prediction",
    "QuadratureError",
    "log_E_Z2_exact",
]
