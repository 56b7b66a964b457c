"""Robust Bayesian inference with bounded pairwise contrasts.

A numpy/scipy library for tempered-posterior estimation that replaces the
log-likelihood with a bounded density-ratio contrast: Gaussian variational
families optimized through a primal-dual objective, squared-Hellinger
oracles for certificates, finite-sample risk-bound calculators, and a
reproducible contamination benchmark harness.
"""

__version__ = "0.1.0"

from .contrast import (
    ContrastEstimate,
    empirical_contrast,
    empirical_supremum_contrast,
    pairwise_contrast,
    population_contrast_mc,
    psi,
    psi_of_log_ratio,
)
from .hellinger import (
    HellingerValue,
    empirical_loss_norm,
    hellinger_sq_closed,
    hellinger_sq_quadrature,
    sample_hellinger_sq,
)
from .models import (
    CanonicalExpFamModel,
    FixedDesignRegressionModel,
    GaussianLocationModel,
    PoissonIntensityModel,
    RatioCode,
    Sample,
    UniformScaleModel,
    expfam_stats,
    log_density,
    log_density_ratio,
)
from .saddle import (
    AdamHyper,
    FitResult,
    McConfig,
    OptimizerConfig,
    SaddleProblem,
    SaddleState,
    adam_step,
    extragradient_step,
    fit_rho_posterior,
    grad_mc,
    logmeanexp_softmax,
    objective_mc,
    variational_softmax,
)
from .variational import (
    FullGaussian,
    GaussianPrior,
    MeanFieldGaussian,
    kl_full,
    kl_meanfield,
    lognormal_mean,
    reparam_full,
    reparam_meanfield,
)
from .bounds import (
    BoundReport,
    beta_n_lambda,
    corollary_coefficients,
    g_bernstein,
    oracle_rhs_estimate,
)
from .experiments import (
    ExperimentConfig,
    RiskTable,
    birge_mle_demo,
    gen_contaminated,
    gen_correlated_regression,
    gen_fourier_regression,
    huber_fit,
    ingest_csv_regression,
    run_trials,
)
