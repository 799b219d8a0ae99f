"""Kernel-based Koopman operator regression with spectral diagnostics."""

from .dynamics import (
    PotentialSpec,
    Trajectory,
    TrajectoryDataset,
    load_csv_trajectory,
    potential_value_grad,
    simulate_langevin,
    simulate_ou,
    stepping_backend,
    trajectory_to_pairs,
)
from .diagnostics import (
    ConcentrationConstants,
    concentration_bounds,
    davis_kahan_bound,
    eig_condition_numbers,
    match_eigenvalues,
    metric_distortion,
    spectral_bias,
)
from .estimators import (
    EigenDecomposition,
    FittedModel,
    RegressorSpec,
    cov_eigs,
    eig,
    evaluate_eigenfunctions,
    fit,
    load_model,
    predict,
    save_model,
    svals_B,
)
from .kernels import (
    RBF,
    HermiteSpectral,
    Linear,
    Matern,
    bad_kernel,
    good_kernel,
    gram,
    hermite_eigenfunction,
    kernel_from_string,
    kernel_to_string,
    ugly_kernel,
)
from .reference import ReferenceSpectrum, generator_spectrum, l2pi_compare, ou_spectrum

__version__ = "0.1.0"

__all__ = [
    "RBF",
    "ConcentrationConstants",
    "EigenDecomposition",
    "FittedModel",
    "HermiteSpectral",
    "Linear",
    "Matern",
    "PotentialSpec",
    "ReferenceSpectrum",
    "RegressorSpec",
    "Trajectory",
    "TrajectoryDataset",
    "bad_kernel",
    "concentration_bounds",
    "cov_eigs",
    "davis_kahan_bound",
    "eig",
    "eig_condition_numbers",
    "evaluate_eigenfunctions",
    "fit",
    "generator_spectrum",
    "good_kernel",
    "gram",
    "hermite_eigenfunction",
    "kernel_from_string",
    "kernel_to_string",
    "l2pi_compare",
    "load_csv_trajectory",
    "load_model",
    "match_eigenvalues",
    "metric_distortion",
    "ou_spectrum",
    "potential_value_grad",
    "predict",
    "save_model",
    "simulate_langevin",
    "simulate_ou",
    "spectral_bias",
    "stepping_backend",
    "svals_B",
    "trajectory_to_pairs",
    "ugly_kernel",
]
