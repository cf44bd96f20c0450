"""Ensemble Kalman filtering laboratory.

Perturbed-observation filtering in discrete time and in its continuous
SDE limit, over Lorenz '63/'96 and a spectral 2D Navier-Stokes solver,
plus Monte Carlo checks of the filter error bounds and a CLI that runs
the reference experiments.
"""

__version__ = "0.1.0"

from .diagnostics import (
    BoundReport,
    alpha_sq_for_theta,
    check_theorem_cts,
    check_theorem_disc,
    check_theorem_varinf,
    envelope_disc,
    envelope_varinf,
    relative_error,
    theta,
)
from .ensemble import Ensemble, covariance_apply, ensemble_mean
from .filters import (
    AnalysisConfig,
    ContinuousConfig,
    FilterDivergence,
    FilterRun,
    analysis_update,
    analyze,
    convergence_experiment,
    initial_ensemble,
    nudge_noise_substep,
    predict,
    rml_sample,
    run_continuous_filter,
    run_discrete_filter,
)
from .gaussian import GaussianFieldLaw, sample_gaussian_field
from .harness import (
    ConfigError,
    ExperimentConfig,
    load_config,
    run_check,
    run_convergence,
    run_experiment,
)
from .models import (
    AttractorSample,
    LinearModel,
    Lorenz63,
    Lorenz96,
    Model,
    NavierStokes2D,
    estimate_growth_rate,
    rk4_step,
    sample_attractor,
)
from .observation import ObservationOperator, TruthRun, generate_truth, perturb_observation
from .rng import RngStream
from .series import ErrorSeries
from .snapshots import (
    load_attractor_sample,
    load_truth_run,
    save_attractor_sample,
    save_truth_run,
)
from .spectral import SpectralGrid
from .state import KindMismatchError, StateVector

__all__ = [
    "AnalysisConfig",
    "AttractorSample",
    "BoundReport",
    "ConfigError",
    "ContinuousConfig",
    "Ensemble",
    "ErrorSeries",
    "ExperimentConfig",
    "FilterDivergence",
    "FilterRun",
    "GaussianFieldLaw",
    "KindMismatchError",
    "LinearModel",
    "Lorenz63",
    "Lorenz96",
    "Model",
    "NavierStokes2D",
    "ObservationOperator",
    "RngStream",
    "SpectralGrid",
    "StateVector",
    "TruthRun",
    "__version__",
    "alpha_sq_for_theta",
    "analysis_update",
    "analyze",
    "check_theorem_cts",
    "check_theorem_disc",
    "check_theorem_varinf",
    "convergence_experiment",
    "covariance_apply",
    "ensemble_mean",
    "envelope_disc",
    "envelope_varinf",
    "estimate_growth_rate",
    "generate_truth",
    "initial_ensemble",
    "load_attractor_sample",
    "load_config",
    "load_truth_run",
    "nudge_noise_substep",
    "perturb_observation",
    "predict",
    "relative_error",
    "rk4_step",
    "rml_sample",
    "run_check",
    "run_continuous_filter",
    "run_convergence",
    "run_discrete_filter",
    "run_experiment",
    "sample_attractor",
    "sample_gaussian_field",
    "save_attractor_sample",
    "save_truth_run",
    "theta",
]
