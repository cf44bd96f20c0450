"""Filter algorithms: discrete analysis steps, the SDE limit, RML sampling."""

from .continuous import ContinuousConfig, convergence_experiment, nudge_noise_substep, run_continuous_filter
from .discrete import (
    AnalysisConfig,
    FilterDivergence,
    FilterRun,
    analysis_update,
    analyze,
    initial_ensemble,
    predict,
    run_discrete_filter,
)
from .rml import rml_sample

__all__ = [
    "AnalysisConfig",
    "ContinuousConfig",
    "FilterDivergence",
    "FilterRun",
    "analysis_update",
    "analyze",
    "convergence_experiment",
    "initial_ensemble",
    "nudge_noise_substep",
    "predict",
    "rml_sample",
    "run_continuous_filter",
    "run_discrete_filter",
]
