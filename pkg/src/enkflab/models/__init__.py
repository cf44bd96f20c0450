from .base import AttractorSample, Model, estimate_growth_rate, rk4_step, sample_attractor
from .lorenz import LinearModel, Lorenz63, Lorenz96
from .nse2d import NavierStokes2D

__all__ = [
    "AttractorSample",
    "LinearModel",
    "Lorenz63",
    "Lorenz96",
    "Model",
    "NavierStokes2D",
    "estimate_growth_rate",
    "rk4_step",
    "sample_attractor",
]
