"""Gaussian laws used for initial data and perturbations.

Three covariance families are supported:

* ``white``: sigma^2 * I in the state's natural coordinates;
* ``inverse_stokes``: c * A^{-1} with A the Stokes operator of the model;
* ``inverse_stokes_sq``: c * A^{-2} (the stationary-measure-like law used
  to draw initial velocity fields; c = nu^2 reproduces the per-mode
  coefficient variance (length / (2 pi |m|))^4).

For spectral states the real and imaginary parts of each stored coefficient
are independent and carry half of the per-mode variance, which is exactly
what the scaled real layout encodes: both slots of mode m get the full
per-mode eigenvalue as their variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import StateVector

_KINDS = ("white", "inverse_stokes", "inverse_stokes_sq")


@dataclass(frozen=True)
class GaussianFieldLaw:
    """A zero-mean Gaussian law identified by covariance family and scale."""

    kind: str
    scale: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown Gaussian law kind {self.kind!r}")
        if self.kind == "white":
            if self.scale < 0:
                raise ValueError("white-noise std must be non-negative")
        elif self.scale <= 0:
            raise ValueError(f"{self.kind} law needs a positive scale")

    def slot_variances(self, model) -> np.ndarray:
        """Variance of every slot of the real state layout under this law."""
        if self.kind == "white":
            return np.full(model.dim, self.scale**2)
        if model.grid is None:
            raise ValueError(f"{self.kind} law needs a spectral model")
        eig = model.grid.stokes_eigenvalues(model.nu)
        if self.kind == "inverse_stokes":
            per_mode = self.scale / eig
        else:
            per_mode = self.scale / eig**2
        return model.grid.per_slot(per_mode)

    def sample(self, model, rng: np.random.Generator) -> StateVector:
        """Draw one state distributed N(0, covariance) for ``model``."""
        std = np.sqrt(self.slot_variances(model))
        data = std * rng.standard_normal(model.dim)
        return StateVector(model.kind, data, model.grid)

    def sample_block(self, model, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``count`` independent states as a (count, dim) array."""
        std = np.sqrt(self.slot_variances(model))
        return std * rng.standard_normal((count, model.dim))


def sample_gaussian_field(law: GaussianFieldLaw, model, rng: np.random.Generator) -> StateVector:
    """Draw one sample of ``law`` adapted to ``model``."""
    return law.sample(model, rng)
