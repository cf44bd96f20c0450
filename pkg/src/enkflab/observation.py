"""Observation operators, synthetic truth generation, and perturbed data.

Operators are diagonal 0/1 masks in the state's natural coordinates: the
identity (``full``), nothing (``zero``), or — for spectral states — the
projection onto wavevectors inside or outside a spectral ring.  Observation
noise is white with per-component standard deviation gamma, applied within
the observed subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream
from .spectral import SpectralGrid
from .state import StateVector

OPERATOR_KINDS = ("full", "inside", "outside", "zero")


@dataclass(frozen=True)
class ObservationOperator:
    """A spectral projection mask.

    Args:
        kind: ``full`` observes every component, ``zero`` none,
            ``inside``/``outside`` the modes inside/outside a ring.
        ring_radius: ring size for the partial kinds (|m| < radius at the
            default box side, strict inequality).
        strict: whether the ring boundary is excluded (default) or included.
    """

    kind: str
    ring_radius: float | None = None
    strict: bool = True

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown observation operator kind {self.kind!r}")
        if self.kind in ("inside", "outside"):
            if self.ring_radius is None or self.ring_radius <= 0:
                raise ValueError(f"{self.kind} operator needs a positive ring radius")

    def mask_for(self, model) -> np.ndarray:
        """Per-slot 0/1 mask aligned with the model's state layout."""
        if self.kind == "full":
            return np.ones(model.dim)
        if self.kind == "zero":
            return np.zeros(model.dim)
        if model.grid is None:
            raise ValueError(f"ring operator {self.kind!r} applies only to spectral states")
        inside = model.grid.ring_mask(self.ring_radius, self.strict)
        per_mode = inside if self.kind == "inside" else ~inside
        return model.grid.per_slot(per_mode.astype(np.float64))

    def complement(self) -> "ObservationOperator":
        """The operator observing exactly the unobserved components."""
        swap = {"full": "zero", "zero": "full", "inside": "outside", "outside": "inside"}
        return ObservationOperator(swap[self.kind], self.ring_radius, self.strict)

    def apply(self, state: StateVector, model) -> StateVector:
        return state.like(state.data * self.mask_for(model))

    def describe(self) -> str:
        if self.kind in ("inside", "outside"):
            bound = "strict" if self.strict else "closed"
            return f"{self.kind}(radius={self.ring_radius:g},{bound})"
        return self.kind


@dataclass
class TruthRun:
    """A reference trajectory with observations at every step after t=0."""

    kind: str
    h: float
    gamma: float
    operator: ObservationOperator
    states: np.ndarray
    observations: np.ndarray
    grid: SpectralGrid | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.observations.shape[0] != self.states.shape[0] - 1:
            raise ValueError("need exactly one observation per step after the initial state")

    @property
    def n_obs(self) -> int:
        return self.observations.shape[0]

    def state(self, j: int) -> StateVector:
        return StateVector(self.kind, self.states[j].copy(), self.grid)


def generate_truth(
    model,
    operator: ObservationOperator,
    u0: StateVector,
    h: float,
    n_obs: int,
    gamma: float,
    stream: RngStream,
) -> TruthRun:
    """Advance the truth n_obs steps of length h, observing after each step.

    The observation at step j is mask * (u_j + gamma * xi_j) with xi_j white;
    noise outside the observed subspace is never drawn into the data.
    """
    if gamma < 0:
        raise ValueError("observation noise std must be non-negative")
    if n_obs < 1:
        raise ValueError("need at least one observation")
    model._check_state(u0)
    mask = operator.mask_for(model)
    states = np.empty((n_obs + 1, model.dim))
    obs = np.empty((n_obs, model.dim))
    x = u0.data[None, :].copy()
    states[0] = x[0]
    for j in range(1, n_obs + 1):
        x = model.step_block(x, h)
        states[j] = x[0]
        xi = stream.substream("truth_obs_noise", step=j).standard_normal(model.dim)
        obs[j - 1] = mask * (states[j] + gamma * xi)
    return TruthRun(
        kind=model.kind, h=h, gamma=gamma, operator=operator,
        states=states, observations=obs, grid=model.grid,
    )


def perturb_observation(
    y: np.ndarray,
    gamma: float,
    mask: np.ndarray,
    stream: RngStream,
    member: int,
    step: int,
) -> np.ndarray:
    """The member's private data draw y + gamma * (masked white noise)."""
    xi = stream.substream("member_obs_noise", member=member, step=step).standard_normal(y.size)
    return y + gamma * mask * xi
