"""Common model interface, attractor sampling, and growth-rate estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..spectral import SpectralGrid
from ..state import StateVector


class Model:
    """Base class for the forward models.

    Subclasses provide ``kind``, ``dim``, optionally ``grid`` and
    ``dt_internal``, and implement :meth:`rhs_block` and :meth:`step_block`
    on stacked states of shape (batch, dim).  The single-state methods wrap
    those.  When ``dt_internal`` is set, step lengths must be integer
    multiples of it so that refinement studies share substep boundaries.
    """

    kind: str = ""
    dim: int = 0
    grid: SpectralGrid | None = None
    dt_internal: float | None = None

    # -------------------------------------------------------------- wrappers

    def state(self, data: np.ndarray) -> StateVector:
        return StateVector(self.kind, np.asarray(data, dtype=np.float64), self.grid)

    def zero_state(self) -> StateVector:
        return self.state(np.zeros(self.dim))

    def rhs(self, state: StateVector) -> StateVector:
        self._check_state(state)
        return state.like(self.rhs_block(state.data[None, :])[0])

    def step(self, state: StateVector, h: float) -> StateVector:
        self._check_state(state)
        return state.like(self.step_block(state.data[None, :], h)[0])

    def bilinear(self, u: StateVector, v: StateVector) -> StateVector:
        self._check_state(u)
        self._check_state(v)
        return u.like(self.bilinear_block(u.data[None, :], v.data[None, :])[0])

    def _check_state(self, state: StateVector) -> None:
        if state.kind != self.kind:
            raise ValueError(f"{self.kind} model got a {state.kind} state")
        if state.dim != self.dim:
            raise ValueError(f"state dimension {state.dim} != model dimension {self.dim}")

    def _substeps(self, h: float) -> tuple[int, float]:
        """Number and length of internal substeps covering a step of h."""
        if h <= 0:
            raise ValueError("step length must be positive")
        if self.dt_internal is None:
            return 1, h
        ratio = h / self.dt_internal
        n_sub = int(round(ratio))
        if n_sub < 1 or abs(ratio - n_sub) > 1e-9 * max(1.0, ratio):
            raise ValueError(
                f"step {h} is not an integer multiple of dt_internal={self.dt_internal}"
            )
        return n_sub, self.dt_internal

    # ----------------------------------------------------- to be implemented

    def rhs_block(self, states: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def step_block(self, states: np.ndarray, h: float) -> np.ndarray:
        raise NotImplementedError

    def bilinear_block(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} has no symmetric bilinear split")


def rk4_step(rhs, states: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of the autonomous system du/dt = rhs(u)."""
    k1 = rhs(states)
    k2 = rhs(states + 0.5 * h * k1)
    k3 = rhs(states + 0.5 * h * k2)
    k4 = rhs(states + h * k3)
    return states + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class AttractorSample:
    """States collected from a long run, plus the norm bound seen on the way.

    ``norm_bound`` is 1.5x the largest norm observed over the whole run
    (spin-up included); all recorded states satisfy it by construction.
    """

    kind: str
    states: np.ndarray
    spin_up: float
    stride: float
    norm_bound: float
    grid: SpectralGrid | None = field(default=None, repr=False)

    def __post_init__(self):
        norms = np.linalg.norm(self.states, axis=1)
        if np.any(norms > self.norm_bound):
            raise ValueError("attractor sample violates its own norm bound")

    @property
    def n_samples(self) -> int:
        return self.states.shape[0]

    def state(self, i: int) -> StateVector:
        return StateVector(self.kind, self.states[i].copy(), self.grid)


def sample_attractor(
    model: Model,
    u0: StateVector,
    n_samples: int,
    spin_up: float,
    stride: float,
    dt: float,
) -> AttractorSample:
    """Integrate through a transient, then record states every ``stride``.

    Args:
        model: forward model.
        u0: starting state.
        n_samples: number of recorded states.
        spin_up: time discarded before recording starts.
        stride: time between recorded states.
        dt: integration step used throughout (must divide spin_up and stride).

    Returns:
        AttractorSample with ``norm_bound`` = 1.5x the max norm seen.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    for name, span in (("spin_up", spin_up), ("stride", stride)):
        if span < 0 or (span > 0 and abs(span / dt - round(span / dt)) > 1e-9):
            raise ValueError(f"{name} must be a non-negative multiple of dt")

    x = u0.data[None, :].copy()
    max_norm = float(np.linalg.norm(x))

    def advance(span: float) -> None:
        nonlocal x, max_norm
        for _ in range(int(round(span / dt))):
            x = model.step_block(x, dt)
            max_norm = max(max_norm, float(np.linalg.norm(x)))

    advance(spin_up)
    states = np.empty((n_samples, model.dim))
    states[0] = x[0]
    for i in range(1, n_samples):
        advance(stride)
        states[i] = x[0]
    return AttractorSample(
        kind=model.kind,
        states=states,
        spin_up=spin_up,
        stride=stride,
        norm_bound=1.5 * max_norm,
        grid=model.grid,
    )


def estimate_growth_rate(
    model: Model,
    base_states: np.ndarray | AttractorSample,
    h: float,
    rng: np.random.Generator,
    n_directions: int = 8,
    perturbation_size: float = 1e-6,
) -> float:
    """Largest one-step expansion rate observed around the given base states.

    For each base state v0 and random unit direction delta, the rate is
    (1/h) * log(|Psi_h(v0 + eps delta) - Psi_h(v0)| / eps).  The estimate is
    the maximum over all probes; it approaches the local log-Lipschitz
    constant of Psi_h as eps -> 0.
    """
    if isinstance(base_states, AttractorSample):
        base_states = base_states.states
    base_states = np.atleast_2d(np.asarray(base_states, dtype=np.float64))
    if perturbation_size <= 0:
        raise ValueError("perturbation size must be positive")

    n_base, dim = base_states.shape
    rates = []
    stepped_base = model.step_block(base_states, h)
    for j in range(n_directions):
        delta = rng.standard_normal((n_base, dim))
        delta /= np.linalg.norm(delta, axis=1, keepdims=True)
        stepped = model.step_block(base_states + perturbation_size * delta, h)
        growth = np.linalg.norm(stepped - stepped_base, axis=1) / perturbation_size
        rates.append(np.log(growth) / h)
    return float(np.max(rates))
