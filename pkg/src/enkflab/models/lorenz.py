"""Lorenz '63 and '96 models, plus an exactly solvable linear test model.

Both Lorenz systems fit the dissipative quadratic form du/dt + A u + B(u, u) = f
with an energy-conserving symmetric bilinear term, <B(u, u), u> = 0.  The
bilinear methods expose that term; time stepping is classical RK4.
"""

from __future__ import annotations

import numpy as np

from .base import Model, rk4_step


class Lorenz63(Model):
    """The three-variable Lorenz system with the classical parameters.

    The default inner step keeps single `step` calls at the usual
    observation spacings accurate to well below 1e-8; pass
    dt_internal=None to step exactly at the requested length, e.g. for
    refinement studies that compose the flow on their own grid.
    """

    kind = "lorenz63"
    dim = 3

    def __init__(self, sigma: float = 10.0, rho: float = 28.0, beta: float = 8.0 / 3.0,
                 dt_internal: float | None = 0.001):
        self.sigma = float(sigma)
        self.rho = float(rho)
        self.beta = float(beta)
        self.dt_internal = dt_internal

    def rhs_block(self, states: np.ndarray) -> np.ndarray:
        x, y, z = states[:, 0], states[:, 1], states[:, 2]
        out = np.empty_like(states)
        out[:, 0] = self.sigma * (y - x)
        out[:, 1] = x * (self.rho - z) - y
        out[:, 2] = x * y - self.beta * z
        return out

    def bilinear_block(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        # quadratic part of -rhs, symmetrized: B(u, u) = (0, x z, -x y)
        out = np.zeros_like(u)
        out[:, 1] = 0.5 * (u[:, 0] * v[:, 2] + v[:, 0] * u[:, 2])
        out[:, 2] = -0.5 * (u[:, 0] * v[:, 1] + v[:, 0] * u[:, 1])
        return out

    def step_block(self, states: np.ndarray, h: float) -> np.ndarray:
        n_sub, dt = self._substeps(h)
        x = states
        for _ in range(n_sub):
            x = rk4_step(self.rhs_block, x, dt)
        return x


class Lorenz96(Model):
    """The cyclic Lorenz '96 chain with constant forcing."""

    kind = "lorenz96"

    def __init__(self, n: int = 40, forcing: float = 8.0, dt_internal: float | None = 0.001):
        if n < 4:
            raise ValueError("Lorenz 96 needs at least 4 sites")
        self.dim = int(n)
        self.forcing = float(forcing)
        self.dt_internal = dt_internal

    def rhs_block(self, states: np.ndarray) -> np.ndarray:
        xp1 = np.roll(states, -1, axis=1)
        xm1 = np.roll(states, 1, axis=1)
        xm2 = np.roll(states, 2, axis=1)
        return (xp1 - xm2) * xm1 - states + self.forcing

    def bilinear_block(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        def quad(a, b):
            return (np.roll(a, -1, axis=1) - np.roll(a, 2, axis=1)) * np.roll(b, 1, axis=1)

        return -0.5 * (quad(u, v) + quad(v, u))

    def step_block(self, states: np.ndarray, h: float) -> np.ndarray:
        n_sub, dt = self._substeps(h)
        x = states
        for _ in range(n_sub):
            x = rk4_step(self.rhs_block, x, dt)
        return x


class LinearModel(Model):
    """du/dt = rate * u with the exact flow Psi_h = exp(rate * h).

    A test hook: rate 0 gives the identity map, rate -1 / +1 give known
    contraction / expansion rates for the growth-rate estimator.
    """

    kind = "linear"

    def __init__(self, rate: float = 0.0, dim: int = 1, dt_internal: float | None = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.rate = float(rate)
        self.dim = int(dim)
        self.dt_internal = dt_internal

    def rhs_block(self, states: np.ndarray) -> np.ndarray:
        return self.rate * states

    def step_block(self, states: np.ndarray, h: float) -> np.ndarray:
        n_sub, dt = self._substeps(h)
        return states * np.exp(self.rate * dt * n_sub)
