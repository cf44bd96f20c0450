"""Coefficient tables for the fourth-order exponential time differencing
Runge-Kutta scheme (Cox & Matthews), for a diagonal linear operator.

The phi-function combinations entering the scheme suffer catastrophic
cancellation when evaluated naively at small |z|, so below a threshold they
switch to truncated Taylor series; 18 terms keep the switch region accurate
to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SERIES_RADIUS = 0.5
_SERIES_TERMS = 18


def _phi_series(k: int, z: np.ndarray) -> np.ndarray:
    """Truncated Taylor expansion of phi_k(z) = sum_n z^n / (n + k)!."""
    out = np.zeros_like(z)
    for n in range(_SERIES_TERMS - 1, -1, -1):
        out = out * z + 1.0 / math.factorial(n + k)
    return out


def phi(k: int, z: np.ndarray) -> np.ndarray:
    """phi_1, phi_2, or phi_3 evaluated stably on a real array."""
    if k not in (1, 2, 3):
        raise ValueError("only phi_1..phi_3 are provided")
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < _SERIES_RADIUS
    zs = np.where(small, 0.0, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        ez = np.exp(zs)
        if k == 1:
            direct = (ez - 1.0) / zs
        elif k == 2:
            direct = (ez - 1.0 - zs) / zs**2
        else:
            direct = (ez - 1.0 - zs - zs**2 / 2.0) / zs**3
    return np.where(small, _phi_series(k, z), direct)


@dataclass(frozen=True)
class Etdrk4Coefficients:
    """Per-mode update weights for a fixed step dt.

    With z = lin * dt and N the nonlinear part, one step reads

        a  = e2 * u + q * N(u)
        b  = e2 * u + q * N(a)
        c  = e2 * a + q * (2 N(b) - N(u))
        u+ = e1 * u + f1 * N(u) + 2 f2 * (N(a) + N(b)) + f3 * N(c)
    """

    dt: float
    e1: np.ndarray
    e2: np.ndarray
    q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


def etdrk4_coefficients(lin: np.ndarray, dt: float) -> Etdrk4Coefficients:
    """Build the coefficient table for linear eigenvalues ``lin`` and step dt."""
    if dt <= 0:
        raise ValueError("step length must be positive")
    z = np.asarray(lin, dtype=np.float64) * dt
    p1, p2, p3 = phi(1, z), phi(2, z), phi(3, z)
    return Etdrk4Coefficients(
        dt=float(dt),
        e1=np.exp(z),
        e2=np.exp(z / 2.0),
        q=0.5 * dt * phi(1, z / 2.0),
        f1=dt * (p1 - 3.0 * p2 + 4.0 * p3),
        f2=dt * (p2 - 2.0 * p3),
        f3=dt * (4.0 * p3 - p2),
    )
