"""Ensembles of states and their empirical statistics.

The empirical covariance uses the 1/K convention,

    C = (1/K) sum_k (v_k - vbar) (x) (v_k - vbar),

so with deviations d_k = (v_k - vbar) / sqrt(K) the covariance factors as
C = D^T D, D the (K, dim) deviation matrix.  C is never materialized; it
acts through :meth:`Ensemble.cov_apply`.
"""

from __future__ import annotations

import numpy as np

from .spectral import SpectralGrid
from .state import KindMismatchError, StateVector


class Ensemble:
    """An immutable collection of K equal-kind states.

    The mean and deviations are computed once on construction; any update
    that changes members must build a new ensemble, which keeps the cached
    statistics consistent by construction.
    """

    def __init__(self, kind: str, members: np.ndarray, grid: SpectralGrid | None = None):
        members = np.asarray(members, dtype=np.float64)
        if members.ndim != 2:
            raise ValueError("members must form a (K, dim) array")
        if members.shape[0] == 0:
            raise ValueError("ensemble needs at least one member")
        if kind == "nse2d":
            if grid is None:
                raise ValueError("nse2d ensembles need a SpectralGrid")
            if members.shape[1] != grid.dim:
                raise ValueError(
                    f"members have {members.shape[1]} slots, grid expects {grid.dim}"
                )
        self.kind = kind
        self.grid = grid
        self.members = members
        self.k_members = members.shape[0]
        self.dim = members.shape[1]
        self.mean = members.mean(axis=0)
        self.deviations = (members - self.mean) / np.sqrt(self.k_members)

    @classmethod
    def from_states(cls, states: list[StateVector]) -> "Ensemble":
        if not states:
            raise ValueError("ensemble needs at least one member")
        first = states[0]
        for s in states[1:]:
            first.require_compatible(s)
        data = np.stack([s.data for s in states])
        return cls(first.kind, data, first.grid)

    def state(self, k: int) -> StateVector:
        return StateVector(self.kind, self.members[k].copy(), self.grid)

    def mean_state(self) -> StateVector:
        return StateVector(self.kind, self.mean.copy(), self.grid)

    def with_members(self, members: np.ndarray) -> "Ensemble":
        if members.shape != self.members.shape:
            raise ValueError("replacement members must keep the ensemble shape")
        return Ensemble(self.kind, members, self.grid)

    def translate(self, shift: np.ndarray) -> "Ensemble":
        return self.with_members(self.members + np.asarray(shift, dtype=np.float64))

    # ------------------------------------------------------------ statistics

    def cov_apply(self, w: np.ndarray) -> np.ndarray:
        """Apply the empirical covariance, C w = D^T (D w).

        Accepts a vector (dim,) or a stack (..., dim); never builds C.
        """
        w = np.asarray(w, dtype=np.float64)
        if w.shape[-1] != self.dim:
            raise ValueError(f"operand has {w.shape[-1]} slots, ensemble has {self.dim}")
        return (w @ self.deviations.T) @ self.deviations

    def spread(self) -> float:
        """Root mean square member distance from the mean, sqrt(tr C)."""
        return float(np.sqrt(np.sum(self.deviations**2)))

    def mean_member_mse(self, reference: np.ndarray) -> float:
        """Mean over members of the squared distance to ``reference``."""
        diff = self.members - np.asarray(reference, dtype=np.float64)
        return float(np.mean(np.sum(diff**2, axis=1)))

    def _require_same_family(self, other: "Ensemble") -> None:
        if self.kind != other.kind or (self.kind == "nse2d" and self.grid is not other.grid):
            raise KindMismatchError("ensembles belong to different model families")


def ensemble_mean(ens: Ensemble) -> StateVector:
    """Empirical mean of the ensemble as a state."""
    return ens.mean_state()


def covariance_apply(ens: Ensemble, w: StateVector | np.ndarray) -> StateVector | np.ndarray:
    """Apply the empirical covariance of ``ens`` to a state or raw vector."""
    if isinstance(w, StateVector):
        if w.kind != ens.kind or (ens.kind == "nse2d" and w.grid is not ens.grid):
            raise KindMismatchError("state and ensemble belong to different model families")
        return w.like(ens.cov_apply(w.data))
    return ens.cov_apply(w)
