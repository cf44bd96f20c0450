"""State vectors for the supported model families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralGrid

MODEL_KINDS = ("lorenz63", "lorenz96", "nse2d", "linear")


class KindMismatchError(ValueError):
    """Raised when states of different model kinds (or grids) are combined."""


@dataclass
class StateVector:
    """A single model state.

    ``data`` is always a flat float64 array.  For spectral states the layout
    is the real coefficient view described in :mod:`enkflab.spectral`; the
    ``grid`` attribute carries the wavevector table needed to interpret it.
    The Euclidean norm of ``data`` is the model's natural L2 norm in every
    case.
    """

    kind: str
    data: np.ndarray
    grid: SpectralGrid | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 1:
            raise ValueError("state data must be one-dimensional")
        if self.kind == "nse2d":
            if self.grid is None:
                raise ValueError("nse2d states need a SpectralGrid")
            if self.data.size != self.grid.dim:
                raise ValueError(
                    f"state has {self.data.size} slots, grid expects {self.grid.dim}"
                )

    @property
    def dim(self) -> int:
        return self.data.size

    def require_compatible(self, other: "StateVector") -> None:
        if self.kind != other.kind:
            raise KindMismatchError(f"mixed model kinds: {self.kind!r} vs {other.kind!r}")
        if self.grid is not other.grid and self.kind == "nse2d":
            raise KindMismatchError("nse2d states live on different grids")
        if self.dim != other.dim:
            raise KindMismatchError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def copy(self) -> "StateVector":
        return StateVector(self.kind, self.data.copy(), self.grid)

    def like(self, data: np.ndarray) -> "StateVector":
        """A state of the same kind/grid holding ``data``."""
        return StateVector(self.kind, np.asarray(data, dtype=np.float64), self.grid)

    # ------------------------------------------------------------- algebra

    def __add__(self, other: "StateVector") -> "StateVector":
        self.require_compatible(other)
        return self.like(self.data + other.data)

    def __sub__(self, other: "StateVector") -> "StateVector":
        self.require_compatible(other)
        return self.like(self.data - other.data)

    def __mul__(self, scalar: float) -> "StateVector":
        return self.like(self.data * float(scalar))

    __rmul__ = __mul__

    def dot(self, other: "StateVector") -> float:
        """Inner product of the underlying fields (real Hilbert space)."""
        self.require_compatible(other)
        return float(self.data @ other.data)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    # ------------------------------------------------------- spectral views

    def coeffs(self) -> np.ndarray:
        """Complex stored-mode coefficients (nse2d states only)."""
        if self.grid is None:
            raise ValueError(f"{self.kind} states have no spectral coefficients")
        return self.grid.coeffs(self.data)

    def mode(self, m1: int, m2: int) -> complex:
        """Coefficient u_m of the stored wavevector (m1, m2)."""
        return complex(self.coeffs()[self.grid.mode_index(m1, m2)])
