"""Per-step error and trajectory records produced by filter runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble


@dataclass
class ErrorSeries:
    """Columnar record of a filter run.

    Fixed columns come first (step, time, optional substep, the error
    statistics), then one block per tracked mode: truth Re/Im followed by
    Re/Im of each tracked member.  Tracked modes are wavevectors for
    spectral states and (component, 0) pairs otherwise.
    """

    tracked_modes: list[tuple[int, int]]
    track_members: int
    with_substep: bool = False
    rows: list[list[float]] = field(default_factory=list)

    def column_names(self) -> list[str]:
        names = ["step", "time"]
        if self.with_substep:
            names.append("substep")
        names += ["rel_err_mean", "rel_err_member1", "mean_member_mse", "spread"]
        for m1, m2 in self.tracked_modes:
            tag = f"{m1}_{m2}"
            names += [f"u{tag}_re", f"u{tag}_im"]
            for k in range(1, self.track_members + 1):
                names += [f"v{k}_{tag}_re", f"v{k}_{tag}_im"]
        return names

    def _tracked_values(self, data: np.ndarray, grid) -> list[tuple[float, float]]:
        out = []
        if grid is not None:
            coeffs = grid.coeffs(data)
            for m1, m2 in self.tracked_modes:
                c = coeffs[grid.mode_index(m1, m2)]
                out.append((float(c.real), float(c.imag)))
        else:
            for m1, _ in self.tracked_modes:
                out.append((float(data[m1]), 0.0))
        return out

    def record(
        self,
        step: int,
        time: float,
        ens: Ensemble,
        truth: np.ndarray,
        substep: int | None = None,
    ) -> None:
        truth_norm = float(np.linalg.norm(truth))
        if truth_norm == 0.0:
            raise ValueError("relative error undefined: zero truth norm")
        row: list[float] = [float(step), float(time)]
        if self.with_substep:
            row.append(float(0 if substep is None else substep))
        row.append(float(np.linalg.norm(ens.mean - truth)) / truth_norm)
        row.append(float(np.linalg.norm(ens.members[0] - truth)) / truth_norm)
        row.append(ens.mean_member_mse(truth))
        row.append(ens.spread())
        truth_vals = self._tracked_values(truth, ens.grid)
        member_vals = [
            self._tracked_values(ens.members[k], ens.grid)
            for k in range(min(self.track_members, ens.k_members))
        ]
        for i in range(len(self.tracked_modes)):
            row += list(truth_vals[i])
            for vals in member_vals:
                row += list(vals[i])
            for _ in range(self.track_members - len(member_vals)):
                row += [0.0, 0.0]
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        names = self.column_names()
        if name not in names:
            raise KeyError(f"no column {name!r}")
        idx = names.index(name)
        return np.asarray([r[idx] for r in self.rows])

    @property
    def n_rows(self) -> int:
        return len(self.rows)
