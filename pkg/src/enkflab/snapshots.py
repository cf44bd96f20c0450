"""Plain-text snapshot files for states and truth runs.

The format is a commented key=value header followed by one or more CSV
blocks.  Each CSV row describes one coefficient across all stored states:
the first two columns identify it (wavevector m1, m2 for spectral states;
component index and 0 otherwise), then one (Re, Im) pair per state.  For
non-spectral states the imaginary column is 0.
"""

from __future__ import annotations

import numpy as np

from .models.base import AttractorSample
from .observation import ObservationOperator, TruthRun


def _format(x: float) -> str:
    return repr(float(x))


def _coeff_table(kind: str, grid, states: np.ndarray) -> list[list[str]]:
    """Rows of (id1, id2, re/im pairs) for a (n_states, dim) stack."""
    rows = []
    if grid is not None:
        coeffs = grid.coeffs(states)  # (n_states, n_modes)
        for i in range(grid.n_modes):
            row = [str(int(grid.m1[i])), str(int(grid.m2[i]))]
            for s in range(states.shape[0]):
                c = coeffs[s, i]
                row += [_format(c.real), _format(c.imag)]
            rows.append(row)
    else:
        for i in range(states.shape[1]):
            row = [str(i), "0"]
            for s in range(states.shape[0]):
                row += [_format(states[s, i]), _format(0.0)]
            rows.append(row)
    return rows


def _parse_coeff_table(kind: str, grid, rows: list[list[str]]) -> np.ndarray:
    if not rows:
        raise ValueError("snapshot block holds no coefficients")
    n_states = (len(rows[0]) - 2) // 2
    if grid is not None:
        if len(rows) != grid.n_modes:
            raise ValueError(
                f"snapshot has {len(rows)} modes, grid expects {grid.n_modes}"
            )
        coeffs = np.empty((n_states, grid.n_modes), dtype=np.complex128)
        for row in rows:
            m1, m2 = int(row[0]), int(row[1])
            i = grid.mode_index(m1, m2)
            vals = np.asarray(row[2:], dtype=np.float64)
            coeffs[:, i] = vals[0::2] + 1j * vals[1::2]
        return grid.encode(coeffs)
    dim = len(rows)
    states = np.empty((n_states, dim))
    for row in rows:
        i = int(row[0])
        vals = np.asarray(row[2:], dtype=np.float64)
        states[:, i] = vals[0::2]
    return states


def _write_blocks(path, header: dict, blocks: dict[str, list[list[str]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in header.items():
            f.write(f"# {key} = {value}\n")
        for name, rows in blocks.items():
            f.write(f"[{name}]\n")
            for row in rows:
                f.write(",".join(row) + "\n")


def _read_blocks(path) -> tuple[dict, dict[str, list[list[str]]]]:
    header: dict[str, str] = {}
    blocks: dict[str, list[list[str]]] = {}
    current: list[list[str]] | None = None
    with open(path, "r", encoding="utf-8") as f:
        for raw in f:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    header[key.strip()] = value.strip()
                continue
            if line.startswith("[") and line.endswith("]"):
                current = blocks.setdefault(line[1:-1], [])
                continue
            if current is None:
                raise ValueError(f"{path}: data before any block marker")
            current.append(line.split(","))
    return header, blocks


# ------------------------------------------------------------- public API


def save_attractor_sample(path, sample: AttractorSample) -> None:
    header = {
        "file": "state-snapshot",
        "kind": sample.kind,
        "n_states": str(sample.n_samples),
        "spin_up": _format(sample.spin_up),
        "stride": _format(sample.stride),
        "norm_bound": _format(sample.norm_bound),
    }
    _write_blocks(path, header, {"states": _coeff_table(sample.kind, sample.grid, sample.states)})


def load_attractor_sample(path, model) -> AttractorSample:
    header, blocks = _read_blocks(path)
    if header.get("file") != "state-snapshot":
        raise ValueError(f"{path} is not a state snapshot")
    if header["kind"] != model.kind:
        raise ValueError(f"snapshot kind {header['kind']} does not match model {model.kind}")
    states = _parse_coeff_table(model.kind, model.grid, blocks.get("states", []))
    return AttractorSample(
        kind=model.kind,
        states=states,
        spin_up=float(header["spin_up"]),
        stride=float(header["stride"]),
        norm_bound=float(header["norm_bound"]),
        grid=model.grid,
    )


def save_truth_run(path, truth: TruthRun) -> None:
    op = truth.operator
    header = {
        "file": "truth-run",
        "kind": truth.kind,
        "h": _format(truth.h),
        "gamma": _format(truth.gamma),
        "n_obs": str(truth.n_obs),
        "op_kind": op.kind,
        "op_radius": "" if op.ring_radius is None else _format(op.ring_radius),
        "op_strict": str(op.strict).lower(),
    }
    blocks = {
        "states": _coeff_table(truth.kind, truth.grid, truth.states),
        "observations": _coeff_table(truth.kind, truth.grid, truth.observations),
    }
    _write_blocks(path, header, blocks)


def load_truth_run(path, model) -> TruthRun:
    header, blocks = _read_blocks(path)
    if header.get("file") != "truth-run":
        raise ValueError(f"{path} is not a truth-run file")
    if header["kind"] != model.kind:
        raise ValueError(f"truth kind {header['kind']} does not match model {model.kind}")
    radius = header.get("op_radius", "")
    operator = ObservationOperator(
        kind=header["op_kind"],
        ring_radius=float(radius) if radius else None,
        strict=header.get("op_strict", "true") == "true",
    )
    states = _parse_coeff_table(model.kind, model.grid, blocks.get("states", []))
    obs = _parse_coeff_table(model.kind, model.grid, blocks.get("observations", []))
    return TruthRun(
        kind=model.kind,
        h=float(header["h"]),
        gamma=float(header["gamma"]),
        operator=operator,
        states=states,
        observations=obs,
        grid=model.grid,
    )
