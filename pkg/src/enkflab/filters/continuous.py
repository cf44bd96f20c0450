"""Continuous-time limit of the perturbed-observation filter.

As the window h shrinks with observation covariance h^-1 gamma0^2 I, the
member trajectories converge to the coupled SDE system

    dv_k = F(v_k) dt - (1/g2)(a I + C) P (v_k - u) dt
                     + (1/g)(a I + C) P (dW_k + dB),

with g = gamma0, a = alpha^2, P the observation projection, C the ensemble
covariance, B a Brownian motion shared by all members and W_k independent
per member.  Integration is split-step: one model step for every member,
then one Euler-Maruyama step of the nudge-plus-noise part with C frozen.
Since P is a 0/1 projection it equals its own square root, and (a I + C)
is applied directly to masked white noise, so no operator square root is
ever formed.  The noise enters through C itself: with a = 0 the update
stays inside the deviation span.

``convergence_experiment`` couples a discrete filter at several window
lengths to one fine-step integration of the SDE through shared Brownian
increments and reports the terminal mean-square discrepancy per window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ensemble import Ensemble
from ..observation import ObservationOperator
from ..rng import RngStream
from ..series import ErrorSeries
from ..state import StateVector
from .discrete import FilterRun, _check_finite, analysis_update


@dataclass(frozen=True)
class ContinuousConfig:
    """Scalars of the split-step integration.

    ``inflation_in_noise`` keeps the a I term in the noise operator (the
    form the h -> 0 limit produces); switching it off confines inflation
    to the drift.
    """

    dt: float
    gamma: float
    alpha_sq: float = 0.0
    operator: ObservationOperator = ObservationOperator("full")
    t_final: float = 1.0
    inflation_in_noise: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("inner step must be positive")
        if self.gamma <= 0:
            raise ValueError("observation noise std must be positive")
        if self.alpha_sq < 0:
            raise ValueError("inflation must be non-negative")
        if self.t_final <= 0:
            raise ValueError("horizon must be positive")

    @property
    def n_steps(self) -> int:
        ratio = self.t_final / self.dt
        n = int(round(ratio))
        if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"horizon {self.t_final} is not a multiple of dt={self.dt}")
        return n


def nudge_noise_substep(
    ens: Ensemble,
    u_true: StateVector | np.ndarray,
    cfg: ContinuousConfig,
    step_index: int,
    stream: RngStream,
    mask: np.ndarray | None = None,
) -> Ensemble:
    """One Euler-Maruyama step of the nudge-plus-noise part.

    The covariance is frozen at the incoming ensemble.  The shared noise
    comes from the (step-keyed) shared substream, member noises from
    member-keyed substreams, so the result is independent of member order.
    """
    u = u_true.data if isinstance(u_true, StateVector) else np.asarray(u_true)
    if u.shape != (ens.dim,):
        raise ValueError("truth state does not match the ensemble layout")
    if mask is None:
        # the mask needs only dim and grid, which the ensemble carries
        mask = cfg.operator.mask_for(ens)
    if not np.any(mask > 0):
        return ens

    d = ens.deviations
    g2 = cfg.gamma**2

    innov = (ens.members - u) * mask
    drift = -(cfg.alpha_sq * innov + (innov @ d.T) @ d) * (cfg.dt / g2)

    xi_b = stream.substream("cts_shared_noise", step=step_index).standard_normal(ens.dim)
    xi = np.stack([
        stream.substream("cts_member_noise", member=k, step=step_index).standard_normal(ens.dim)
        for k in range(ens.k_members)
    ])
    w_in = (xi + xi_b) * mask * (np.sqrt(cfg.dt) / cfg.gamma)
    a_noise = cfg.alpha_sq if cfg.inflation_in_noise else 0.0
    noise = a_noise * w_in + (w_in @ d.T) @ d

    return ens.with_members(ens.members + drift + noise)


def run_continuous_filter(
    model,
    u0: StateVector,
    cfg: ContinuousConfig,
    ens0: Ensemble,
    stream: RngStream,
    tracked_modes: list[tuple[int, int]] | None = None,
    track_members: int = 0,
    record_every: int = 1,
) -> FilterRun:
    """Integrate truth and ensemble side by side over [0, t_final].

    The truth follows the unforced-by-data model flow at the same dt.  One
    row is recorded at step 0 and then every ``record_every`` substeps
    (plus the final one); the substep column holds the integration step
    index, ``step`` counts recorded rows.
    """
    model._check_state(u0)
    if ens0.kind != model.kind or ens0.dim != model.dim:
        raise ValueError("initial ensemble does not match the model")
    if record_every < 1:
        raise ValueError("record stride must be at least 1")

    mask = cfg.operator.mask_for(model)
    n_steps = cfg.n_steps
    series = ErrorSeries(tracked_modes or [], track_members, with_substep=True)

    ens = ens0
    u = u0.data[None, :].copy()
    series.record(0, 0.0, ens, u[0], substep=0)
    rows = 1
    for j in range(1, n_steps + 1):
        ens = ens.with_members(model.step_block(ens.members, cfg.dt))
        u = model.step_block(u, cfg.dt)
        ens = nudge_noise_substep(ens, u[0], cfg, j, stream, mask)
        _check_finite(ens.members, f"substep {j}")
        if j % record_every == 0 or j == n_steps:
            series.record(rows, j * cfg.dt, ens, u[0], substep=j)
            rows += 1
    return FilterRun(
        series=series,
        final_ensemble=ens,
        config=cfg,
        h=cfg.dt,
        seed=stream.master_seed,
    )


def convergence_experiment(
    model,
    h_list: list[float],
    gamma0: float,
    t_final: float,
    n_mc: int,
    stream: RngStream,
    k_members: int = 5,
    spread: float = 1.0,
    alpha_sq: float = 0.0,
    u0: StateVector | None = None,
) -> list[tuple[float, float, float]]:
    """Couple windowed filters to one fine SDE run and measure the gap.

    Every replica draws one Brownian pair (B shared, W_k per member) on the
    fine grid dt_ref = min(h)/2 and one initial ensemble.  The reference
    integrates the limit SDE at dt_ref.  For each window h the discrete
    filter advances members by the flow over the window (composed from the
    same dt_ref substeps, so both sides share the time grid) and then
    assimilates the coupled perturbed observation

        y_k = u(t) + gamma0 (dB_win + dW_k_win) / h

    with observation std gamma0 / sqrt(h), which is the windowed filter the
    limit is taken over.  Everything is fully observed.

    Returns:
        One (h, mean-square terminal discrepancy, standard error) triple
        per window length, in the given order.
    """
    if not h_list:
        raise ValueError("need at least one window length")
    if any(h <= 0 for h in h_list):
        raise ValueError("window lengths must be positive")
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    if n_mc < 1:
        raise ValueError("need at least one replica")

    dt_ref = min(h_list) / 2.0
    n_ref = int(round(t_final / dt_ref))
    if abs(t_final / dt_ref - n_ref) > 1e-9 or n_ref < 1:
        raise ValueError("horizon must be a multiple of the fine step")
    ratios = []
    for h in h_list:
        r = int(round(h / dt_ref))
        if abs(h / dt_ref - r) > 1e-9 or r < 1:
            raise ValueError(f"window {h} does not sit on the fine grid {dt_ref}")
        if int(round(t_final / h)) * r != n_ref:
            raise ValueError(f"horizon {t_final} is not a multiple of window {h}")
        ratios.append(r)

    if u0 is None:
        # park the starting truth on the attractor; spin on the refinement
        # grid so any model inner step compatible with dt_ref works
        x = np.ones((1, model.dim))
        for _ in range(int(round(10.0 / dt_ref))):
            x = model.step_block(x, dt_ref)
        u_start = x[0]
    else:
        model._check_state(u0)
        u_start = u0.data
    mask = np.ones(model.dim)
    g2 = gamma0**2

    sq_gaps = np.empty((n_mc, len(h_list)))
    for i in range(n_mc):
        rep = RngStream(stream.child_seed("replica", i))
        members0 = u_start + spread * rep.substream("init_members").standard_normal(
            (k_members, model.dim)
        )
        db = np.sqrt(dt_ref) * rep.substream("conv_B").standard_normal((n_ref, model.dim))
        dw = np.sqrt(dt_ref) * rep.substream("conv_W").standard_normal(
            (n_ref, k_members, model.dim)
        )

        # fine reference: truth flow plus Euler-Maruyama nudge every dt_ref
        u_path = np.empty((n_ref + 1, model.dim))
        u_path[0] = u_start
        v = members0.copy()
        for j in range(n_ref):
            v = model.step_block(v, dt_ref)
            u_path[j + 1] = model.step_block(u_path[None, j], dt_ref)[0]
            dev = (v - v.mean(axis=0)) / np.sqrt(k_members)
            innov = v - u_path[j + 1]
            incr = (dw[j] + db[j]) / gamma0 - innov * (dt_ref / g2)
            v += alpha_sq * incr + (incr @ dev.T) @ dev
        v_ref = v

        for col, (h, r) in enumerate(zip(h_list, ratios)):
            gamma_h = gamma0 / np.sqrt(h)
            v = members0.copy()
            for w in range(int(round(t_final / h))):
                for j in range(w * r, (w + 1) * r):
                    v = model.step_block(v, dt_ref)
                end = (w + 1) * r
                y_members = u_path[end] + gamma0 * (
                    db[w * r : end].sum(axis=0) + dw[w * r : end].sum(axis=0)
                ) / h
                dev = (v - v.mean(axis=0)) / np.sqrt(k_members)
                v = analysis_update(v, dev, y_members, mask, gamma_h, alpha_sq)
            sq_gaps[i, col] = float(np.mean(np.sum((v - v_ref) ** 2, axis=1)))

    means = sq_gaps.mean(axis=0)
    errs = sq_gaps.std(axis=0, ddof=1) / np.sqrt(n_mc) if n_mc > 1 else np.zeros(len(h_list))
    return [(h, float(m), float(e)) for h, m, e in zip(h_list, means, errs)]
