"""Monte Carlo verification of the filter error bounds.

Three long-run statements about the member error e_j = v_j - u_j under full
observation are checked empirically:

  * without inflation, E|e_j|^2 grows at most like e^{2 beta h j} plus a
    geometric sum of observation-noise terms (well-posedness);
  * with inflation making theta = gamma^2/(gamma^2+alpha^2) e^{2 beta h} < 1,
    E|e_j|^2 contracts to a 2 K gamma^2 / (1-theta) neighbourhood of zero
    (accuracy);
  * the continuous-time filter error grows at most exponentially with a
    rate that is stable under time-step refinement.

beta is a log-Lipschitz constant of the flow that no experiment can fully
certify; the checks use the probe estimate from
:func:`~enkflab.models.estimate_growth_rate` and report a sensitivity sweep
over {1, 1.5, 2} times that estimate next to the headline pass/fail.
A report passes a step when the MC mean minus its confidence halfwidth
(two standard errors) sits below the envelope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble
from .filters.continuous import ContinuousConfig, run_continuous_filter
from .filters.discrete import AnalysisConfig, FilterDivergence, analyze, predict
from .models.base import Model, estimate_growth_rate, sample_attractor
from .observation import ObservationOperator
from .rng import RngStream
from .state import StateVector

_FULL = ObservationOperator("full")


def relative_error(m: StateVector, u: StateVector) -> float:
    """|m - u| / |u|, the error metric of all the experiment records."""
    m.require_compatible(u)
    u_norm = u.norm()
    if u_norm == 0.0:
        raise ValueError("relative error undefined: zero truth norm")
    return (m - u).norm() / u_norm


def theta(gamma: float, alpha_sq: float, beta_hat: float, h: float) -> float:
    """Contraction factor gamma^2/(gamma^2+alpha^2) e^{2 beta h}."""
    if gamma <= 0 or h <= 0:
        raise ValueError("gamma and h must be positive")
    if alpha_sq < 0:
        raise ValueError("inflation must be non-negative")
    return float(gamma**2 / (gamma**2 + alpha_sq) * np.exp(2.0 * beta_hat * h))


def alpha_sq_for_theta(gamma: float, beta_hat: float, h: float, theta_target: float) -> float:
    """Inflation achieving the requested contraction factor.

    Inverts the theta formula; raises if the target needs negative
    inflation (dynamics already contract enough).
    """
    if not 0 < theta_target:
        raise ValueError("target contraction factor must be positive")
    a = gamma**2 * (np.exp(2.0 * beta_hat * h) / theta_target - 1.0)
    if a < 0:
        raise ValueError(
            f"theta {theta_target} already holds with no inflation at beta_hat={beta_hat}"
        )
    return float(a)


def _geom_sum(x: float, j: np.ndarray) -> np.ndarray:
    """(e^{xj} - 1)/(e^x - 1), continued by its limit j at x = 0."""
    if abs(x) < 1e-12:
        return j.astype(float)
    return np.expm1(x * j) / np.expm1(x)


def envelope_disc(e0_sq: float, beta_hat: float, h: float, gamma: float,
                  k_members: int, steps: np.ndarray) -> np.ndarray:
    """Well-posedness envelope e^{2bhj} E|e0|^2 + 2Kg^2 (e^{2bhj}-1)/(e^{2bh}-1)."""
    x = 2.0 * beta_hat * h
    return np.exp(x * steps) * e0_sq + 2.0 * k_members * gamma**2 * _geom_sum(x, steps)


def envelope_varinf(e0_sq: float, theta_hat: float, gamma: float,
                    k_members: int, steps: np.ndarray) -> np.ndarray:
    """Accuracy envelope th^j E|e0|^2 + 2Kg^2 (1-th^j)/(1-th)."""
    if abs(theta_hat - 1.0) < 1e-12:
        tail = steps.astype(float)
    else:
        powers = theta_hat ** steps.astype(float)
        tail = (1.0 - powers) / (1.0 - theta_hat)
    return theta_hat ** steps.astype(float) * e0_sq + 2.0 * k_members * gamma**2 * tail


@dataclass
class BoundReport:
    """Outcome of one envelope check.

    ``observed`` is the MC mean of the squared member-1 error per checked
    step (or of the member-averaged error for the continuous check),
    ``halfwidth`` twice its standard error, ``envelope`` the theoretical
    curve at the headline beta estimate.  ``sweep`` holds
    (beta multiplier, pass) pairs, with None where the swept envelope is
    void (contraction factor at or above one).  Extra scalars (asymptote
    bounds, fitted rates, divergence counts) live in ``notes``.
    """

    theorem: str
    steps: np.ndarray
    observed: np.ndarray
    halfwidth: np.ndarray
    envelope: np.ndarray
    passed_steps: np.ndarray
    passed: bool
    params: dict[str, float]
    sweep: list[tuple[float, bool | None]] = field(default_factory=list)
    notes: dict[str, float] = field(default_factory=dict)

    def describe(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        worst = float(np.max((self.observed - self.halfwidth) / np.maximum(self.envelope, 1e-300)))
        return f"{self.theorem}: {verdict} ({self.passed_steps.sum()}/{self.passed_steps.size} steps, worst margin ratio {worst:.3g})"


def _default_start(model: Model, spin_up: float = 10.0) -> StateVector:
    """A state on (or near) the attractor to start truth runs from."""
    dt = model.dt_internal if model.dt_internal is not None else 0.01
    x = np.ones((1, model.dim))
    for _ in range(int(round(spin_up / dt))):
        x = model.step_block(x, dt)
    return model.state(x[0])


def _probe_beta(model: Model, h: float, stream: RngStream) -> float:
    """Growth-rate estimate over a fresh attractor sample."""
    dt = model.dt_internal if model.dt_internal is not None else 0.01
    sample = sample_attractor(
        model, _default_start(model), n_samples=16, spin_up=0.0, stride=50 * dt, dt=dt
    )
    return estimate_growth_rate(model, sample, h, stream.substream("growth_probe"))


def _member1_error_curves(
    model: Model,
    states: np.ndarray,
    h: float,
    config: AnalysisConfig,
    k_members: int,
    init_spread: float,
    n_mc: int,
    stream: RngStream,
) -> np.ndarray:
    """Per-replica curves of |v_j^(1) - u_j|^2 under full observation.

    The truth path is fixed; each replica redraws the initial ensemble,
    the observation noise and the member perturbations.
    """
    n_steps = states.shape[0] - 1
    u0 = states[0]
    curves = np.empty((n_mc, n_steps + 1))
    for i in range(n_mc):
        rep = RngStream(stream.child_seed("replica", i))
        members = u0 + init_spread * rep.substream("init_members").standard_normal(
            (k_members, model.dim)
        )
        ens = Ensemble(model.kind, members, model.grid)
        curves[i, 0] = float(np.sum((ens.members[0] - u0) ** 2))
        for j in range(1, n_steps + 1):
            ens = predict(ens, model, h)
            noise = rep.substream("truth_obs_noise", step=j).standard_normal(model.dim)
            y = states[j] + config.gamma * noise
            ens = analyze(ens, y, config, model, j, rep)
            curves[i, j] = float(np.sum((ens.members[0] - states[j]) ** 2))
    return curves


def check_theorem_disc(
    model: Model,
    h: float,
    gamma: float,
    k_members: int,
    n_steps: int,
    n_mc: int,
    stream: RngStream,
    init_spread: float = 1.0,
    beta_hat: float | None = None,
    u0: StateVector | None = None,
) -> BoundReport:
    """Well-posedness envelope check for the uninflated discrete filter.

    Full observation only: the bound has no statement under partial
    observation and the operator is therefore not a parameter.
    """
    if n_steps < 1 or n_mc < 2:
        raise ValueError("need at least one step and two replicas")
    if beta_hat is None:
        beta_hat = _probe_beta(model, h, stream)
    start = u0 if u0 is not None else _default_start(model)
    model._check_state(start)

    states = np.empty((n_steps + 1, model.dim))
    states[0] = start.data
    for j in range(1, n_steps + 1):
        states[j] = model.step_block(states[None, j - 1], h)[0]

    config = AnalysisConfig(gamma=gamma, alpha_sq=0.0, operator=_FULL)
    curves = _member1_error_curves(
        model, states, h, config, k_members, init_spread, n_mc, stream
    )
    observed = curves.mean(axis=0)
    halfwidth = 2.0 * curves.std(axis=0, ddof=1) / np.sqrt(n_mc)

    e0_sq = init_spread**2 * model.dim
    steps = np.arange(n_steps + 1)
    envelope = envelope_disc(e0_sq, beta_hat, h, gamma, k_members, steps)
    passed_steps = observed - halfwidth <= envelope
    sweep = []
    for mult in (1.0, 1.5, 2.0):
        env_m = envelope_disc(e0_sq, mult * beta_hat, h, gamma, k_members, steps)
        sweep.append((mult, bool(np.all(observed - halfwidth <= env_m))))

    return BoundReport(
        theorem="well-posedness envelope (discrete, no inflation)",
        steps=steps,
        observed=observed,
        halfwidth=halfwidth,
        envelope=envelope,
        passed_steps=passed_steps,
        passed=bool(np.all(passed_steps)),
        params={
            "h": h, "gamma": gamma, "k_members": float(k_members),
            "n_steps": float(n_steps), "n_mc": float(n_mc),
            "init_spread": init_spread, "beta_hat": float(beta_hat),
            "alpha_sq": 0.0, "e0_sq": e0_sq,
        },
        sweep=sweep,
    )


def check_theorem_varinf(
    model: Model,
    h: float,
    gamma: float,
    alpha_sq: float,
    k_members: int,
    n_steps: int,
    n_mc: int,
    stream: RngStream,
    init_spread: float = 1.0,
    beta_hat: float | None = None,
    u0: StateVector | None = None,
    tail_steps: int | None = None,
) -> BoundReport:
    """Accuracy envelope and asymptote check for the inflated filter.

    Requires theta_hat < 1; otherwise the bound says nothing and the
    caller should raise alpha_sq (see :func:`alpha_sq_for_theta`).
    The asymptote test compares the time-averaged MC error over the final
    ``tail_steps`` (default: the final third) against 2Kg^2/(1-theta).
    """
    if n_steps < 1 or n_mc < 2:
        raise ValueError("need at least one step and two replicas")
    if alpha_sq <= 0:
        raise ValueError("this check needs positive inflation")
    if beta_hat is None:
        beta_hat = _probe_beta(model, h, stream)
    theta_hat = theta(gamma, alpha_sq, beta_hat, h)
    if theta_hat >= 1.0:
        raise ValueError(
            f"theta_hat = {theta_hat:.4g} >= 1: no contraction; raise alpha_sq "
            f"(alpha_sq_for_theta gives the needed value)"
        )
    if tail_steps is None:
        tail_steps = max(1, n_steps // 3)
    if not 1 <= tail_steps <= n_steps:
        raise ValueError("tail window must fit inside the run")

    start = u0 if u0 is not None else _default_start(model)
    model._check_state(start)
    states = np.empty((n_steps + 1, model.dim))
    states[0] = start.data
    for j in range(1, n_steps + 1):
        states[j] = model.step_block(states[None, j - 1], h)[0]

    config = AnalysisConfig(gamma=gamma, alpha_sq=alpha_sq, operator=_FULL)
    curves = _member1_error_curves(
        model, states, h, config, k_members, init_spread, n_mc, stream
    )
    observed = curves.mean(axis=0)
    halfwidth = 2.0 * curves.std(axis=0, ddof=1) / np.sqrt(n_mc)

    e0_sq = init_spread**2 * model.dim
    steps = np.arange(n_steps + 1)
    envelope = envelope_varinf(e0_sq, theta_hat, gamma, k_members, steps)
    passed_steps = observed - halfwidth <= envelope

    # long-run level: per-replica tail averages give the MC error of the mean
    tails = curves[:, n_steps - tail_steps + 1:].mean(axis=1)
    tail_mean = float(tails.mean())
    tail_halfwidth = float(2.0 * tails.std(ddof=1) / np.sqrt(n_mc))
    asymptote = 2.0 * k_members * gamma**2 / (1.0 - theta_hat)
    passed_asym = tail_mean - tail_halfwidth <= asymptote

    sweep = []
    for mult in (1.0, 1.5, 2.0):
        th = theta(gamma, alpha_sq, mult * beta_hat, h)
        if th >= 1.0:
            sweep.append((mult, None))
            continue
        env_m = envelope_varinf(e0_sq, th, gamma, k_members, steps)
        asym_m = 2.0 * k_members * gamma**2 / (1.0 - th)
        ok = bool(np.all(observed - halfwidth <= env_m)) and (
            tail_mean - tail_halfwidth <= asym_m
        )
        sweep.append((mult, ok))

    return BoundReport(
        theorem="accuracy envelope (discrete, inflated)",
        steps=steps,
        observed=observed,
        halfwidth=halfwidth,
        envelope=envelope,
        passed_steps=passed_steps,
        passed=bool(np.all(passed_steps)) and bool(passed_asym),
        params={
            "h": h, "gamma": gamma, "alpha_sq": alpha_sq,
            "k_members": float(k_members), "n_steps": float(n_steps),
            "n_mc": float(n_mc), "init_spread": init_spread,
            "beta_hat": float(beta_hat), "theta_hat": float(theta_hat),
            "e0_sq": e0_sq,
        },
        sweep=sweep,
        notes={
            "asymptote": asymptote,
            "tail_mean": tail_mean,
            "tail_halfwidth": tail_halfwidth,
            "tail_steps": float(tail_steps),
        },
    )


def _fit_growth_rate(times: np.ndarray, curve: np.ndarray) -> float:
    """Smallest rho with curve(t) <= curve(0) e^{rho t} for all recorded t."""
    m0 = curve[0]
    t = times[1:]
    m = curve[1:]
    if m0 <= 0.0:
        return 0.0 if float(np.max(m, initial=0.0)) <= 1e-24 else float("inf")
    with np.errstate(divide="ignore"):
        rates = np.log(m / m0) / t
    return float(np.max(rates))


def check_theorem_cts(
    model: Model,
    dt_list: list[float],
    gamma: float,
    k_members: int,
    t_final: float,
    n_mc: int,
    stream: RngStream,
    init_spread: float = 1.0,
    alpha_sq: float = 0.0,
    u0: StateVector | None = None,
    rate_tolerance: float = 0.2,
) -> BoundReport:
    """Exponential-envelope check for the continuous-time filter.

    For each inner step the MC curve of the member-averaged squared error
    is fitted with the smallest exponential envelope through its initial
    value.  Passing requires every fitted rate to be finite, consecutive
    rates to agree within ``rate_tolerance``, and no replica to diverge.
    Full observation only, as for the discrete checks.
    """
    if len(dt_list) < 1:
        raise ValueError("need at least one inner step")
    if n_mc < 2:
        raise ValueError("need at least two replicas")
    start = u0 if u0 is not None else _default_start(model)
    model._check_state(start)

    curves_by_dt = []
    times_by_dt = []
    rhos = []
    divergent = []
    integrals = []
    for dt in dt_list:
        cfg = ContinuousConfig(
            dt=dt, gamma=gamma, alpha_sq=alpha_sq, operator=_FULL, t_final=t_final
        )
        n = cfg.n_steps
        stride = max(1, n // 100)
        rows = []
        n_div = 0
        for i in range(n_mc):
            rep = RngStream(stream.child_seed(f"replica_dt{dt}", i))
            members = start.data + init_spread * rep.substream(
                "init_members"
            ).standard_normal((k_members, model.dim))
            ens0 = Ensemble(model.kind, members, model.grid)
            try:
                run = run_continuous_filter(
                    model, start, cfg, ens0, rep, record_every=stride
                )
            except FilterDivergence:
                n_div += 1
                continue
            rows.append(run.series.column("mean_member_mse"))
            times = run.series.column("time")
        if not rows:
            raise FilterDivergence(f"every replica diverged at dt={dt}")
        rows = np.asarray(rows)
        curve = rows.mean(axis=0)
        rho = _fit_growth_rate(times, curve)
        curves_by_dt.append((rows, curve))
        times_by_dt.append(times)
        rhos.append(rho)
        divergent.append(n_div)
        integrals.append(float(np.trapezoid(curve, times)))

    finite = all(np.isfinite(r) for r in rhos)
    stable = True
    for a, b in zip(rhos[:-1], rhos[1:]):
        denom = max(abs(a), abs(b))
        if denom > 0 and abs(a - b) / denom > rate_tolerance:
            stable = False
    passed = finite and stable and sum(divergent) == 0

    rows0, curve0 = curves_by_dt[0]
    times0 = times_by_dt[0]
    halfwidth = 2.0 * rows0.std(axis=0, ddof=1) / np.sqrt(rows0.shape[0])
    envelope = curve0[0] * np.exp(min(rhos[0], 7e2) * times0) if np.isfinite(rhos[0]) \
        else np.full_like(curve0, np.inf)
    notes = {"rate_tolerance": rate_tolerance, "divergent_total": float(sum(divergent))}
    for dt, rho, n_div, integral in zip(dt_list, rhos, divergent, integrals):
        notes[f"rho_dt_{dt:g}"] = rho
        notes[f"divergent_dt_{dt:g}"] = float(n_div)
        notes[f"error_integral_dt_{dt:g}"] = integral

    return BoundReport(
        theorem="exponential envelope (continuous filter)",
        steps=times0,
        observed=curve0,
        halfwidth=halfwidth,
        envelope=envelope,
        passed_steps=curve0 <= envelope * (1.0 + 1e-12),
        passed=passed,
        params={
            "gamma": gamma, "alpha_sq": alpha_sq, "k_members": float(k_members),
            "t_final": t_final, "n_mc": float(n_mc), "init_spread": init_spread,
        },
        sweep=[],
        notes=notes,
    )
