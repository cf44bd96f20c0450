"""Contraction factor, error envelopes, and the Monte Carlo bound checks."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from enkflab import (
    BoundReport,
    FilterDivergence,
    LinearModel,
    RngStream,
    alpha_sq_for_theta,
    check_theorem_cts,
    check_theorem_disc,
    check_theorem_varinf,
    envelope_disc,
    envelope_varinf,
    relative_error,
    theta,
)
from enkflab.diagnostics import _fit_growth_rate
from enkflab.state import KindMismatchError, StateVector


def test_theta_known_values():
    # formula degenerations first, then the worked number
    assert theta(0.3, 0.0, 1.2, 0.5) == pytest.approx(np.exp(1.2), rel=1e-14)
    assert theta(0.3, 0.09, 1.2, 0.5) == pytest.approx(np.exp(1.2) / 2, rel=1e-14)
    want = np.exp(0.2) / 26.0
    got = theta(0.01, 0.0025, 1.0, 0.1)
    assert got == pytest.approx(want, rel=1e-14)
    assert abs(got - 0.04699) < 5e-5


def test_theta_validation():
    with pytest.raises(ValueError):
        theta(0.0, 0.1, 1.0, 0.1)
    with pytest.raises(ValueError):
        theta(0.1, 0.1, 1.0, 0.0)
    with pytest.raises(ValueError):
        theta(0.1, -0.1, 1.0, 0.1)


@given(
    gamma=st.floats(0.01, 1.0),
    beta=st.floats(0.1, 3.0),
    h=st.floats(0.01, 0.5),
    a1=st.floats(0.0, 0.5),
    bump=st.floats(1e-4, 0.5),
)
def test_theta_monotonicity(gamma, beta, h, a1, bump):
    assert theta(gamma, a1 + bump, beta, h) < theta(gamma, a1, beta, h)
    assert theta(gamma, a1, beta, h + bump) > theta(gamma, a1, beta, h)


def test_alpha_for_theta_roundtrip():
    a = alpha_sq_for_theta(0.01, 1.3, 0.1, 0.5)
    assert theta(0.01, a, 1.3, 0.1) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        alpha_sq_for_theta(0.01, 1.3, 0.1, 0.0)
    with pytest.raises(ValueError, match="already holds"):
        alpha_sq_for_theta(0.01, -5.0, 0.1, 0.9)


def test_envelope_disc_values():
    steps = np.arange(5)
    e0, beta, h, gamma, k = 2.0, 0.7, 0.1, 0.05, 4
    x = 2 * beta * h
    want = np.exp(x * steps) * e0 + 2 * k * gamma**2 * (np.expm1(x * steps) / np.expm1(x))
    got = envelope_disc(e0, beta, h, gamma, k, steps)
    assert np.allclose(got, want, rtol=1e-13)
    assert got[0] == e0
    # flat-dynamics limit: geometric sum degenerates to j
    flat = envelope_disc(e0, 0.0, h, gamma, k, steps)
    assert np.allclose(flat, e0 + 2 * k * gamma**2 * steps, rtol=1e-13)


def test_envelope_varinf_values():
    steps = np.arange(6)
    e0, th, gamma, k = 3.0, 0.25, 0.05, 4
    want = th**steps * e0 + 2 * k * gamma**2 * (1 - th**steps) / (1 - th)
    got = envelope_varinf(e0, th, gamma, k, steps)
    assert np.allclose(got, want, rtol=1e-13)
    assert got[0] == e0
    # the envelope approaches the asymptote from its starting value
    far = envelope_varinf(e0, th, gamma, k, np.array([4000]))
    assert far[0] == pytest.approx(2 * k * gamma**2 / (1 - th), rel=1e-9)
    # theta = 1 continues by the linear-in-j limit
    lim = envelope_varinf(e0, 1.0, gamma, k, steps)
    assert np.allclose(lim, e0 + 2 * k * gamma**2 * steps, rtol=1e-13)


def test_disc_check_passes_on_flat_dynamics():
    model = LinearModel(rate=0.0, dim=3)
    report = check_theorem_disc(
        model, h=0.1, gamma=0.5, k_members=5, n_steps=6, n_mc=60,
        stream=RngStream(80), init_spread=1.0, beta_hat=0.0,
        u0=model.state(np.ones(3)))
    assert report.passed
    assert report.passed_steps.all()
    want_env = 3.0 + 2 * 5 * 0.25 * np.arange(7)
    assert np.allclose(report.envelope, want_env, rtol=1e-12)
    assert report.params["beta_hat"] == 0.0
    assert "pass" in report.describe()
    assert all(ok for _, ok in report.sweep)


def test_disc_check_is_reproducible():
    model = LinearModel(rate=0.1, dim=2)
    kw = dict(h=0.1, gamma=0.3, k_members=3, n_steps=4, n_mc=10,
              init_spread=0.5, beta_hat=0.1, u0=model.state(np.ones(2)))
    a = check_theorem_disc(model, stream=RngStream(81), **kw)
    b = check_theorem_disc(model, stream=RngStream(81), **kw)
    assert np.array_equal(a.observed, b.observed)
    assert np.array_equal(a.halfwidth, b.halfwidth)


def test_disc_check_estimates_beta_when_not_given():
    model = LinearModel(rate=0.3, dim=1)
    report = check_theorem_disc(
        model, h=0.1, gamma=0.5, k_members=3, n_steps=3, n_mc=10,
        stream=RngStream(82), init_spread=0.5)
    assert report.params["beta_hat"] == pytest.approx(0.3, abs=1e-5)


def test_disc_check_validation():
    model = LinearModel(rate=0.0, dim=2)
    with pytest.raises(ValueError):
        check_theorem_disc(model, 0.1, 0.5, 3, 0, 10, RngStream(1))
    with pytest.raises(ValueError):
        check_theorem_disc(model, 0.1, 0.5, 3, 5, 1, RngStream(1))


def test_varinf_check_passes_on_flat_dynamics():
    model = LinearModel(rate=0.0, dim=3)
    report = check_theorem_varinf(
        model, h=0.1, gamma=0.5, alpha_sq=0.25, k_members=5, n_steps=12,
        n_mc=60, stream=RngStream(83), init_spread=1.0, beta_hat=0.0,
        u0=model.state(np.ones(3)))
    assert report.passed
    assert report.params["theta_hat"] == pytest.approx(0.5, rel=1e-14)
    assert report.notes["asymptote"] == pytest.approx(2 * 5 * 0.25 / 0.5, rel=1e-14)
    assert report.notes["tail_mean"] - report.notes["tail_halfwidth"] <= report.notes["asymptote"]


def test_varinf_check_rejects_no_contraction():
    model = LinearModel(rate=0.0, dim=2)
    with pytest.raises(ValueError, match="alpha_sq"):
        check_theorem_varinf(model, h=0.1, gamma=0.5, alpha_sq=1e-9,
                             k_members=3, n_steps=4, n_mc=4,
                             stream=RngStream(84), beta_hat=2.0,
                             u0=model.state(np.ones(2)))
    with pytest.raises(ValueError):
        check_theorem_varinf(model, h=0.1, gamma=0.5, alpha_sq=0.0,
                             k_members=3, n_steps=4, n_mc=4,
                             stream=RngStream(84), beta_hat=0.0,
                             u0=model.state(np.ones(2)))
    with pytest.raises(ValueError, match="tail"):
        check_theorem_varinf(model, h=0.1, gamma=0.5, alpha_sq=0.25,
                             k_members=3, n_steps=4, n_mc=4,
                             stream=RngStream(84), beta_hat=0.0,
                             u0=model.state(np.ones(2)), tail_steps=9)


def test_cts_check_zero_initial_error_is_flat_zero():
    model = LinearModel(rate=0.2, dim=2)
    report = check_theorem_cts(
        model, dt_list=[0.05, 0.025], gamma=1.0, k_members=3, t_final=0.5,
        n_mc=3, stream=RngStream(85), init_spread=0.0, alpha_sq=0.0,
        u0=model.state(np.ones(2)))
    assert report.passed
    assert np.all(report.observed == 0.0)
    assert report.notes["rho_dt_0.05"] == 0.0
    assert report.notes["divergent_total"] == 0.0


def test_cts_check_recovers_growth_rate():
    # gamma huge decouples the filter: every error component scales by
    # e^{rate t} exactly, so the fitted envelope rate is 2 * rate
    model = LinearModel(rate=0.5, dim=2)
    report = check_theorem_cts(
        model, dt_list=[0.02, 0.01], gamma=1e6, k_members=4, t_final=0.5,
        n_mc=12, stream=RngStream(86), init_spread=0.3,
        u0=model.state(np.ones(2)))
    assert report.passed
    assert report.notes["rho_dt_0.02"] == pytest.approx(1.0, rel=1e-3)
    assert report.notes["rho_dt_0.01"] == pytest.approx(1.0, rel=1e-3)
    assert report.notes["error_integral_dt_0.02"] > 0.0
    assert report.notes["divergent_total"] == 0.0


def test_cts_check_counts_divergence():
    model = LinearModel(rate=40.0, dim=2)
    with pytest.raises(FilterDivergence):
        check_theorem_cts(model, dt_list=[0.5], gamma=1e-3, k_members=3,
                          t_final=2.0, n_mc=2, stream=RngStream(87),
                          init_spread=1.0, u0=model.state(np.ones(2)))


def test_cts_check_validation():
    model = LinearModel(rate=0.0, dim=1)
    with pytest.raises(ValueError):
        check_theorem_cts(model, [], 0.5, 3, 1.0, 4, RngStream(1))
    with pytest.raises(ValueError):
        check_theorem_cts(model, [0.1], 0.5, 3, 1.0, 1, RngStream(1))


def test_fit_growth_rate_edges():
    t = np.array([0.0, 1.0, 2.0])
    assert _fit_growth_rate(t, np.array([1.0, np.e, 1.0])) == pytest.approx(1.0, rel=1e-12)
    assert _fit_growth_rate(t, np.array([1.0, 0.5, 4.0])) == pytest.approx(
        np.log(4.0) / 2.0, rel=1e-12)
    assert _fit_growth_rate(t, np.zeros(3)) == 0.0
    assert _fit_growth_rate(t, np.array([0.0, 1.0, 0.0])) == np.inf


def test_relative_error_examples():
    u = StateVector("lorenz63", np.array([3.0, 0.0, 4.0]))
    assert relative_error(u, u) == 0.0
    assert relative_error(StateVector("lorenz63", np.zeros(3)), u) == 1.0
    assert relative_error(u.like(2 * u.data), u) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        relative_error(u, StateVector("lorenz63", np.zeros(3)))
    with pytest.raises(KindMismatchError):
        relative_error(u, StateVector("lorenz96", np.zeros(40)))


def test_bound_report_describe_mentions_failures():
    rep = BoundReport(
        theorem="t", steps=np.arange(2), observed=np.array([1.0, 5.0]),
        halfwidth=np.zeros(2), envelope=np.array([2.0, 2.0]),
        passed_steps=np.array([True, False]), passed=False, params={})
    assert "FAIL" in rep.describe()
    assert "1/2" in rep.describe()
