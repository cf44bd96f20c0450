"""Randomized least-squares posterior sampling.

Oracle: the posterior of a linear Gaussian inversion in closed form,
precision C^-1 + G'G / gamma^2, computed with dense algebra here and
frozen into scalar examples by hand.
"""

import numpy as np
import pytest

from enkflab import rml_sample


def posterior_moments(m, c_prior, g_op, gamma, y):
    prec = np.linalg.inv(c_prior) + g_op.T @ g_op / gamma**2
    cov = np.linalg.inv(prec)
    mean = cov @ (np.linalg.inv(c_prior) @ m + g_op.T @ y / gamma**2)
    return mean, cov


def test_scalar_posterior_by_hand():
    # prior N(0,1), data y = 0 with unit noise: posterior N(0, 1/2)
    rng = np.random.default_rng(500)
    samples = rml_sample(np.zeros(1), np.eye(1), np.eye(1), 1.0,
                         np.zeros(1), 40000, rng)
    assert samples.mean() == pytest.approx(0.0, abs=5 * np.sqrt(0.5 / 40000))
    assert samples.var() == pytest.approx(0.5, rel=0.05)


def test_moments_match_closed_form():
    rng = np.random.default_rng(501)
    dim, n_obs = 5, 3
    f = rng.normal(size=(dim, dim)) + 2 * np.eye(dim)
    m = rng.normal(size=dim)
    g_op = rng.normal(size=(n_obs, dim))
    gamma, y = 0.7, rng.normal(size=n_obs)
    n = 100_000
    samples = rml_sample(m, f, g_op, gamma, y, n, np.random.default_rng(502))
    mean, cov = posterior_moments(m, f.T @ f, g_op, gamma, y)
    tol = 5 * np.sqrt(np.trace(cov)) / np.sqrt(n)
    assert np.linalg.norm(samples.mean(axis=0) - mean) < tol
    sample_cov = np.cov(samples.T)
    frob = np.linalg.norm(sample_cov - cov) / np.linalg.norm(cov)
    assert frob < 0.02


def test_huge_noise_recovers_prior():
    rng = np.random.default_rng(503)
    dim = 3
    f = np.diag([1.0, 2.0, 0.5])
    m = np.array([1.0, -1.0, 0.0])
    samples = rml_sample(m, f, np.eye(dim), 1e6, np.zeros(dim), 50_000, rng)
    prior_cov = f.T @ f
    assert np.allclose(samples.mean(axis=0), m,
                       atol=5 * np.sqrt(np.trace(prior_cov) / 50_000))
    frob = np.linalg.norm(np.cov(samples.T) - prior_cov) / np.linalg.norm(prior_cov)
    assert frob < 0.03


def test_exact_data_limit_pins_observed_direction():
    # tiny noise with G = e1': first coordinate collapses onto y
    rng = np.random.default_rng(504)
    g_op = np.array([[1.0, 0.0]])
    samples = rml_sample(np.zeros(2), np.eye(2), g_op, 1e-5,
                         np.array([3.0]), 2000, rng)
    assert np.allclose(samples[:, 0], 3.0, atol=1e-3)
    assert samples[:, 1].std() == pytest.approx(1.0, rel=0.1)


def test_deterministic_given_generator():
    a = rml_sample(np.zeros(2), np.eye(2), np.eye(2), 1.0, np.ones(2),
                   10, np.random.default_rng(505))
    b = rml_sample(np.zeros(2), np.eye(2), np.eye(2), 1.0, np.ones(2),
                   10, np.random.default_rng(505))
    assert np.array_equal(a, b)


def test_validation():
    with pytest.raises(ValueError):
        rml_sample(np.zeros(2), np.eye(2), np.eye(2), 0.0, np.zeros(2), 1,
                   np.random.default_rng(1))
    with pytest.raises(ValueError):
        rml_sample(np.zeros(2), np.eye(2), np.eye(2), 1.0, np.zeros(2), 0,
                   np.random.default_rng(1))
    with pytest.raises(ValueError, match="dimension"):
        rml_sample(np.zeros(2), np.eye(3), np.eye(2), 1.0, np.zeros(2), 1,
                   np.random.default_rng(1))
    with pytest.raises(ValueError, match="rank-deficient"):
        rml_sample(np.zeros(2), np.ones((1, 2)), np.eye(2), 1.0, np.zeros(2), 1,
                   np.random.default_rng(1))
