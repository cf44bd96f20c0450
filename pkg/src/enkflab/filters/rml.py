"""Randomized maximum likelihood sampling for linear Gaussian inversion.

For a prior N(m, C) with C = F'F and data y = G u + eta, eta ~ N(0, gamma^2 I),
each sample minimizes

    |y + gamma xi_k - G u|^2 / gamma^2 + |u - m - F' eta_k|^2_C

with fresh draws xi_k, eta_k.  The minimizers are exact samples of the
posterior, which is Gaussian with precision C^-1 + G'G / gamma^2.  This is
the zero-dynamics building block of the analysis step: one observation, no
flow between assimilations.
"""

from __future__ import annotations

import numpy as np


def rml_sample(
    m: np.ndarray,
    c_factor: np.ndarray,
    g_op: np.ndarray,
    gamma: float,
    y: np.ndarray,
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw posterior samples by randomized least squares.

    Args:
        m: prior mean, (dim,).
        c_factor: factor F with prior covariance C = F.T @ F, (r, dim).
        g_op: forward operator, (n_obs, dim).
        gamma: observation noise std.
        y: observed data, (n_obs,).
        n_samples: number of posterior samples.
        rng: noise source.

    Returns:
        Samples, (n_samples, dim).

    The prior must be non-degenerate (F square or tall of full column
    rank), since the objective needs C^-1.
    """
    if gamma <= 0:
        raise ValueError("observation noise std must be positive")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    dim = m.shape[0]
    r = c_factor.shape[0]
    if c_factor.shape[1] != dim or g_op.shape[1] != dim:
        raise ValueError("operator and factor must share the state dimension")
    if r < dim:
        raise ValueError("prior factor is rank-deficient: cannot invert C")

    c_prior = c_factor.T @ c_factor
    c_inv = np.linalg.inv(c_prior)
    a = g_op.T @ g_op / gamma**2 + c_inv

    xi = rng.standard_normal((n_samples, y.shape[0]))
    eta = rng.standard_normal((n_samples, r))
    u_hat = m + eta @ c_factor
    y_pert = y + gamma * xi

    rhs = y_pert @ g_op / gamma**2 + u_hat @ c_inv
    return np.linalg.solve(a, rhs.T).T
