"""Shared oracles for the test suite: finite differences and random instances."""

from __future__ import annotations

import numpy as np

from hetpref import ModelParams, PreferenceDataset, neg_log_likelihood


def random_dataset(rng: np.random.Generator, n: int, d1: int, d2: int) -> PreferenceDataset:
    return PreferenceDataset(
        psi0=rng.normal(size=n),
        psi=rng.normal(size=(n, d2)),
        z=rng.normal(size=(n, d1)),
        y=rng.integers(0, 2, size=n).astype(float),
    )


def random_params(rng: np.random.Generator, d1: int, d2: int, scale: float = 1.0) -> ModelParams:
    return ModelParams(theta=scale * rng.normal(size=d1), gamma=scale * rng.normal(size=d2))


def fd_grad_theta(params: ModelParams, data: PreferenceDataset, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of the loss in theta."""
    out = np.empty(params.d1)
    for i in range(params.d1):
        e = np.zeros(params.d1)
        e[i] = h
        hi = neg_log_likelihood(ModelParams(params.theta + e, params.gamma), data)
        lo = neg_log_likelihood(ModelParams(params.theta - e, params.gamma), data)
        out[i] = (hi - lo) / (2 * h)
    return out


def fd_grad_gamma(params: ModelParams, data: PreferenceDataset, h: float = 1e-6) -> np.ndarray:
    out = np.empty(params.d2)
    for i in range(params.d2):
        e = np.zeros(params.d2)
        e[i] = h
        hi = neg_log_likelihood(ModelParams(params.theta, params.gamma + e), data)
        lo = neg_log_likelihood(ModelParams(params.theta, params.gamma - e), data)
        out[i] = (hi - lo) / (2 * h)
    return out


def fd_jacobian(fn, x0: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a vector-valued function of x."""
    f0 = np.atleast_1d(fn(x0))
    jac = np.empty((f0.size, x0.size))
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = h
        jac[:, i] = (np.atleast_1d(fn(x0 + e)) - np.atleast_1d(fn(x0 - e))) / (2 * h)
    return jac


def rel_err(actual: np.ndarray, expected: np.ndarray) -> float:
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    denom = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(actual - expected))) / denom
