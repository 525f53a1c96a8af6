"""Least squares with heteroskedasticity-robust (HC0 sandwich) errors."""

from __future__ import annotations

import numpy as np


def ols_sandwich(X: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None):
    """Return ``(beta, se)``.

    With ``weights`` the fit is the population regression under the given
    probabilities (used by exact enumeration oracles); ``se`` is then zero.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        XtX = (X * w[:, None]).T @ X
        beta = np.linalg.solve(XtX, (X * w[:, None]).T @ y)
        return beta, np.zeros_like(beta)
    XtX = X.T @ X
    bread = np.linalg.inv(XtX)
    beta = bread @ (X.T @ y)
    resid = y - X @ beta
    meat = (X * (resid ** 2)[:, None]).T @ X
    cov = bread @ meat @ bread
    return beta, np.sqrt(np.clip(np.diag(cov), 0.0, None))
