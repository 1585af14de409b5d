"""Gaussian naive Bayes for binary labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Dataset
from ..errors import SingleClassError


@dataclass
class GnbState:
    priors: np.ndarray  # (2,)
    means: np.ndarray   # (2, d)
    variances: np.ndarray  # (2, d), smoothing already added
    n_features: int


def fit_gnb_xy(X: np.ndarray, y: np.ndarray) -> GnbState:
    """Class priors plus per-class feature means and smoothed variances.

    Variance smoothing is 1e-9 times the largest total feature variance,
    added to every per-class variance.
    """
    if np.all(y == 0) or np.all(y == 1):
        raise SingleClassError("Gaussian NB needs samples from both classes")
    eps = 1e-9 * float(np.max(np.var(X, axis=0)))
    priors = np.array([np.mean(y == 0), np.mean(y == 1)])
    means = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.stack([X[y == c].var(axis=0) + eps for c in (0, 1)])
    return GnbState(priors, means, variances, X.shape[1])


def fit_gnb(ds: Dataset) -> GnbState:
    return fit_gnb_xy(ds.features, ds.labels)


def _log_likelihoods(state: GnbState, X: np.ndarray) -> np.ndarray:
    """Joint log p(x, c) for c in {0, 1}; shape (n, 2)."""
    ll = np.empty((X.shape[0], 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        for c in (0, 1):
            var = state.variances[c]
            safe_var = np.where(var > 0, var, 1.0)
            dev = (X - state.means[c]) ** 2
            term = -0.5 * (np.log(2.0 * np.pi * safe_var) + dev / safe_var)
            # zero variance: exact match contributes 0, any mismatch -inf
            term = np.where(var > 0, term, np.where(dev == 0, 0.0, -np.inf))
            ll[:, c] = np.log(state.priors[c]) + term.sum(axis=1)
    return ll


def gnb_scores(state: GnbState, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, class-1 probabilities). Likelihood ties go to class 0."""
    ll = _log_likelihoods(state, X)
    delta = ll[:, 1] - ll[:, 0]
    labels = (ll[:, 1] > ll[:, 0]).astype(np.int64)
    with np.errstate(over="ignore", invalid="ignore"):
        scores = np.where(
            delta >= 0,
            1.0 / (1.0 + np.exp(-delta)),
            np.exp(delta) / (1.0 + np.exp(delta)),
        )
    scores = np.where(np.isnan(scores), 0.5, scores)
    return labels, scores
