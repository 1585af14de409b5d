"""Filter-style feature scoring: variance, ANOVA F, mutual information, forest importance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers.tree import ForestParams, fit_forest, forest_importances
from .core import Dataset, FeatureMask
from .errors import SingleClassError

METHODS = ("variance", "anova_f", "mutual_info", "rf_importance")

DEFAULT_MI_BINS = 16


@dataclass(frozen=True)
class FeatureScores:
    scores: np.ndarray  # (n_features,) float64, finite or +inf
    method: str

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).copy()
        if np.any(np.isnan(scores)) or np.any(scores == -np.inf):
            raise ValueError("scores must be finite or +inf")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if self.method not in METHODS:
            raise ValueError(f"unknown scoring method: {self.method}")


def variance_scores(ds: Dataset) -> FeatureScores:
    """Per-feature population variance (divide by n)."""
    return FeatureScores(np.var(ds.features, axis=0), "variance")


def anova_f_scores(ds: Dataset) -> FeatureScores:
    """Two-class ANOVA F statistic per feature with df (1, n-2).

    Degenerate cases keep the ranking total: zero within-class spread with
    distinct class means scores +inf, and zero between-class spread scores 0.
    """
    y = ds.labels
    if np.all(y == 0) or np.all(y == 1):
        raise SingleClassError("ANOVA F needs samples from both classes")
    X = ds.features
    n = ds.n_samples
    X0, X1 = X[y == 0], X[y == 1]
    m0, m1 = X0.mean(axis=0), X1.mean(axis=0)
    grand = X.mean(axis=0)
    ms_between = len(X0) * (m0 - grand) ** 2 + len(X1) * (m1 - grand) ** 2
    ssw = ((X0 - m0) ** 2).sum(axis=0) + ((X1 - m1) ** 2).sum(axis=0)
    ms_within = ssw / (n - 2) if n > 2 else np.zeros_like(ssw)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(
            ms_within > 0,
            ms_between / np.where(ms_within > 0, ms_within, 1.0),
            np.where(ms_between > 0, np.inf, 0.0),
        )
    return FeatureScores(f, "anova_f")


def mutual_info_scores(ds: Dataset, bins: int = DEFAULT_MI_BINS) -> FeatureScores:
    """Equal-width-histogram mutual information with the labels, in nats."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if ds.n_samples < 2:
        raise ValueError("need at least 2 samples")
    X, y = ds.features, ds.labels
    n = ds.n_samples
    p_class = np.array([np.mean(y == 0), np.mean(y == 1)])
    scores = np.empty(ds.n_features)
    for j in range(ds.n_features):
        x = X[:, j]
        lo, hi = x.min(), x.max()
        if hi == lo:
            idx = np.zeros(n, dtype=np.int64)
            used = 1
        else:
            idx = np.minimum(((x - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
            used = bins
        joint = np.zeros((used, 2))
        np.add.at(joint, (idx, y), 1.0)
        joint /= n
        p_bin = joint.sum(axis=1)
        mi = 0.0
        for b in range(used):
            for c in (0, 1):
                p = joint[b, c]
                if p > 0:
                    mi += p * np.log(p / (p_bin[b] * p_class[c]))
        scores[j] = mi
    return FeatureScores(scores, "mutual_info")


def rf_importance_scores(ds: Dataset, params: ForestParams | None = None) -> FeatureScores:
    """Mean Gini-impurity decrease per feature over a forest, normalized to sum 1."""
    forest = fit_forest(ds, params or ForestParams())
    return FeatureScores(forest_importances(forest), "rf_importance")


def select_top_k(scores: FeatureScores, k: int) -> FeatureMask:
    """Mask of the k best-scoring features; ties keep the lower index."""
    d = len(scores.scores)
    if not (1 <= k <= d):
        raise ValueError(f"k must be in [1, {d}], got {k}")
    order = np.argsort(-scores.scores, kind="stable")
    bits = np.zeros(d, dtype=bool)
    bits[order[:k]] = True
    return FeatureMask(bits)


def compute_scores(method: str, ds: Dataset, *, bins: int = DEFAULT_MI_BINS,
                   forest_params: ForestParams | None = None) -> FeatureScores:
    if method == "variance":
        return variance_scores(ds)
    if method == "anova_f":
        return anova_f_scores(ds)
    if method == "mutual_info":
        return mutual_info_scores(ds, bins)
    if method == "rf_importance":
        return rf_importance_scores(ds, forest_params)
    raise ValueError(f"unknown scoring method: {method}")
