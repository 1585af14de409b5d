"""CART decision tree and bootstrap random forest, binary labels, Gini criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import Dataset
from ..util import thread_map


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    seed: int = 42
    max_features: int | None = None  # None = floor(sqrt(d)), at least 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1")


@dataclass
class TreeState:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    p1: list[float] = field(default_factory=list)
    n_features: int = 0
    importances: np.ndarray | None = None  # raw gini-decrease sums per feature

    def max_depth_reached(self) -> int:
        depths = {0: 0}
        best = 0
        for node in range(len(self.feature)):
            d = depths[node]
            best = max(best, d)
            if self.feature[node] >= 0:
                depths[self.left[node]] = d + 1
                depths[self.right[node]] = d + 1
        return best


@dataclass
class ForestState:
    trees: list[TreeState]
    n_features: int


def _gini_counts(n1, n):
    """Gini impurity 2*p1*(1-p1) from class-1 count and total, vectorized."""
    n1 = np.asarray(n1, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return 2.0 * n1 * (n - n1) / (n * n)


def _best_split(X, y, candidates):
    """(gain, feature, threshold) of the best Gini split, or None.

    Thresholds are midpoints between consecutive distinct sorted values. Ties
    resolve to the lower feature index, then the lower threshold.
    """
    n = len(y)
    cand = np.asarray(list(candidates), dtype=np.int64)
    n1_total = int(y.sum())
    parent_imp = float(_gini_counts(n1_total, n))

    cols = X[:, cand]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    boundary = xs[:-1] < xs[1:]
    if not boundary.any():
        return None
    cum1 = np.cumsum(y[order], axis=0, dtype=np.float64)
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n1_left = cum1[:-1]
    n_right = n - n_left
    n1_right = n1_total - n1_left
    child_imp = (
        n_left * _gini_counts(n1_left, n_left)
        + n_right * _gini_counts(n1_right, n_right)
    ) / n
    gains = parent_imp - child_imp
    gains[~boundary] = -np.inf
    # scan features first, then thresholds, so exact ties keep the lower
    # feature index and then the lower threshold
    flat = int(np.argmax(gains.T))
    col, row = divmod(flat, gains.shape[0])
    best_gain = float(gains[row, col])
    if best_gain <= 0:
        return None
    thr = (xs[row, col] + xs[row + 1, col]) / 2.0
    return best_gain, int(cand[col]), float(thr)


def _grow_tree(X, y, max_depth, rng, max_features) -> TreeState:
    n_root, d = X.shape
    state = TreeState(n_features=d, importances=np.zeros(d))

    def new_node(idx) -> int:
        node = len(state.feature)
        state.feature.append(-1)
        state.threshold.append(0.0)
        state.left.append(-1)
        state.right.append(-1)
        state.p1.append(float(y[idx].mean()))
        return node

    root_idx = np.arange(n_root)
    root = new_node(root_idx)
    stack = [(root, root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        labels = y[idx]
        if len(idx) < 2 or labels.min() == labels.max():
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if max_features is None:
            candidates = range(d)
        else:
            candidates = np.sort(rng.choice(d, size=max_features, replace=False))
        split = _best_split(X[idx], labels, candidates)
        if split is None:
            continue
        gain, f, thr = split
        state.feature[node] = f
        state.threshold[node] = thr
        state.importances[f] += (len(idx) / n_root) * gain
        go_left = X[idx, f] <= thr
        left_idx = idx[go_left]
        right_idx = idx[~go_left]
        left = new_node(left_idx)
        right = new_node(right_idx)
        state.left[node] = left
        state.right[node] = right
        # expand left first, matching recursive order
        stack.append((right, right_idx, depth + 1))
        stack.append((left, left_idx, depth + 1))
    return state


def fit_tree(ds: Dataset, params: TreeParams) -> TreeState:
    """Greedy CART fit with a depth cap; deterministic for a given dataset.

    Pure-label input degenerates to a single leaf.
    """
    return _grow_tree(ds.features, ds.labels, params.max_depth, None, None)


def tree_p1(state: TreeState, X: np.ndarray) -> np.ndarray:
    """Leaf class-1 proportion for every row."""
    out = np.empty(X.shape[0])
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if state.feature[node] < 0:
            out[idx] = state.p1[node]
            continue
        go_left = X[idx, state.feature[node]] <= state.threshold[node]
        stack.append((state.left[node], idx[go_left]))
        stack.append((state.right[node], idx[~go_left]))
    return out


def _fit_forest_tree(X, y, seed, tree_index, max_features) -> TreeState:
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(int(tree_index),))
    )
    boot = rng.integers(0, X.shape[0], size=X.shape[0])
    return _grow_tree(X[boot], y[boot], None, rng, max_features)


def fit_forest(ds: Dataset, params: ForestParams) -> ForestState:
    """Bootstrap forest of unlimited-depth CART trees.

    Tree i draws its RNG from (seed, i), so results do not depend on how many
    threads train the trees. Pure-label input degenerates to single-leaf trees.
    """
    X, y = ds.features, ds.labels
    max_features = params.max_features
    if max_features is None:
        max_features = max(1, int(math.floor(math.sqrt(ds.n_features))))
    max_features = min(max_features, ds.n_features)
    trees = thread_map(
        lambda i: _fit_forest_tree(X, y, params.seed, i, max_features),
        range(params.n_trees),
    )
    return ForestState(trees=list(trees), n_features=ds.n_features)


def forest_scores(state: ForestState, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, scores): majority vote (ties to class 0) and mean leaf proportion."""
    per_tree = np.stack([tree_p1(t, X) for t in state.trees])
    votes = (per_tree >= 0.5).sum(axis=0)
    labels = (2 * votes > len(state.trees)).astype(np.int64)
    scores = per_tree.mean(axis=0)
    return labels, scores


def forest_importances(state: ForestState) -> np.ndarray:
    """Per-feature Gini decrease averaged over trees, normalized to sum to 1."""
    total = np.zeros(state.n_features)
    for t in state.trees:
        total += t.importances
    total /= len(state.trees)
    s = total.sum()
    return total / s if s > 0 else total
