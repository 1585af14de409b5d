import numpy as np
import pytest

from blastsel.classifiers.mlp import _glorot_init, loss_and_grads
from blastsel.core import Dataset


def make_ds(X, y) -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    return Dataset(X, y, tuple(f"s{i}" for i in range(len(y))))


def finite_difference_max_rel_error(sizes, n, seed, l2_alpha=1e-4, h=1e-5):
    """Central finite differences vs analytic gradients over every parameter."""
    rng = np.random.default_rng(seed)
    weights, biases = _glorot_init(sizes, rng)
    X = rng.standard_normal((n, sizes[0]))
    y = rng.integers(0, 2, n).astype(np.float64)
    _, grads_w, grads_b = loss_and_grads(weights, biases, X, y, l2_alpha)
    max_rel = 0.0
    for params, grads in ((weights, grads_w), (biases, grads_b)):
        for P, G in zip(params, grads):
            it = np.nditer(P, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                saved = P[i]
                P[i] = saved + h
                loss_plus, _, _ = loss_and_grads(weights, biases, X, y, l2_alpha)
                P[i] = saved - h
                loss_minus, _, _ = loss_and_grads(weights, biases, X, y, l2_alpha)
                P[i] = saved
                numeric = (loss_plus - loss_minus) / (2 * h)
                rel = abs(numeric - G[i]) / max(abs(numeric), abs(G[i]), 1e-8)
                max_rel = max(max_rel, rel)
    return max_rel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
