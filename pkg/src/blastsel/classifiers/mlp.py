"""Fully-connected ReLU network with a sigmoid output, trained by Adam.

Loss per mini-batch is mean binary cross-entropy plus an L2 penalty
l2_alpha/(2*batch) * sum of squared weights (biases excluded). Inputs are
z-scored with statistics captured at fit time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Dataset
from ..errors import DivergenceError, SingleClassError


@dataclass(frozen=True)
class MlpParams:
    hidden_sizes: tuple[int, ...] = (100,)
    activation: str = "relu"
    l2_alpha: float = 1e-4
    batch_size: int | None = None  # None = auto: min(200, n)
    learning_rate: float = 0.001
    max_epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation: {self.activation}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass
class MlpState:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    n_features: int
    loss_history: list[float] = field(default_factory=list)  # per-epoch mean batch loss


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward(weights, biases, X):
    """Returns (hidden activations including input, output logits)."""
    acts = [X]
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ W + b, 0.0)
        acts.append(a)
    logits = (a @ weights[-1] + biases[-1]).ravel()
    return acts, logits


def loss_and_grads(weights, biases, X, y, l2_alpha):
    """Mini-batch loss and gradients for every weight matrix and bias vector."""
    n = X.shape[0]
    acts, logits = _forward(weights, biases, X)
    data_loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    reg = 0.5 * l2_alpha / n * sum(float(np.sum(W * W)) for W in weights)
    loss = data_loss + reg

    delta = ((_sigmoid(logits) - y) / n).reshape(-1, 1)
    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    for k in range(len(weights) - 1, -1, -1):
        grads_w[k] = acts[k].T @ delta + (l2_alpha / n) * weights[k]
        grads_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ weights[k].T) * (acts[k] > 0)
    return loss, grads_w, grads_b


def _glorot_init(sizes, rng):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def fit_mlp(ds: Dataset, params: MlpParams) -> MlpState:
    """Train for exactly max_epochs with Adam (b1=0.9, b2=0.999, eps=1e-8)."""
    y = ds.labels
    if np.all(y == 0) or np.all(y == 1):
        raise SingleClassError("MLP training needs samples from both classes")
    X = ds.features
    n, d = X.shape
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    Xs = (X - mean) / std
    yf = y.astype(np.float64)

    rng = np.random.default_rng(params.seed)
    sizes = [d, *params.hidden_sizes, 1]
    weights, biases = _glorot_init(sizes, rng)

    batch = min(200, n) if params.batch_size is None else min(params.batch_size, n)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_w = [np.zeros_like(W) for W in weights]
    v_w = [np.zeros_like(W) for W in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    step = 0
    history = []
    for epoch in range(params.max_epochs):
        perm = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, batch):
            idx = perm[start : start + batch]
            loss, gw, gb = loss_and_grads(weights, biases, Xs[idx], yf[idx], params.l2_alpha)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss {loss} at epoch {epoch}, step {step}"
                )
            epoch_losses.append(loss)
            step += 1
            lr_t = params.learning_rate * np.sqrt(1.0 - beta2**step) / (1.0 - beta1**step)
            for k in range(len(weights)):
                m_w[k] = beta1 * m_w[k] + (1 - beta1) * gw[k]
                v_w[k] = beta2 * v_w[k] + (1 - beta2) * gw[k] ** 2
                weights[k] -= lr_t * m_w[k] / (np.sqrt(v_w[k]) + eps)
                m_b[k] = beta1 * m_b[k] + (1 - beta1) * gb[k]
                v_b[k] = beta2 * v_b[k] + (1 - beta2) * gb[k] ** 2
                biases[k] -= lr_t * m_b[k] / (np.sqrt(v_b[k]) + eps)
        history.append(float(np.mean(epoch_losses)))
    return MlpState(weights, biases, mean, std, d, history)


def mlp_scores(state: MlpState, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, sigmoid probabilities); label 1 at probability >= 0.5."""
    Xs = (X - state.mean) / state.std
    _, logits = _forward(state.weights, state.biases, Xs)
    scores = _sigmoid(logits)
    labels = (scores >= 0.5).astype(np.int64)
    return labels, scores
