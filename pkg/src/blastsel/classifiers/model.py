"""Unified trained-model wrapper: training entry points, prediction, JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..core import Dataset
from .gnb import GnbState, fit_gnb, gnb_scores
from .mlp import MlpParams, MlpState, fit_mlp, mlp_scores
from .tree import (
    ForestParams,
    ForestState,
    TreeParams,
    TreeState,
    fit_forest,
    fit_tree,
    forest_scores,
    tree_p1,
)

MODEL_FORMAT = "blastsel-model"
MODEL_FORMAT_VERSION = 1

KINDS = ("mlp", "tree", "forest", "gnb")


@dataclass
class TrainedModel:
    kind: str
    state: object
    n_features: int


def train_gaussian_nb(train: Dataset) -> TrainedModel:
    return TrainedModel("gnb", fit_gnb(train), train.n_features)


def train_decision_tree(train: Dataset, params: TreeParams | None = None) -> TrainedModel:
    return TrainedModel("tree", fit_tree(train, params or TreeParams()), train.n_features)


def train_random_forest(train: Dataset, params: ForestParams | None = None) -> TrainedModel:
    return TrainedModel("forest", fit_forest(train, params or ForestParams()), train.n_features)


def train_mlp(train: Dataset, params: MlpParams | None = None) -> TrainedModel:
    return TrainedModel("mlp", fit_mlp(train, params or MlpParams()), train.n_features)


def train_model(kind: str, train: Dataset, params=None) -> TrainedModel:
    if kind == "gnb":
        return train_gaussian_nb(train)
    if kind == "tree":
        return train_decision_tree(train, params)
    if kind == "forest":
        return train_random_forest(train, params)
    if kind == "mlp":
        return train_mlp(train, params)
    raise ValueError(f"unknown classifier kind: {kind}")


def predict(model: TrainedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, class-1 scores) for a feature matrix of fitted width."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"feature width {X.shape[1] if X.ndim == 2 else '?'} does not match "
            f"fitted width {model.n_features}"
        )
    if model.kind == "gnb":
        return gnb_scores(model.state, X)
    if model.kind == "tree":
        scores = tree_p1(model.state, X)
        return (scores >= 0.5).astype(np.int64), scores
    if model.kind == "forest":
        return forest_scores(model.state, X)
    if model.kind == "mlp":
        return mlp_scores(model.state, X)
    raise ValueError(f"unknown classifier kind: {model.kind}")


def _tree_to_dict(t: TreeState) -> dict:
    return {
        "feature": list(t.feature),
        "threshold": [float(x) for x in t.threshold],
        "left": list(t.left),
        "right": list(t.right),
        "p1": [float(x) for x in t.p1],
        "n_features": t.n_features,
    }


def _tree_from_dict(d: dict) -> TreeState:
    return TreeState(
        feature=[int(x) for x in d["feature"]],
        threshold=[float(x) for x in d["threshold"]],
        left=[int(x) for x in d["left"]],
        right=[int(x) for x in d["right"]],
        p1=[float(x) for x in d["p1"]],
        n_features=int(d["n_features"]),
        importances=None,
    )


def model_to_dict(model: TrainedModel) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "n_features": model.n_features,
    }
    s = model.state
    if model.kind == "gnb":
        doc["state"] = {
            "priors": s.priors.tolist(),
            "means": s.means.tolist(),
            "variances": s.variances.tolist(),
        }
    elif model.kind == "tree":
        doc["state"] = _tree_to_dict(s)
    elif model.kind == "forest":
        doc["state"] = {"trees": [_tree_to_dict(t) for t in s.trees]}
    elif model.kind == "mlp":
        doc["state"] = {
            "weights": [W.tolist() for W in s.weights],
            "biases": [b.tolist() for b in s.biases],
            "mean": s.mean.tolist(),
            "std": s.std.tolist(),
        }
    else:
        raise ValueError(f"unknown classifier kind: {model.kind}")
    return doc


def model_from_dict(doc: dict) -> TrainedModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a model document")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    kind = doc["kind"]
    n_features = int(doc["n_features"])
    s = doc["state"]
    if kind == "gnb":
        state = GnbState(
            priors=np.asarray(s["priors"], dtype=np.float64),
            means=np.asarray(s["means"], dtype=np.float64),
            variances=np.asarray(s["variances"], dtype=np.float64),
            n_features=n_features,
        )
    elif kind == "tree":
        state = _tree_from_dict(s)
    elif kind == "forest":
        state = ForestState(
            trees=[_tree_from_dict(t) for t in s["trees"]], n_features=n_features
        )
    elif kind == "mlp":
        state = MlpState(
            weights=[np.asarray(W, dtype=np.float64) for W in s["weights"]],
            biases=[np.asarray(b, dtype=np.float64) for b in s["biases"]],
            mean=np.asarray(s["mean"], dtype=np.float64),
            std=np.asarray(s["std"], dtype=np.float64),
            n_features=n_features,
        )
    else:
        raise ValueError(f"unknown classifier kind: {kind}")
    return TrainedModel(kind, state, n_features)


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
