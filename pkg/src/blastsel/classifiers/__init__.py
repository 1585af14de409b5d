"""Classifier implementations: Gaussian NB, CART tree, random forest, MLP."""

from .gnb import GnbState, fit_gnb, gnb_scores
from .mlp import MlpParams, MlpState, fit_mlp, loss_and_grads, mlp_scores
from .model import (
    KINDS,
    TrainedModel,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    train_decision_tree,
    train_gaussian_nb,
    train_mlp,
    train_model,
    train_random_forest,
)
from .tree import (
    ForestParams,
    ForestState,
    TreeParams,
    TreeState,
    fit_forest,
    fit_tree,
    forest_importances,
    forest_scores,
    tree_p1,
)

__all__ = [
    "KINDS",
    "ForestParams",
    "ForestState",
    "GnbState",
    "MlpParams",
    "MlpState",
    "TrainedModel",
    "TreeParams",
    "TreeState",
    "fit_forest",
    "fit_gnb",
    "fit_mlp",
    "fit_tree",
    "forest_importances",
    "forest_scores",
    "gnb_scores",
    "load_model",
    "loss_and_grads",
    "mlp_scores",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "save_model",
    "train_decision_tree",
    "train_gaussian_nb",
    "train_mlp",
    "train_model",
    "train_random_forest",
    "tree_p1",
]
