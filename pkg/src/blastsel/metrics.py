"""Binary classification metrics: confusion matrix, accuracy family, ROC, AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingleClassError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class RocCurve:
    """Operating points swept over descending score thresholds.

    points[i] = (fpr, tpr) for predicting positive at score >= thresholds[i].
    The first entry is the (0, 0) point at threshold +inf and the last is (1, 1).
    """

    points: tuple[tuple[float, float], ...]
    thresholds: tuple[float, ...]


def _check_binary(vec: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(vec)
    if not np.all((vec == 0) | (vec == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return vec.astype(np.int64)


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    """Count outcomes with class 1 as positive."""
    y_true = _check_binary(y_true, "y_true")
    y_pred = _check_binary(y_pred, "y_pred")
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) == 0:
        raise ValueError("empty label vectors")
    return ConfusionMatrix(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
    )


def classification_metrics(cm: ConfusionMatrix) -> tuple[float, float, float, float]:
    """(accuracy, precision, recall, f1); empty denominators map to 0."""
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else 0.0
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return accuracy, precision, recall, f1


def roc_curve(y_true, scores) -> RocCurve:
    """Threshold sweep over descending distinct scores; ties collapse to one point."""
    y_true = _check_binary(y_true, "y_true")
    scores = np.asarray(scores, dtype=np.float64)
    if len(y_true) != len(scores):
        raise ValueError(f"length mismatch: {len(y_true)} vs {len(scores)}")
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("ROC requires both classes in y_true")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_true = y_true[order]
    cum_tp = np.cumsum(sorted_true == 1)
    cum_fp = np.cumsum(sorted_true == 0)
    # last index of each run of tied scores
    distinct_last = np.nonzero(np.append(np.diff(sorted_scores) != 0, True))[0]

    points = [(0.0, 0.0)]
    thresholds = [float("inf")]
    for i in distinct_last:
        points.append((float(cum_fp[i] / n_neg), float(cum_tp[i] / n_pos)))
        thresholds.append(float(sorted_scores[i]))
    return RocCurve(tuple(points), tuple(thresholds))


def auc(y_true, scores) -> float:
    """Trapezoidal area under the ROC curve."""
    curve = roc_curve(y_true, scores)
    pts = np.asarray(curve.points)
    return float(np.trapezoid(pts[:, 1], pts[:, 0]))


def auc_rank(y_true, scores) -> float:
    """AUC as the pairwise rank statistic: P(pos outranks neg), ties count half.

    Independent of the threshold-sweep construction; used to cross-check auc().
    """
    y_true = _check_binary(y_true, "y_true")
    scores = np.asarray(scores, dtype=np.float64)
    pos = scores[y_true == 1]
    neg = scores[y_true == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise SingleClassError("AUC requires both classes in y_true")
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((wins + 0.5 * ties) / (len(pos) * len(neg)))
