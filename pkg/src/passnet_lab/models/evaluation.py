"""Classifier evaluation: thresholded metrics, AUC, ROC/PR curves.

AUC is computed from the grouped threshold sweep with integer
accumulation, which makes it exactly equal to the Mann-Whitney
pair-counting value (ties counted half).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import LengthMismatch


class Averaging(str, Enum):
    BINARY_POSITIVE = "binary_positive"
    MACRO = "macro"


@dataclass
class EvaluationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: Averaging
    auc: float | None
    confusion_matrix: np.ndarray  # rows = true class, cols = predicted
    classes: list[int]
    roc_points: list[tuple[float, float]] = field(default_factory=list)
    pr_points: list[tuple[float, float]] = field(default_factory=list)
    threshold: float = 0.5

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging.value,
            "auc": self.auc,
            "confusion_matrix": self.confusion_matrix.tolist(),
            "classes": self.classes,
            "threshold": self.threshold,
            "roc_points": [[x, y] for x, y in self.roc_points],
            "pr_points": [[x, y] for x, y in self.pr_points],
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def roc_curve_points(labels01: np.ndarray, scores: np.ndarray) -> tuple[list, list, float | None]:
    """(roc points, pr points, auc) from a descending threshold sweep.

    Tied scores are grouped so the trapezoid area matches pair counting
    exactly. Returns auc None when only one class is present.
    """
    n1 = int((labels01 == 1).sum())
    n0 = int((labels01 == 0).sum())
    if n1 == 0 or n0 == 0:
        return [], [], None

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels01[order]

    roc = [(0.0, 0.0)]
    pr = [(0.0, 1.0)]
    auc_num = 0  # integer accumulation of trapezoid area * (2 * n0 * n1)
    tp = fp = 0
    i = 0
    n = len(sorted_scores)
    while i < n:
        j = i
        group_tp = group_fp = 0
        while j < n and sorted_scores[j] == sorted_scores[i]:
            if sorted_labels[j] == 1:
                group_tp += 1
            else:
                group_fp += 1
            j += 1
        prev_tp = tp
        tp += group_tp
        fp += group_fp
        auc_num += group_fp * (prev_tp + tp)
        roc.append((fp / n0, tp / n1))
        pr.append((tp / n1, _safe_div(tp, tp + fp)))
        i = j
    return roc, pr, auc_num / (2 * n0 * n1)


def _one_vs_rest(labels: np.ndarray, preds: np.ndarray, cls: int) -> tuple[float, float, float]:
    tp = int(((preds == cls) & (labels == cls)).sum())
    fp = int(((preds == cls) & (labels != cls)).sum())
    fn = int(((preds != cls) & (labels == cls)).sum())
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return precision, recall, f1


def evaluate(
    probabilities: np.ndarray,
    labels: np.ndarray,
    averaging: Averaging = Averaging.BINARY_POSITIVE,
    threshold: float = 0.5,
    classes: list[int] | None = None,
) -> EvaluationReport:
    """Score class-probability predictions against integer labels.

    Binary averaging thresholds P(class 1); macro averaging predicts the
    argmax class and averages one-vs-rest scores. Macro reports carry no
    AUC. Single-class label sets flag AUC as missing rather than failing.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels)
    if len(probabilities) != len(labels):
        raise LengthMismatch("probabilities and labels differ in length")
    if classes is None:
        classes = list(range(probabilities.shape[1]))
    class_of_column = np.asarray(classes)

    if averaging is Averaging.BINARY_POSITIVE:
        pos_col = int(np.flatnonzero(class_of_column == 1)[0])
        neg_class = [c for c in classes if c != 1][0]
        scores = probabilities[:, pos_col]
        preds = np.where(scores >= threshold, 1, neg_class)
        labels01 = (labels == 1).astype(np.int64)
        roc, pr, auc = roc_curve_points(labels01, scores)
        precision, recall, f1 = _one_vs_rest(labels, preds, 1)
    else:
        preds = class_of_column[np.argmax(probabilities, axis=1)]
        roc, pr, auc = [], [], None
        per_class = [_one_vs_rest(labels, preds, c) for c in classes]
        precision = float(np.mean([p for p, _, _ in per_class]))
        recall = float(np.mean([r for _, r, _ in per_class]))
        f1 = float(np.mean([f for _, _, f in per_class]))

    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    index_of = {c: i for i, c in enumerate(classes)}
    for true, pred in zip(labels, preds):
        confusion[index_of[int(true)], index_of[int(pred)]] += 1
    accuracy = float(np.trace(confusion)) / len(labels)

    return EvaluationReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        averaging=averaging,
        auc=auc,
        confusion_matrix=confusion,
        classes=list(classes),
        roc_points=roc,
        pr_points=pr,
        threshold=threshold,
    )
