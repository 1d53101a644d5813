"""
Evaluation metrics for activity recognition.

The mean F1-score averages per-class F1 over every class of the dataset, so
classes absent from the evaluated split still count (with F1 = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from utils.error_handler import DataError


@dataclass
class ClassMetrics:
    label: int
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "class": self.label,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass
class MetricsReport:
    """
    Macro F1 with its per-class breakdown.

    Attributes:
        mean_f1 (float): (1/|c|) * sum of per-class F1
        per_class (List[ClassMetrics]): One entry per class index
        confusion (np.ndarray): [|c| x |c|] counts, rows = true class
        pretext_step_accuracy (Optional[List[float]]): Per-step pretext accuracy, when measured
    """

    mean_f1: float
    per_class: List[ClassMetrics]
    confusion: np.ndarray
    pretext_step_accuracy: Optional[List[float]] = field(default=None)

    @property
    def num_classes(self) -> int:
        return len(self.per_class)

    def to_dict(self) -> Dict[str, object]:
        return {
            "mean_f1": self.mean_f1,
            "per_class": [c.to_dict() for c in self.per_class],
            "confusion": self.confusion.tolist(),
            "pretext_step_accuracy": self.pretext_step_accuracy,
        }


def f1_from_precision_recall(precision: float, recall: float) -> float:
    """2PR/(P+R), 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def compute_metrics(y_true: Iterable[int], y_pred: Iterable[int], num_classes: int) -> MetricsReport:
    """
    Compute macro F1, per-class precision/recall/F1/support and the confusion matrix.

    Args:
        y_true: Ground truth class indices
        y_pred: Predicted class indices
        num_classes: Number of classes |c| in the dataset

    Returns:
        MetricsReport
    """
    y_true = np.asarray(list(y_true), dtype=np.int64)
    y_pred = np.asarray(list(y_pred), dtype=np.int64)
    if y_true.size == 0:
        raise DataError("Cannot compute metrics on empty label vectors")
    if y_true.shape != y_pred.shape:
        raise DataError(f"Label vectors differ in length: {y_true.size} vs {y_pred.size}")
    for name, values in (("true", y_true), ("predicted", y_pred)):
        if values.min() < 0 or values.max() >= num_classes:
            raise DataError(f"{name} labels must lie in [0, {num_classes})")

    labels = list(range(num_classes))
    confusion = confusion_matrix(y_true, y_pred, labels=labels)
    precision, recall, _, support = precision_recall_fscore_support(
        y_true, y_pred, labels=labels, average=None, zero_division=0
    )

    per_class = []
    for c in labels:
        p, r = float(precision[c]), float(recall[c])
        per_class.append(ClassMetrics(c, p, r, f1_from_precision_recall(p, r), int(support[c])))
    mean_f1 = sum(c.f1 for c in per_class) / num_classes
    return MetricsReport(mean_f1=mean_f1, per_class=per_class, confusion=confusion)
