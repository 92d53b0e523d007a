"""
Confusion matrix and classification metrics (thin sklearn wrappers).
"""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix, f1_score, precision_recall_fscore_support

from ..core.errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true identities, columns predicted identities, both in `labels` order."""

    labels: Tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        labels = tuple(self.labels)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InvalidInputError(f"Confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] != len(labels):
            raise InvalidInputError(
                f"Confusion matrix has {counts.shape[0]} rows but {len(labels)} labels"
            )
        if np.any(counts < 0):
            raise InvalidInputError("Confusion counts must be non-negative")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_predictions(
        cls, labels: Sequence[str], y_true: Sequence[str], y_pred: Sequence[str]
    ) -> "ConfusionMatrix":
        labels = list(labels)
        if not y_true:
            return cls(labels=tuple(labels), counts=np.zeros((len(labels), len(labels)), dtype=np.int64))
        return cls(labels=tuple(labels), counts=confusion_matrix(y_true, y_pred, labels=labels))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    def row_sums(self) -> Dict[str, int]:
        return {label: int(n) for label, n in zip(self.labels, self.counts.sum(axis=1))}

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    __hash__ = None


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    macro_f1: float
    micro_f1: float
    per_class: Dict[str, ClassMetrics]


def metrics(confusion: ConfusionMatrix) -> Metrics:
    """
    Accuracy, macro/micro F1 and per-class precision/recall.

    Precision is 0 for classes that were never predicted. Classes with no
    true samples are left out of the macro average.

    Raises:
        InvalidInputError: the matrix is empty or holds no samples
    """
    counts = confusion.counts
    n = counts.shape[0]
    if n == 0 or confusion.total == 0:
        raise InvalidInputError("Cannot compute metrics of an empty confusion matrix")

    rows, cols = np.nonzero(counts)
    repeats = counts[rows, cols]
    y_true = np.repeat(rows, repeats)
    y_pred = np.repeat(cols, repeats)
    classes = list(range(n))

    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=classes, zero_division=0
    )
    supported = support > 0
    macro_f1 = float(np.mean(f1[supported]))
    micro_f1 = float(f1_score(y_true, y_pred, labels=classes, average="micro", zero_division=0))

    per_class = {
        label: ClassMetrics(
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
            support=int(support[i]),
        )
        for i, label in enumerate(confusion.labels)
    }
    return Metrics(
        accuracy=confusion.trace / confusion.total,
        macro_f1=macro_f1,
        micro_f1=micro_f1,
        per_class=per_class,
    )
