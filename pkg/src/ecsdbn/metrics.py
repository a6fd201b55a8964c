"""Confusion-matrix metrics, rank-based AUC and the imbalance ratio.

Binary metrics take the index of the positive (minority) class. Zero
denominators in precision/recall/F1 yield 0 together with a
:class:`~ecsdbn.exceptions.DegenerateMetricWarning` so the result always stays
totally ordered.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import (DegenerateMetricWarning, ParameterError, ShapeError,
                         UndefinedMetricError)


@dataclass
class ConfusionMatrix:
    """``counts[i, j]``: samples of true class ``i`` predicted as class ``j``."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ShapeError("confusion matrix must be square")
        if np.any(self.counts < 0):
            raise ParameterError("counts must be non-negative")

    @property
    def total(self):
        return int(self.counts.sum())

    def binary(self, positive=1):
        """``(tp, fp, fn, tn)`` treating ``positive`` against the rest."""
        c = self.counts
        tp = int(c[positive, positive])
        fp = int(c[:, positive].sum()) - tp
        fn = int(c[positive, :].sum()) - tp
        return tp, fp, fn, self.total - tp - fp - fn


def confusion(y_true, y_pred, k):
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ShapeError("y_true and y_pred lengths differ")
    if y_true.size and (min(y_true.min(), y_pred.min()) < 0 or max(y_true.max(), y_pred.max()) >= k):
        raise ShapeError(f"labels must lie in [0, {k})")
    counts = np.bincount(y_true * k + y_pred, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts)


def accuracy(cm):
    if cm.total == 0:
        raise UndefinedMetricError("accuracy of an empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def class_recalls(cm):
    support = cm.counts.sum(axis=1)
    if np.any(support == 0):
        raise UndefinedMetricError("a class has no samples")
    return np.diag(cm.counts) / support


def gmean(cm):
    """Geometric mean of per-class recalls (sqrt(TPR * TNR) when binary)."""
    r = class_recalls(cm)
    if np.any(r == 0):
        return 0.0
    return float(np.exp(np.mean(np.log(r)))) if r.size > 2 else float(np.sqrt(r[0] * r[1]))


def _ratio(num, den, name):
    if den == 0:
        warnings.warn(f"{name} has a zero denominator; reported as 0",
                      DegenerateMetricWarning, stacklevel=3)
        return 0.0
    return num / den


def precision(cm, positive=1):
    tp, fp, _, _ = cm.binary(positive)
    return _ratio(tp, tp + fp, "precision")


def recall(cm, positive=1):
    tp, _, fn, _ = cm.binary(positive)
    return _ratio(tp, tp + fn, "recall")


def f1(cm, positive=1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        p, r = precision(cm, positive), recall(cm, positive)
    return _ratio(2 * p * r, p + r, "f1")


def auc(y_true, scores, positive=1):
    """Mann-Whitney estimate of the ROC area, ties counted as one half."""
    y_true = np.asarray(y_true).reshape(-1)
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if y_true.shape != scores.shape:
        raise ShapeError("labels and scores lengths differ")
    pos = y_true == positive
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both positive and negative samples")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def imbalance_ratio(y):
    """Size of the largest class over the size of the smallest one."""
    _, counts = np.unique(np.asarray(y).reshape(-1), return_counts=True)
    if counts.size < 2:
        raise ParameterError("imbalance ratio needs at least two classes")
    return counts.max() / counts.min()


def evaluate(y_true, y_pred, scores, k, positive):
    """All reported metrics for one test run."""
    cm = confusion(y_true, y_pred, k)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        return {
            "accuracy": accuracy(cm),
            "gmean": gmean(cm),
            "precision": precision(cm, positive),
            "recall": recall(cm, positive),
            "f1": f1(cm, positive),
            "auc": auc(y_true, scores, positive),
        }
