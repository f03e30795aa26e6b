"""Evaluation metrics: accuracy, ROC AUC, R^2 and quadratic weighted kappa."""

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedMetricError


def _pair(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"inputs must be 1-D of equal length, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise UndefinedMetricError("metric of an empty sample")
    return a, b


def accuracy(pred, y) -> float:
    pred, y = _pair(pred, y)
    return float(np.mean(pred == y))


def auc(scores, y) -> float:
    """Mann-Whitney estimate of ROC AUC; tied scores count one half via midranks."""
    scores, y = _pair(np.asarray(scores, dtype=np.float64), y)
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def r2(pred, y) -> float:
    pred, y = _pair(np.asarray(pred, dtype=np.float64), np.asarray(y, dtype=np.float64))
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise UndefinedMetricError("R^2 is undefined for a constant target")
    return float(1.0 - np.sum((y - pred) ** 2) / ss_tot)


def qwk(pred, y, n_classes: int) -> float:
    """Cohen's kappa with weights ``(i - j)^2 / (K - 1)^2``.

    The expected matrix is the outer product of the two marginals scaled to N.
    """
    pred, y = _pair(np.asarray(pred, dtype=np.int64), np.asarray(y, dtype=np.int64))
    if n_classes < 2:
        raise ValueError("qwk needs at least two classes")
    for v in (pred, y):
        if v.min() < 0 or v.max() >= n_classes:
            raise ValueError(f"class ids must lie in 0..{n_classes - 1}")
    if np.unique(y).size < 2:
        raise UndefinedMetricError("qwk needs at least two observed classes")
    observed = np.zeros((n_classes, n_classes))
    np.add.at(observed, (y, pred), 1.0)
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / y.size
    i = np.arange(n_classes)
    weights = (i[:, None] - i[None, :]) ** 2 / (n_classes - 1) ** 2
    return float(1.0 - (weights * observed).sum() / (weights * expected).sum())
