"""Class-dependent misclassification costs applied to posterior probabilities.

The operational cost structure is one cost per *predicted* class: the
posterior of class ``j`` is scaled by the threshold ``1 - c[j]`` and the
prediction is the argmax of the scaled values. A full cost matrix is only used
for the expected-risk diagnostics.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ParameterError, ShapeError
from .numerics import argmax_lowest


def check_cost_vector(c, k=None):
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    if k is not None and c.size != k:
        raise ShapeError(f"cost vector has {c.size} entries, expected {k}")
    if np.any(c < 0) or np.any(c > 1) or not np.all(np.isfinite(c)):
        raise ParameterError("costs must lie in [0, 1]")
    return c


def check_cost_matrix(cm):
    cm = np.asarray(cm, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ShapeError(f"cost matrix must be square, got {cm.shape}")
    if np.any(np.diag(cm) != 0):
        raise ParameterError("correct classifications must cost 0")
    if np.any(cm < 0) or np.any(cm > 1):
        raise ParameterError("costs must lie in [0, 1]")
    return cm


def apply_costs(probs, c):
    """Scale each posterior column by ``1 - c[j]``; rows are not renormalized."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim == 1:
        probs = probs.reshape(1, -1)
    c = check_cost_vector(c, probs.shape[1])
    return probs * (1.0 - c)


def predict_with_costs(probs, c):
    """Argmax of the cost-scaled posteriors, ties to the lowest class index."""
    return argmax_lowest(apply_costs(probs, c))


def expected_risk(probs_row, cm, i):
    """Expected cost of deciding class ``i`` for one sample."""
    cm = check_cost_matrix(cm)
    p = np.asarray(probs_row, dtype=np.float64).reshape(-1)
    if p.size != cm.shape[0]:
        raise ShapeError("posterior length does not match the cost matrix")
    if not 0 <= i < p.size:
        raise ParameterError(f"class index {i} out of range")
    # C[i][i] is zero so the full dot product equals the sum over j != i
    return float(p @ cm[i])


def overall_risk(probs, cm, priors):
    """Prior-weighted sum of the expected risk over samples and decisions."""
    cm = check_cost_matrix(cm)
    probs = np.asarray(probs, dtype=np.float64)
    priors = np.asarray(priors, dtype=np.float64).reshape(-1)
    if probs.ndim != 2 or probs.shape[1] != cm.shape[0] or priors.size != probs.shape[0]:
        raise ShapeError("posteriors, cost matrix and priors do not line up")
    # risk[n, i] = sum_j P(j|x_n) C[i, j]
    risk = probs @ cm.T
    return float(risk.sum(axis=1) @ priors)


def cost_scaled_proba(probs, c):
    """Cost-scaled posteriors renormalized per row.

    The row argmax matches :func:`predict_with_costs`; a row annihilated by
    unit costs becomes uniform.
    """
    scaled = apply_costs(probs, c)
    total = scaled.sum(axis=1, keepdims=True)
    k = scaled.shape[1]
    return np.where(total > 0, scaled / np.where(total > 0, total, 1.0), 1.0 / k)
