"""Nonparametric comparison of methods: Wilcoxon signed-rank, Holm, mean ranks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import DegenerateInputError, ParameterError, ShapeError

EXACT_MAX_N = 15


@dataclass
class TestResult:
    statistic: float
    p_value: float
    significant: bool
    n: int
    exact: bool


def _exact_lower_tail(doubled_ranks, w2):
    """P(T+ <= w2 / 2) under random signs; ranks given doubled so they are ints."""
    counts = np.zeros(int(doubled_ranks.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r]
        counts += shifted
    return counts[: w2 + 1].sum() / float(2 ** len(doubled_ranks))


def wilcoxon_signed_rank(a, b, alpha=0.05):
    """Two-sided paired signed-rank test on ``a - b``.

    Zero differences are dropped and tied magnitudes get midranks. With at
    most 15 non-zero differences the p-value comes from the exact null
    distribution of the rank sum; beyond that a tie-corrected normal
    approximation is used.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape or a.size == 0:
        raise ShapeError("paired samples must be non-empty and of equal length")
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateInputError("all paired differences are zero")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w = min(w_plus, n * (n + 1) / 2.0 - w_plus)
    if n <= EXACT_MAX_N:
        doubled = np.rint(2 * ranks).astype(np.int64)
        p = min(1.0, 2.0 * _exact_lower_tail(doubled, int(round(2 * w))))
        exact = True
    else:
        _, ties = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(ties ** 3 - ties)) / 48.0
        z = (w - n * (n + 1) / 4.0) / math.sqrt(var)
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
        exact = False
    return TestResult(w, p, p <= alpha, n, exact)


def holm_posthoc(p_values, alpha=0.05):
    """Holm step-down rejections, returned in the input order."""
    p = np.asarray(p_values, dtype=np.float64).reshape(-1)
    if np.any((p < 0) | (p > 1)):
        raise ParameterError("p-values must lie in [0, 1]")
    m = p.size
    reject = [False] * m
    for step, idx in enumerate(np.argsort(p, kind="stable")):
        if p[idx] > alpha / (m - step):
            break
        reject[idx] = True
    return reject


def average_rank(scores, higher_is_better=True):
    """Mean rank of each method (rows) across datasets (columns); 1 is best."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.size == 0:
        raise ParameterError("need a non-empty methods x datasets matrix")
    if np.any(np.isnan(scores)):
        raise ParameterError("score matrix has missing cells")
    keyed = -scores if higher_is_better else scores
    ranks = np.apply_along_axis(rankdata, 0, keyed)
    return ranks.mean(axis=1)
