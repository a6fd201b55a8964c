"""Brute-force reference implementations used only by the tests.

Each one follows the textbook definition with plain loops and shares no code
with the package.
"""

import itertools
import math


def matmul_loops(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def logistic(x):
    return 1.0 / (1.0 + math.exp(-x))


def hidden_probs_loops(w, bh, v):
    nv, nh = len(w), len(w[0])
    return [[logistic(bh[j] + sum(row[i] * w[i][j] for i in range(nv))) for j in range(nh)]
            for row in v]


def visible_probs_loops(w, bv, h):
    nv, nh = len(w), len(w[0])
    return [[logistic(bv[i] + sum(row[j] * w[i][j] for j in range(nh))) for i in range(nv)]
            for row in h]


def softmax_direct(logits):
    out = []
    for row in logits:
        e = [math.exp(z) for z in row]
        s = sum(e)
        out.append([x / s for x in e])
    return out


def binary_counts(y_true, y_pred, positive):
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if t == positive and p == positive:
            tp += 1
        elif t != positive and p == positive:
            fp += 1
        elif t == positive:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def metrics_from_counts(counts, positive):
    """accuracy, gmean, precision, recall, f1 from a K x K list-of-lists."""
    k = len(counts)
    total = sum(sum(r) for r in counts)
    acc = sum(counts[i][i] for i in range(k)) / total
    recalls = [counts[i][i] / sum(counts[i]) for i in range(k)]
    prod = 1.0
    for r in recalls:
        prod *= r
    gm = prod ** (1.0 / k)
    tp = counts[positive][positive]
    fp = sum(counts[i][positive] for i in range(k)) - tp
    fn = sum(counts[positive]) - tp
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return acc, gm, prec, rec, f


def auc_pairs(y_true, scores, positive=1):
    pos = [s for y, s in zip(y_true, scores) if y == positive]
    neg = [s for y, s in zip(y_true, scores) if y != positive]
    wins = 0.0
    for p in pos:
        for q in neg:
            wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (len(pos) * len(neg))


def _avg_rank_positions(values):
    """Average 1-based sorted position for each value (midranks)."""
    order = sorted(values)
    ranks = []
    for v in values:
        positions = [i + 1 for i, x in enumerate(order) if x == v]
        ranks.append(sum(positions) / len(positions))
    return ranks


def wilcoxon_enumerate(a, b):
    """Two-sided p by listing all 2^n sign assignments of the ranked differences."""
    d = [x - y for x, y in zip(a, b) if x != y]
    ranks = _avg_rank_positions([abs(x) for x in d])
    w_plus = sum(r for r, x in zip(ranks, d) if x > 0)
    w_minus = sum(r for r, x in zip(ranks, d) if x < 0)
    w_obs = min(w_plus, w_minus)
    hits = 0
    n = len(d)
    for signs in itertools.product((1, -1), repeat=n):
        sp = sum(r for r, s in zip(ranks, signs) if s > 0)
        sm = sum(r for r, s in zip(ranks, signs) if s < 0)
        if min(sp, sm) <= w_obs + 1e-9:
            hits += 1
    return w_obs, hits / 2 ** n


def column_ranks_by_sort(scores, higher_is_better=True):
    """Mean rank per method, ranking each dataset column by sorting."""
    n_methods, n_data = len(scores), len(scores[0])
    totals = [0.0] * n_methods
    for d in range(n_data):
        col = [scores[m][d] for m in range(n_methods)]
        keyed = [-v for v in col] if higher_is_better else col
        for m, r in enumerate(_avg_rank_positions(keyed)):
            totals[m] += r
    return [t / n_data for t in totals]
