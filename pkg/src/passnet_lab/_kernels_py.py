"""Pure-Python kernels, the fallback when the compiled module is absent.

Bit-identical twin of ``_kernels.pyx``: CPython floats are IEEE-754
doubles, so running the same operations in the same order yields the
same bits. Keep the loop structure in lockstep with the Cython source.
"""

from __future__ import annotations

MAX_CLASSES = 32

_INF = float("inf")


def best_split_gini(values, labels, n_classes, min_leaf):
    """Best binary split of a column pre-sorted ascending, by weighted child Gini.

    Returns ``(pos, score)`` where ``pos`` is the size of the left child
    (0 when no valid split exists) and ``score`` is the weighted mean
    child impurity (lower is better, ``inf`` when no split).
    """
    vals = values.tolist()
    labs = labels.tolist()
    n = len(vals)
    if n_classes > MAX_CLASSES:
        raise ValueError("too many classes for split kernel")
    if min_leaf < 1:
        min_leaf = 1

    left = [0] * n_classes
    right = [0] * n_classes
    for i in range(n):
        right[labs[i]] += 1

    best_pos = 0
    best_score = _INF
    for i in range(1, n):
        c = labs[i - 1]
        left[c] += 1
        right[c] -= 1
        if vals[i] == vals[i - 1]:
            continue
        if i < min_leaf or n - i < min_leaf:
            continue
        sl = 0.0
        for c in range(n_classes):
            f = left[c] / i
            sl += f * f
        gl = 1.0 - sl
        sr = 0.0
        for c in range(n_classes):
            f = right[c] / (n - i)
            sr += f * f
        gr = 1.0 - sr
        score = (i * gl + (n - i) * gr) / n
        if score < best_score:
            best_score = score
            best_pos = i
    return best_pos, best_score


def best_split_sse(values, targets, min_leaf):
    """Best binary split of a pre-sorted column for regression targets.

    Maximizes ``sum_l^2/n_l + sum_r^2/n_r``. Returns ``(pos, proxy)``;
    ``(0, -inf)`` when no valid split exists.
    """
    vals = values.tolist()
    targ = targets.tolist()
    n = len(vals)
    if min_leaf < 1:
        min_leaf = 1

    total = 0.0
    for i in range(n):
        total += targ[i]

    best_pos = 0
    best_proxy = -_INF
    left_sum = 0.0
    for i in range(1, n):
        left_sum += targ[i - 1]
        if vals[i] == vals[i - 1]:
            continue
        if i < min_leaf or n - i < min_leaf:
            continue
        right_sum = total - left_sum
        proxy = left_sum * left_sum / i + right_sum * right_sum / (n - i)
        if proxy > best_proxy:
            best_proxy = proxy
            best_pos = i
    return best_pos, best_proxy


def kmeans_assign(points, centroids, out):
    """Assign each point to its nearest centroid (first wins on ties).

    Fills ``out`` with centroid indices and returns the total
    within-cluster sum of squared distances.
    """
    pts = points.tolist()
    cents = centroids.tolist()
    n = len(pts)
    k = len(cents)
    d = len(cents[0]) if k else 0

    wcss = 0.0
    for i in range(n):
        best = _INF
        bidx = 0
        p = pts[i]
        for c in range(k):
            q = cents[c]
            dist = 0.0
            for j in range(d):
                diff = p[j] - q[j]
                dist += diff * diff
            if dist < best:
                best = dist
                bidx = c
        out[i] = bidx
        wcss += best
    return wcss
