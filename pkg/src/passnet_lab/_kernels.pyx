# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot-loop kernels: tree split search and k-means assignment.

These must stay bit-identical to ``passnet_lab._kernels_py``: same
operation order, same tie-breaking (first candidate wins on equal
score), IEEE-754 doubles throughout. Any change here must be mirrored
there and covered by the equivalence tests.
"""

cdef double INF = float("inf")

MAX_CLASSES = 32


def best_split_gini(double[::1] values, long[::1] labels, Py_ssize_t n_classes, Py_ssize_t min_leaf):
    """Best binary split of a column pre-sorted ascending, by weighted child Gini.

    Returns ``(pos, score)`` where ``pos`` is the size of the left child
    (0 when no valid split exists) and ``score`` is the weighted mean
    child impurity (lower is better, ``inf`` when no split).
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i, c, best_pos
    cdef long left[32]
    cdef long right[32]
    cdef double sl, sr, f, gl, gr, score, best_score

    if n_classes > MAX_CLASSES:
        raise ValueError("too many classes for split kernel")
    if min_leaf < 1:
        min_leaf = 1

    for c in range(n_classes):
        left[c] = 0
        right[c] = 0
    for i in range(n):
        right[labels[i]] += 1

    best_pos = 0
    best_score = INF
    for i in range(1, n):
        c = labels[i - 1]
        left[c] += 1
        right[c] -= 1
        if values[i] == values[i - 1]:
            continue
        if i < min_leaf or n - i < min_leaf:
            continue
        sl = 0.0
        for c in range(n_classes):
            f = (<double> left[c]) / (<double> i)
            sl += f * f
        gl = 1.0 - sl
        sr = 0.0
        for c in range(n_classes):
            f = (<double> right[c]) / (<double> (n - i))
            sr += f * f
        gr = 1.0 - sr
        score = ((<double> i) * gl + (<double> (n - i)) * gr) / (<double> n)
        if score < best_score:
            best_score = score
            best_pos = i
    return best_pos, best_score


def best_split_sse(double[::1] values, double[::1] targets, Py_ssize_t min_leaf):
    """Best binary split of a pre-sorted column for regression targets.

    Maximizes ``sum_l^2/n_l + sum_r^2/n_r`` (equivalent to minimizing the
    total squared error). Returns ``(pos, proxy)``; ``(0, -inf)`` when no
    valid split exists.
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i, best_pos
    cdef double total, left_sum, right_sum, proxy, best_proxy

    if min_leaf < 1:
        min_leaf = 1

    total = 0.0
    for i in range(n):
        total += targets[i]

    best_pos = 0
    best_proxy = -INF
    left_sum = 0.0
    for i in range(1, n):
        left_sum += targets[i - 1]
        if values[i] == values[i - 1]:
            continue
        if i < min_leaf or n - i < min_leaf:
            continue
        right_sum = total - left_sum
        proxy = left_sum * left_sum / (<double> i) + right_sum * right_sum / (<double> (n - i))
        if proxy > best_proxy:
            best_proxy = proxy
            best_pos = i
    return best_pos, best_proxy


def kmeans_assign(double[:, ::1] points, double[:, ::1] centroids, long[::1] out):
    """Assign each point to its nearest centroid (first wins on ties).

    Fills ``out`` with centroid indices and returns the total
    within-cluster sum of squared distances.
    """
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t k = centroids.shape[0]
    cdef Py_ssize_t i, c, j, bidx
    cdef double best, dist, diff, wcss

    wcss = 0.0
    for i in range(n):
        best = INF
        bidx = 0
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                dist += diff * diff
            if dist < best:
                best = dist
                bidx = c
        out[i] = bidx
        wcss += best
    return wcss
