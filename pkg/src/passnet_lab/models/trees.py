"""CART trees, bagged forests, and gradient-boosted tree ensembles.

Split search runs through the selected kernel implementation
(``passnet_lab.kernels``). Split rule is ``x[feature] <= threshold``
with the threshold stored as the left boundary value, which keeps
training-time partitions and prediction-time routing exactly consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kernels import best_split_gini, best_split_sse
from ..rng import derive_seed, make_rng


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: np.ndarray | float | None = None  # leaf payload

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            payload = self.value.tolist() if isinstance(self.value, np.ndarray) else self.value
            return {"leaf": payload}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TreeNode":
        if "leaf" in data:
            payload = data["leaf"]
            value = np.asarray(payload, dtype=np.float64) if isinstance(payload, list) else float(payload)
            return cls(value=value)
        return cls(
            feature=int(data["feature"]),
            threshold=float(data["threshold"]),
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )


def _leaf_rows(node: TreeNode, X: np.ndarray) -> np.ndarray:
    """Row-wise leaf payloads; works for distribution and scalar leaves."""
    n = X.shape[0]
    first = node
    while not first.is_leaf:
        first = first.left
    if isinstance(first.value, np.ndarray):
        out = np.empty((n, len(first.value)))
    else:
        out = np.empty(n)
    idx = np.arange(n)

    def descend(nd: TreeNode, rows: np.ndarray) -> None:
        if nd.is_leaf:
            out[rows] = nd.value
            return
        mask = X[rows, nd.feature] <= nd.threshold
        descend(nd.left, rows[mask])
        descend(nd.right, rows[~mask])

    descend(node, idx)
    return out


def _gini(counts: np.ndarray, n: int) -> float:
    frac = counts / n
    return 1.0 - float((frac * frac).sum())


def grow_classification_tree(
    X: np.ndarray,
    y_index: np.ndarray,
    n_classes: int,
    max_depth: int,
    min_leaf: int,
    features_per_split: int,
    rng: np.random.Generator,
) -> TreeNode:
    """Gini CART. Candidate features are sampled per node; ties on split
    score keep the first candidate, so growth is deterministic per rng."""
    n, p = X.shape

    def build(indices: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(y_index[indices], minlength=n_classes)
        size = len(indices)
        parent_gini = _gini(counts, size)
        if depth >= max_depth or size < 2 * min_leaf or parent_gini == 0.0:
            return TreeNode(value=counts / size)

        candidates = rng.permutation(p)[:features_per_split]
        best_score = math.inf
        best = None
        for f in candidates:
            order = np.argsort(X[indices, f], kind="stable")
            svals = np.ascontiguousarray(X[indices[order], f])
            slabs = np.ascontiguousarray(y_index[indices[order]].astype(np.int64))
            pos, score = best_split_gini(svals, slabs, n_classes, min_leaf)
            if pos > 0 and score < best_score:
                best_score = score
                best = (int(f), order, pos, float(svals[pos - 1]))
        if best is None or best_score >= parent_gini:
            return TreeNode(value=counts / size)

        f, order, pos, threshold = best
        left_idx = indices[order[:pos]]
        right_idx = indices[order[pos:]]
        node = TreeNode(feature=f, threshold=threshold)
        node.left = build(left_idx, depth + 1)
        node.right = build(right_idx, depth + 1)
        return node

    return build(np.arange(n), 0)


def grow_regression_tree(
    X: np.ndarray,
    gradients: np.ndarray,
    hessians: np.ndarray,
    max_depth: int,
    min_leaf: int,
) -> TreeNode:
    """Squared-error tree on gradients with Newton leaf values
    (sum of gradients / sum of hessians)."""
    n, p = X.shape

    def leaf(indices: np.ndarray) -> TreeNode:
        denom = float(hessians[indices].sum())
        if denom <= 1e-12:
            return TreeNode(value=0.0)
        return TreeNode(value=float(gradients[indices].sum()) / denom)

    def build(indices: np.ndarray, depth: int) -> TreeNode:
        size = len(indices)
        if depth >= max_depth or size < 2 * min_leaf:
            return leaf(indices)

        best_proxy = -math.inf
        best = None
        for f in range(p):
            order = np.argsort(X[indices, f], kind="stable")
            svals = np.ascontiguousarray(X[indices[order], f])
            stargets = np.ascontiguousarray(gradients[indices[order]])
            pos, proxy = best_split_sse(svals, stargets, min_leaf)
            if pos > 0 and proxy > best_proxy:
                best_proxy = proxy
                best = (f, order, pos, float(svals[pos - 1]))
        if best is None:
            return leaf(indices)
        total = float(gradients[indices].sum())
        if best_proxy <= total * total / size:
            return leaf(indices)

        f, order, pos, threshold = best
        node = TreeNode(feature=f, threshold=threshold)
        node.left = build(indices[order[:pos]], depth + 1)
        node.right = build(indices[order[pos:]], depth + 1)
        return node

    return build(np.arange(n), 0)


# -- random forest -------------------------------------------------------------


@dataclass
class ForestCore:
    trees: list[TreeNode]
    n_classes: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            total += _leaf_rows(tree, X)
        return total / len(self.trees)

    def to_dict(self) -> dict:
        return {"n_classes": self.n_classes, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, data: dict) -> "ForestCore":
        return cls(
            trees=[TreeNode.from_dict(t) for t in data["trees"]],
            n_classes=int(data["n_classes"]),
        )


def fit_forest(
    X: np.ndarray,
    y_index: np.ndarray,
    n_classes: int,
    n_trees: int,
    max_depth: int,
    min_leaf: int,
    features_per_split: int | None,
    seed: int,
) -> ForestCore:
    """Bagged Gini CART trees. Per-tree seeds derive from (seed, tree index),
    so results do not depend on training order or worker count."""
    n, p = X.shape
    m = features_per_split if features_per_split else max(1, int(math.isqrt(p)))
    trees = []
    for t in range(n_trees):
        rng = make_rng(derive_seed(seed, "tree", t))
        bootstrap = rng.integers(0, n, n)
        trees.append(
            grow_classification_tree(
                X[bootstrap], y_index[bootstrap], n_classes, max_depth, min_leaf, m, rng
            )
        )
    return ForestCore(trees=trees, n_classes=n_classes)


# -- gradient boosting ----------------------------------------------------------


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class BoostCore:
    """Stage-wise regression trees on the logistic loss gradient.

    Binary: one sequence of trees on P(class 1). Multiclass: one-vs-rest
    sequences whose sigmoid scores are normalized to a probability vector.
    """

    base_scores: list[float]  # one per sequence
    sequences: list[list[TreeNode]]
    learning_rate: float
    n_classes: int

    def _raw(self, X: np.ndarray, seq: int) -> np.ndarray:
        z = np.full(X.shape[0], self.base_scores[seq])
        for tree in self.sequences[seq]:
            z += self.learning_rate * _leaf_rows(tree, X)
        return z

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.n_classes == 2:
            p1 = _sigmoid(self._raw(X, 0))
            return np.column_stack([1.0 - p1, p1])
        scores = np.column_stack([_sigmoid(self._raw(X, k)) for k in range(self.n_classes)])
        return scores / scores.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "base_scores": self.base_scores,
            "learning_rate": self.learning_rate,
            "n_classes": self.n_classes,
            "sequences": [[t.to_dict() for t in seq] for seq in self.sequences],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoostCore":
        return cls(
            base_scores=[float(b) for b in data["base_scores"]],
            sequences=[[TreeNode.from_dict(t) for t in seq] for seq in data["sequences"]],
            learning_rate=float(data["learning_rate"]),
            n_classes=int(data["n_classes"]),
        )


def _fit_boost_binary(
    X: np.ndarray, y01: np.ndarray, n_rounds: int, learning_rate: float,
    max_depth: int, min_leaf: int,
) -> tuple[float, list[TreeNode]]:
    base_rate = min(max(float(y01.mean()), 1e-12), 1.0 - 1e-12)
    base = math.log(base_rate / (1.0 - base_rate))
    F = np.full(len(y01), base)
    trees: list[TreeNode] = []
    for _ in range(n_rounds):
        prob = _sigmoid(F)
        gradients = y01 - prob
        hessians = prob * (1.0 - prob)
        tree = grow_regression_tree(X, gradients, hessians, max_depth, min_leaf)
        trees.append(tree)
        F = F + learning_rate * _leaf_rows(tree, X)
    return base, trees


def fit_boost(
    X: np.ndarray,
    y_index: np.ndarray,
    n_classes: int,
    n_rounds: int,
    learning_rate: float,
    max_depth: int,
    min_leaf: int,
) -> BoostCore:
    if n_classes == 2:
        base, trees = _fit_boost_binary(
            X, (y_index == 1).astype(np.float64), n_rounds, learning_rate, max_depth, min_leaf
        )
        return BoostCore([base], [trees], learning_rate, 2)
    bases = []
    sequences = []
    for k in range(n_classes):
        base, trees = _fit_boost_binary(
            X, (y_index == k).astype(np.float64), n_rounds, learning_rate, max_depth, min_leaf
        )
        bases.append(base)
        sequences.append(trees)
    return BoostCore(bases, sequences, learning_rate, n_classes)
