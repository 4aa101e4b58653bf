"""Clustering study machinery: standardization, k-means, silhouette, NMI, PCA.

k-means uses k-means++ initialization with ``n_init`` restarts and keeps
the restart with the lowest within-cluster sum of squares; the
assignment step runs through the selected kernel implementation. NMI is
normalized by the arithmetic mean of the two label entropies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyData, KTooLarge, LengthMismatch, SingleCluster
from .kernels import kmeans_assign
from .rng import derive_seed, make_rng

DEFAULT_N_INIT = 10
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6
DEFAULT_K_RANGE = range(2, 8)


# -- standardization ---------------------------------------------------------


@dataclass
class Standardization:
    mean: np.ndarray
    scale: np.ndarray
    kept_columns: list[int]
    dropped_columns: list[int]

    def apply(self, data: np.ndarray) -> np.ndarray:
        return (data[:, self.kept_columns] - self.mean) / self.scale

    def invert(self, standardized: np.ndarray, constants: np.ndarray) -> np.ndarray:
        out = np.tile(constants, (standardized.shape[0], 1))
        out[:, self.kept_columns] = standardized * self.scale + self.mean
        return out


def standardize(data: np.ndarray) -> tuple[np.ndarray, Standardization]:
    """Zero-mean unit-variance columns (population std); constant columns
    are dropped and recorded."""
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise EmptyData("no rows to standardize")
    std = data.std(axis=0)
    kept = [i for i in range(data.shape[1]) if std[i] > 0.0]
    dropped = [i for i in range(data.shape[1]) if std[i] == 0.0]
    if not kept:
        raise EmptyData("every column is constant")
    params = Standardization(
        mean=data[:, kept].mean(axis=0),
        scale=std[kept],
        kept_columns=kept,
        dropped_columns=dropped,
    )
    return params.apply(data), params


# -- k-means -------------------------------------------------------------------


@dataclass
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    wcss: float
    n_iterations: int
    winning_restart: int
    restart_histories: list[list[float]] = field(default_factory=list)

    @property
    def wcss_history(self) -> list[float]:
        """Per-iteration cost of the winning restart."""
        return self.restart_histories[self.winning_restart]


def _kmeans_plus_plus(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centroids = np.empty((k, data.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = data[first]
    dist_sq = ((data - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(dist_sq.sum())
        if total == 0.0:
            centroids[c] = data[int(rng.integers(n))]
            continue
        r = float(rng.random()) * total
        cumulative = 0.0
        chosen = n - 1
        for i in range(n):
            cumulative += float(dist_sq[i])
            if cumulative > r:
                chosen = i
                break
        centroids[c] = data[chosen]
        dist_sq = np.minimum(dist_sq, ((data - centroids[c]) ** 2).sum(axis=1))
    return centroids


def _lloyd(data: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float):
    n, k = data.shape[0], centroids.shape[0]
    assignments = np.zeros(n, dtype=np.int64)
    history: list[float] = []
    for iteration in range(max_iter):
        wcss = kmeans_assign(data, np.ascontiguousarray(centroids), assignments)
        history.append(wcss)
        new_centroids = centroids.copy()
        for c in range(k):
            members = data[assignments == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
        # re-seed empty clusters at the point farthest from its centroid
        empty = [c for c in range(k) if not (assignments == c).any()]
        if empty:
            dist_sq = ((data - new_centroids[assignments]) ** 2).sum(axis=1)
            farthest = np.argsort(-dist_sq, kind="stable")
            for idx, c in enumerate(empty):
                new_centroids[c] = data[farthest[idx]]
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < tol:
            break
    wcss = kmeans_assign(data, np.ascontiguousarray(centroids), assignments)
    history.append(wcss)
    return assignments.copy(), centroids, wcss, len(history), history


def kmeans(
    data: np.ndarray,
    k: int,
    seed: int = 0,
    n_init: int = DEFAULT_N_INIT,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> KMeansResult:
    """Best-of-``n_init`` Lloyd runs from k-means++ starts (lowest wcss wins,
    first restart wins ties)."""
    data = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    distinct = len(np.unique(data, axis=0))
    if k > distinct:
        raise KTooLarge(f"k={k} exceeds {distinct} distinct rows")

    best: tuple | None = None
    winner = 0
    histories: list[list[float]] = []
    for restart in range(n_init):
        rng = make_rng(derive_seed(seed, "kmeans", restart))
        centroids = _kmeans_plus_plus(data, k, rng)
        assignments, centroids, wcss, iters, history = _lloyd(data, centroids, max_iter, tol)
        histories.append(history)
        if best is None or wcss < best[2]:
            best = (assignments, centroids, wcss, iters)
            winner = restart
    assignments, centroids, wcss, iters = best
    return KMeansResult(
        assignments=assignments,
        centroids=centroids,
        wcss=float(wcss),
        n_iterations=iters,
        winning_restart=winner,
        restart_histories=histories,
    )


# -- silhouette -----------------------------------------------------------------


def silhouette(data: np.ndarray, assignments: np.ndarray) -> float:
    """Mean of (b-a)/max(a,b); singleton-cluster points score 0."""
    data = np.asarray(data, dtype=np.float64)
    assignments = np.asarray(assignments)
    clusters = np.unique(assignments)
    if len(clusters) < 2:
        raise SingleCluster("silhouette needs at least two clusters")

    diff = data[:, None, :] - data[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    scores = []
    for i in range(len(data)):
        own = assignments[i]
        own_members = np.flatnonzero((assignments == own))
        if len(own_members) == 1:
            scores.append(0.0)
            continue
        a = dist[i, own_members[own_members != i]].mean()
        b = min(
            dist[i, assignments == other].mean()
            for other in clusters
            if other != own
        )
        denom = max(a, b)
        scores.append((b - a) / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


# -- normalized mutual information ------------------------------------------------


def nmi(labels_a, labels_b) -> float:
    """Mutual information normalized by the arithmetic mean of the entropies;
    0 when either labeling is constant."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if len(a) != len(b) or len(a) == 0:
        raise LengthMismatch("labelings must have equal nonzero length")
    n = len(a)
    _, a_idx = np.unique(a, return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    contingency = np.zeros((a_idx.max() + 1, b_idx.max() + 1))
    for i, j in zip(a_idx, b_idx):
        contingency[i, j] += 1.0
    pij = contingency / n
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)

    def entropy(p: np.ndarray) -> float:
        nz = p[p > 0]
        return -float((nz * np.log(nz)).sum())

    ha, hb = entropy(pi), entropy(pj)
    if ha == 0.0 or hb == 0.0:
        return 0.0
    mutual = 0.0
    for i in range(pij.shape[0]):
        for j in range(pij.shape[1]):
            if pij[i, j] > 0:
                mutual += pij[i, j] * math.log(pij[i, j] / (pi[i] * pj[j]))
    value = mutual / ((ha + hb) / 2.0)
    return min(max(value, 0.0), 1.0)


# -- PCA ---------------------------------------------------------------------------


@dataclass
class PcaModel:
    components: np.ndarray  # (p, p) rows are orthonormal components
    explained_variance_ratio: np.ndarray
    mean: np.ndarray  # raw-data column means
    standardization: Standardization
    constants: np.ndarray  # raw values of dropped constant columns

    def project(self, data: np.ndarray, n_components: int) -> np.ndarray:
        standardized = self.standardization.apply(np.asarray(data, dtype=np.float64))
        return standardized @ self.components[:n_components].T

    def reconstruct(self, reduced: np.ndarray) -> np.ndarray:
        standardized = np.asarray(reduced) @ self.components[: reduced.shape[1]]
        return self.standardization.invert(standardized, self.constants)


def pca(data: np.ndarray) -> PcaModel:
    """Eigendecomposition of the covariance of standardized data."""
    data = np.asarray(data, dtype=np.float64)
    if data.shape[0] < 2:
        raise EmptyData("PCA needs at least two rows")
    standardized, params = standardize(data)
    cov = standardized.T @ standardized / standardized.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(-eigvals, kind="stable")
    eigvals = np.clip(eigvals[order], 0.0, None)
    components = eigvecs[:, order].T
    # deterministic sign: largest-magnitude entry of each component positive
    for i in range(components.shape[0]):
        pivot = np.argmax(np.abs(components[i]))
        if components[i, pivot] < 0:
            components[i] = -components[i]
    constants = data.mean(axis=0)
    return PcaModel(
        components=components,
        explained_variance_ratio=eigvals / eigvals.sum(),
        mean=data.mean(axis=0),
        standardization=params,
        constants=constants,
    )


def project(model: PcaModel, data: np.ndarray, n_components: int) -> np.ndarray:
    return model.project(data, n_components)


# -- scan ---------------------------------------------------------------------------


@dataclass
class ClusterScanRow:
    k: int
    wcss: float
    silhouette: float
    nmi_vs_league: float | None
    with_pca: bool


@dataclass
class ClusterScan:
    rows: list[ClusterScanRow]


def elbow_scan(
    data: np.ndarray,
    k_range=DEFAULT_K_RANGE,
    seed: int = 0,
    with_pca: bool = False,
    n_components: int = 2,
    league_labels=None,
    n_init: int = DEFAULT_N_INIT,
) -> ClusterScan:
    """k-means across ``k_range`` on standardized (optionally PCA-projected)
    data, with silhouette and NMI-vs-league attached per k."""
    data = np.asarray(data, dtype=np.float64)
    if with_pca:
        model = pca(data)
        representation = model.project(data, n_components)
    else:
        representation, _ = standardize(data)
    rows = []
    for k in k_range:
        result = kmeans(representation, k, seed=derive_seed(seed, "scan", k), n_init=n_init)
        score = silhouette(representation, result.assignments)
        league_score = (
            nmi(result.assignments, league_labels) if league_labels is not None else None
        )
        rows.append(
            ClusterScanRow(
                k=k,
                wcss=result.wcss,
                silhouette=score,
                nmi_vs_league=league_score,
                with_pca=with_pca,
            )
        )
    return ClusterScan(rows=rows)
