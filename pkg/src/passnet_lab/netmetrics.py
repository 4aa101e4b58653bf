"""Network metrics for passing networks.

All centrality, clustering, and path measures run on the simple
undirected unweighted projection of the pass-count matrix: an edge
{u, v} exists iff any pass was completed between u and v in either
direction. Conventions for disconnected graphs (real half-networks
contain isolated players):

- degree centrality: distinct-neighbor degree / (n-1)
- closeness: component-local closeness scaled by (|C|-1)/(n-1); 0 for isolates
- betweenness: unnormalized sum over unordered pairs, endpoints excluded
- eigenvector: principal eigenvector of the largest component (zeros
  elsewhere), L2-normalized; all-zero networks yield a zero vector
- average shortest path: mean over connected ordered pairs, or undefined
- aggregates: min/max/mean/std (population) over all 11 slots
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NoPositions
from .passnet import PassingNetwork

logger = logging.getLogger(__name__)

EIGENVECTOR_TOL = 1e-10
EIGENVECTOR_MAX_ITER = 10_000


class MetricName(str, Enum):
    DEGREE = "degree"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"
    EIGENVECTOR = "eigenvector"
    CLUSTERING = "clustering"


NODE_METRICS = tuple(MetricName)
AGGREGATE_NAMES = ("min", "max", "mean", "std")


@dataclass(frozen=True)
class NodeMetricVector:
    metric: MetricName
    values: np.ndarray


@dataclass(frozen=True)
class NetworkMetrics:
    """Fixed-width metric record for one network."""

    aggregates: dict[MetricName, tuple[float, float, float, float]]  # min, max, mean, std
    avg_shortest_path: float | None
    centroid: tuple[float, float, float, float] | None  # mean_x, mean_y, std_x, std_y


def undirected_projection(weights: np.ndarray) -> np.ndarray:
    """0/1 symmetric adjacency: edge iff passes in either direction."""
    adj = ((weights + weights.T) > 0).astype(np.int64)
    np.fill_diagonal(adj, 0)
    return adj


def _neighbors(adj: np.ndarray) -> list[np.ndarray]:
    return [np.flatnonzero(adj[v]) for v in range(adj.shape[0])]


def bfs_distances(adj: np.ndarray, source: int) -> np.ndarray:
    """Hop distances from ``source``; -1 marks unreachable nodes."""
    n = adj.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    neigh = adj.astype(bool)
    while queue:
        v = queue.popleft()
        for u in np.flatnonzero(neigh[v]):
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def connected_components(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    components = []
    for start in range(n):
        if seen[start]:
            continue
        dist = bfs_distances(adj, start)
        members = [int(v) for v in np.flatnonzero(dist >= 0)]
        for v in members:
            seen[v] = True
        components.append(members)
    return components


# -- node-level metrics ------------------------------------------------------


def degree_centrality_values(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    return adj.sum(axis=1) / (n - 1)


def closeness_values(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    values = np.zeros(n)
    for v in range(n):
        dist = bfs_distances(adj, v)
        reachable = dist > 0
        size = int(reachable.sum()) + 1  # component size including v
        if size <= 1:
            continue
        total = float(dist[reachable].sum())
        values[v] = ((size - 1) / total) * ((size - 1) / (n - 1))
    return values


def betweenness_values(adj: np.ndarray) -> np.ndarray:
    """Brandes accumulation, halved to count unordered pairs once."""
    n = adj.shape[0]
    neigh = _neighbors(adj)
    centrality = np.zeros(n)
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in neigh[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w])
            if w != s:
                centrality[w] += delta[w]
    return centrality / 2.0


def eigenvector_values(adj: np.ndarray) -> np.ndarray:
    """Power iteration on the largest component, shifted by I so bipartite
    graphs (stars, paths) converge; zeros outside the component."""
    n = adj.shape[0]
    components = sorted(connected_components(adj), key=lambda c: (-len(c), c[0]))
    largest = components[0]
    if len(largest) < 2:
        logger.warning("eigenvector centrality on an edgeless network; returning zeros")
        return np.zeros(n)
    idx = np.array(largest)
    sub = adj[np.ix_(idx, idx)].astype(float)
    shifted = sub + np.eye(len(idx))
    x = np.ones(len(idx)) / np.sqrt(len(idx))
    for _ in range(EIGENVECTOR_MAX_ITER):
        nxt = shifted @ x
        nxt = nxt / np.linalg.norm(nxt)
        if np.max(np.abs(nxt - x)) < EIGENVECTOR_TOL:
            x = nxt
            break
        x = nxt
    values = np.zeros(n)
    values[idx] = np.abs(x)
    return values


def clustering_values(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    values = np.zeros(n)
    for v in range(n):
        neigh = np.flatnonzero(adj[v])
        d = len(neigh)
        if d < 2:
            continue
        triangles = adj[np.ix_(neigh, neigh)].sum() / 2.0
        values[v] = 2.0 * triangles / (d * (d - 1))
    return values


def average_shortest_path_value(adj: np.ndarray) -> float | None:
    """Mean distance over connected ordered pairs; None when no pair connects."""
    n = adj.shape[0]
    total = 0
    pairs = 0
    for v in range(n):
        dist = bfs_distances(adj, v)
        reachable = dist > 0
        total += int(dist[reachable].sum())
        pairs += int(reachable.sum())
    if pairs == 0:
        return None
    return total / pairs


def network_centroid(net: PassingNetwork) -> tuple[float, float, float, float]:
    """Mean and population std of present node positions, per axis."""
    present = [p for p in net.positions if p is not None]
    if not present:
        raise NoPositions(f"match {net.match_id} team {net.team_id}: no node positions")
    arr = np.asarray(present)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)
    return float(mean[0]), float(mean[1]), float(std[0]), float(std[1])


# -- PassingNetwork-facing API ----------------------------------------------


_NODE_METRIC_FUNCS = {
    MetricName.DEGREE: degree_centrality_values,
    MetricName.CLOSENESS: closeness_values,
    MetricName.BETWEENNESS: betweenness_values,
    MetricName.EIGENVECTOR: eigenvector_values,
    MetricName.CLUSTERING: clustering_values,
}


def node_metric(net: PassingNetwork, metric: MetricName) -> NodeMetricVector:
    adj = undirected_projection(net.weights)
    return NodeMetricVector(metric=metric, values=_NODE_METRIC_FUNCS[metric](adj))


def degree_centrality(net: PassingNetwork) -> NodeMetricVector:
    return node_metric(net, MetricName.DEGREE)


def closeness_centrality(net: PassingNetwork) -> NodeMetricVector:
    return node_metric(net, MetricName.CLOSENESS)


def betweenness_centrality(net: PassingNetwork) -> NodeMetricVector:
    return node_metric(net, MetricName.BETWEENNESS)


def eigenvector_centrality(net: PassingNetwork) -> NodeMetricVector:
    return node_metric(net, MetricName.EIGENVECTOR)


def clustering_coefficient(net: PassingNetwork) -> NodeMetricVector:
    return node_metric(net, MetricName.CLUSTERING)


def average_shortest_path(net: PassingNetwork) -> float | None:
    return average_shortest_path_value(undirected_projection(net.weights))


def aggregate(net: PassingNetwork) -> NetworkMetrics:
    """Min/max/mean/std over slots for each node metric, plus path length
    and centroid. Missing values (undefined path, no positions) are None."""
    adj = undirected_projection(net.weights)
    aggregates = {}
    for metric in NODE_METRICS:
        values = _NODE_METRIC_FUNCS[metric](adj)
        aggregates[metric] = (
            float(values.min()),
            float(values.max()),
            float(values.mean()),
            float(values.std()),
        )
    try:
        centroid = network_centroid(net)
    except NoPositions:
        centroid = None
    return NetworkMetrics(
        aggregates=aggregates,
        avg_shortest_path=average_shortest_path_value(adj),
        centroid=centroid,
    )


# -- CSV layout ---------------------------------------------------------------

NETWORK_LEVEL_COLUMNS = (
    "avg_shortest_path",
    "centroid_mean_x",
    "centroid_mean_y",
    "centroid_std_x",
    "centroid_std_y",
)


def metrics_columns() -> list[str]:
    cols = [f"{agg}_{metric.value}" for metric in NODE_METRICS for agg in AGGREGATE_NAMES]
    cols.extend(NETWORK_LEVEL_COLUMNS)
    return cols


def metrics_row(metrics: NetworkMetrics) -> list[float | None]:
    row: list[float | None] = []
    for metric in NODE_METRICS:
        row.extend(metrics.aggregates[metric])
    row.append(metrics.avg_shortest_path)
    if metrics.centroid is None:
        row.extend([None, None, None, None])
    else:
        row.extend(metrics.centroid)
    return row
