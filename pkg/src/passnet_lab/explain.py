"""Model explainability: permutation importance and Shapley attributions.

Shapley contributions target the class-1 (home win) probability, with
absent features marginalized by substituting values from background
rows. Exact mode enumerates all coalitions (feature count <= 12) and is
the oracle for the Monte-Carlo permutation estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    EmptyBackground,
    FeatureMismatch,
    InvalidRepeats,
    TooManyFeaturesForExact,
)
from .features import FeatureTable
from .models import TrainedModel, predict_proba
from .rng import derive_seed, make_rng

EXACT_FEATURE_LIMIT = 12


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, FeatureTable):
        return data.matrix
    return np.asarray(data, dtype=np.float64)


def _class1_fn(model) -> Callable[[np.ndarray], np.ndarray]:
    """Value function: model's class-1 probability, or the callable itself."""
    if isinstance(model, TrainedModel):
        column = model.classes.index(1)

        def fn(X: np.ndarray) -> np.ndarray:
            return predict_proba(model, X)[:, column]

        return fn
    if callable(model):
        return lambda X: np.asarray(model(X), dtype=np.float64)
    raise FeatureMismatch("model must be a TrainedModel or a callable")


# -- permutation importance ---------------------------------------------------------


@dataclass
class ImportanceReport:
    feature_names: list[str]
    mean_drops: np.ndarray
    std_drops: np.ndarray
    baseline_score: float
    ranking: list[int]  # feature indices, most important first

    def top(self, n: int | None = None) -> list[tuple[str, float, float, int]]:
        chosen = self.ranking if n is None else self.ranking[:n]
        return [
            (self.feature_names[f], float(self.mean_drops[f]), float(self.std_drops[f]), rank + 1)
            for rank, f in enumerate(chosen)
        ]


def accuracy_score(labels: np.ndarray, probabilities: np.ndarray, classes: list[int]) -> float:
    preds = np.asarray(classes)[np.argmax(probabilities, axis=1)]
    return float((preds == labels).mean())


def permutation_importance(
    model: TrainedModel,
    table: FeatureTable,
    repeats: int = 10,
    seed: int = 0,
    metric: Callable[[np.ndarray, np.ndarray, list[int]], float] = accuracy_score,
) -> ImportanceReport:
    """Mean metric drop over ``repeats`` within-column shuffles, per feature.

    ``table`` should be held-out data. Shuffle seeds derive from
    (seed, feature, repeat), so the report is deterministic and
    independent of evaluation order.
    """
    if repeats < 1:
        raise InvalidRepeats("repeats must be >= 1")
    if table.feature_names != model.feature_names:
        raise FeatureMismatch("importance table does not match the model's features")

    X = table.matrix
    labels = table.labels
    baseline = metric(labels, predict_proba(model, X), model.classes)

    n_features = X.shape[1]
    drops = np.zeros((n_features, repeats))
    for f in range(n_features):
        for r in range(repeats):
            rng = make_rng(derive_seed(seed, "perm", f, r))
            shuffled = X.copy()
            shuffled[:, f] = shuffled[rng.permutation(len(X)), f]
            score = metric(labels, predict_proba(model, shuffled), model.classes)
            drops[f, r] = baseline - score

    mean_drops = drops.mean(axis=1)
    std_drops = drops.std(axis=1)
    ranking = list(np.argsort(-mean_drops, kind="stable"))
    return ImportanceReport(
        feature_names=list(table.feature_names),
        mean_drops=mean_drops,
        std_drops=std_drops,
        baseline_score=baseline,
        ranking=[int(i) for i in ranking],
    )


# -- Shapley values --------------------------------------------------------------------


class ShapMode(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "montecarlo"


@dataclass
class ShapleyMatrix:
    values: np.ndarray  # (rows, features)
    base_value: float
    feature_names: list[str]
    row_values: np.ndarray  # the explained feature values
    row_ids: list[str]


def shapley_values(
    model,
    rows,
    background,
    mode: ShapMode = ShapMode.MONTE_CARLO,
    samples: int = 128,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> ShapleyMatrix:
    """Per-(row, feature) contributions to the class-1 probability.

    Exact mode averages marginal gains over every coalition with the
    exact Shapley weights; Monte-Carlo averages over ``samples`` random
    permutations with one background draw each (per-row seeds derive
    from the master seed and row index).
    """
    fn = _class1_fn(model)
    X = _as_matrix(rows)
    B = _as_matrix(background)
    if len(B) == 0:
        raise EmptyBackground("background must contain at least one row")
    n, p = X.shape
    if feature_names is None:
        if isinstance(rows, FeatureTable):
            feature_names = list(rows.feature_names)
        elif isinstance(model, TrainedModel):
            feature_names = list(model.feature_names)
        else:
            feature_names = [f"f{i}" for i in range(p)]
    row_ids = rows.match_ids if isinstance(rows, FeatureTable) else [f"row{i}" for i in range(n)]

    base_value = float(fn(B).mean())
    if mode is ShapMode.EXACT:
        if p > EXACT_FEATURE_LIMIT:
            raise TooManyFeaturesForExact(f"{p} features exceeds exact limit {EXACT_FEATURE_LIMIT}")
        values = _exact_shapley(fn, X, B)
    else:
        values = _monte_carlo_shapley(fn, X, B, samples, seed)
    return ShapleyMatrix(
        values=values,
        base_value=base_value,
        feature_names=feature_names,
        row_values=X.copy(),
        row_ids=list(row_ids),
    )


def _exact_shapley(fn, X: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, p = X.shape
    m = len(B)
    masks = np.arange(2**p)
    bits = ((masks[:, None] >> np.arange(p)) & 1).astype(bool)  # (2^p, p)
    sizes = bits.sum(axis=1)
    fact = [math.factorial(i) for i in range(p + 1)]
    weights = np.array([fact[s] * fact[p - 1 - s] / fact[p] for s in range(p)])

    values = np.zeros((n, p))
    for i in range(n):
        # evaluate v(S) for every coalition, marginalizing over the background
        points = np.where(bits[:, None, :], X[i][None, None, :], B[None, :, :])
        v = fn(points.reshape(-1, p)).reshape(2**p, m).mean(axis=1)
        for f in range(p):
            without = np.flatnonzero(~bits[:, f])
            gains = v[without + (1 << f)] - v[without]
            values[i, f] = float((weights[sizes[without]] * gains).sum())
    return values


def _monte_carlo_shapley(fn, X: np.ndarray, B: np.ndarray, samples: int, seed: int) -> np.ndarray:
    n, p = X.shape
    values = np.zeros((n, p))
    for i in range(n):
        rng = make_rng(derive_seed(seed, "shapley", i))
        perms = np.empty((samples, p), dtype=np.int64)
        points = np.empty((samples, p + 1, p))
        for s in range(samples):
            perm = rng.permutation(p)
            perms[s] = perm
            current = B[int(rng.integers(len(B)))].copy()
            points[s, 0] = current
            for j, f in enumerate(perm):
                current = current.copy()
                current[f] = X[i, f]
                points[s, j + 1] = current
        evals = fn(points.reshape(-1, p)).reshape(samples, p + 1)
        gains = np.diff(evals, axis=1)  # (samples, p); column j is step j of the walk
        for s in range(samples):
            values[i, perms[s]] += gains[s]
        values[i] /= samples
    return values


# -- summary ---------------------------------------------------------------------------


@dataclass
class ShapSummary:
    feature_names: list[str]
    mean_abs: np.ndarray
    ranking: list[int]
    base_value: float

    def top(self, n: int | None = None) -> list[tuple[str, float, int]]:
        chosen = self.ranking if n is None else self.ranking[:n]
        return [
            (self.feature_names[f], float(self.mean_abs[f]), rank + 1)
            for rank, f in enumerate(chosen)
        ]


def shap_summary(matrix: ShapleyMatrix) -> ShapSummary:
    """Ranking by mean absolute contribution (ties keep feature order)."""
    mean_abs = np.abs(matrix.values).mean(axis=0)
    ranking = [int(i) for i in np.argsort(-mean_abs, kind="stable")]
    return ShapSummary(
        feature_names=list(matrix.feature_names),
        mean_abs=mean_abs,
        ranking=ranking,
        base_value=matrix.base_value,
    )


def beeswarm_rows(matrix: ShapleyMatrix) -> list[tuple[str, str, float, float]]:
    """(row_id, feature, feature value, contribution) triples for plotting."""
    rows = []
    for i, row_id in enumerate(matrix.row_ids):
        for f, name in enumerate(matrix.feature_names):
            rows.append((row_id, name, float(matrix.row_values[i, f]), float(matrix.values[i, f])))
    return rows
