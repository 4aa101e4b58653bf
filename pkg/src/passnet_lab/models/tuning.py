"""Seeded random-search hyperparameter tuning scored by cross-validation.

Binary tables are scored by mean fold AUC, ternary tables by mean fold
macro-F1. The search is deterministic per seed; score ties keep the
first-sampled candidate; candidates whose training fails are skipped
with a diagnostic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import PassnetLabError
from ..features import FeatureTable, TargetKind
from ..rng import derive_seed, make_rng
from . import ModelFamily, ModelSpec, predict_proba, train
from .evaluation import Averaging, evaluate
from .splits import stratified_kfold

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 50
DEFAULT_CV_FOLDS = 10


@dataclass
class TuneTrial:
    spec: ModelSpec
    score: float | None
    error: str | None = None


@dataclass
class TuneResult:
    best_spec: ModelSpec
    best_score: float
    trials: list[TuneTrial] = field(default_factory=list)


def sample_hyperparameters(family: ModelFamily, rng: np.random.Generator) -> dict:
    """One draw from the declared search grid for ``family``."""
    if family is ModelFamily.LOGISTIC_REGRESSION:
        return {"l2_strength": float(math.exp(rng.uniform(math.log(1e-4), math.log(1e2))))}
    if family is ModelFamily.RANDOM_FOREST:
        return {
            "n_trees": int(rng.integers(100, 501)),
            "max_depth": int(rng.integers(3, 21)),
            "min_leaf": 1,
            "features_per_split": None,
        }
    return {
        "n_rounds": int(rng.integers(50, 501)),
        "learning_rate": float(math.exp(rng.uniform(math.log(0.01), math.log(0.3)))),
        "max_depth": int(rng.integers(2, 9)),
        "min_leaf": 1,
    }


def cross_val_score(spec: ModelSpec, table: FeatureTable, k: int, seed: int) -> float:
    """Mean out-of-fold score under stratified k-fold CV."""
    folds = stratified_kfold(table, k=k, seed=derive_seed(seed, "cv"))
    n = table.n_rows
    scores = []
    for fold_idx in folds:
        mask = np.zeros(n, dtype=bool)
        mask[fold_idx] = True
        train_table = table.select(np.flatnonzero(~mask))
        test_table = table.select(np.flatnonzero(mask))
        model = train(spec, train_table)
        probs = predict_proba(model, test_table)
        if table.target_kind is TargetKind.BINARY:
            report = evaluate(probs, test_table.labels, Averaging.BINARY_POSITIVE,
                              classes=model.classes)
            scores.append(report.auc if report.auc is not None else 0.5)
        else:
            report = evaluate(probs, test_table.labels, Averaging.MACRO, classes=model.classes)
            scores.append(report.f1)
    return float(np.mean(scores))


def tune(
    family: ModelFamily,
    table: FeatureTable,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    cv_folds: int = DEFAULT_CV_FOLDS,
) -> TuneResult:
    if budget < 1:
        raise PassnetLabError("tuning budget must be >= 1")
    rng = make_rng(seed, "tune", family.value)
    trials: list[TuneTrial] = []
    best: TuneTrial | None = None
    for i in range(budget):
        spec = ModelSpec(
            family=family,
            hyperparameters=sample_hyperparameters(family, rng),
            seed=derive_seed(seed, "candidate", i),
        )
        try:
            score = cross_val_score(spec, table, k=cv_folds, seed=seed)
        except PassnetLabError as exc:
            logger.warning("tuning candidate %d skipped: %s", i, exc)
            trials.append(TuneTrial(spec=spec, score=None, error=str(exc)))
            continue
        trial = TuneTrial(spec=spec, score=score)
        trials.append(trial)
        if best is None or score > best.score:
            best = trial
    if best is None:
        raise PassnetLabError("every tuning candidate failed")
    return TuneResult(best_spec=best.spec, best_score=float(best.score), trials=trials)
