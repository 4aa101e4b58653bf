"""Training, prediction, and serialization for the three model families."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import DegenerateData, FeatureMismatch, NonFiniteFeature
from ..features import FeatureTable
from .evaluation import Averaging, EvaluationReport, evaluate, roc_curve_points
from .linear import LogisticCore, fit_logistic
from .splits import stratified_kfold, stratified_split
from .trees import BoostCore, ForestCore, fit_boost, fit_forest

MODEL_FORMAT_VERSION = 1


class ModelFamily(str, Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    RANDOM_FOREST = "random_forest"
    GRADIENT_BOOSTING = "gradient_boosting"


@dataclass(frozen=True)
class ModelSpec:
    family: ModelFamily
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "hyperparameters": dict(sorted(self.hyperparameters.items())),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        return cls(
            family=ModelFamily(data["family"]),
            hyperparameters=dict(data["hyperparameters"]),
            seed=int(data["seed"]),
        )


DEFAULT_HYPERPARAMETERS = {
    ModelFamily.LOGISTIC_REGRESSION: {"l2_strength": 1.0},
    ModelFamily.RANDOM_FOREST: {
        "n_trees": 200,
        "max_depth": 10,
        "min_leaf": 2,
        "features_per_split": None,
    },
    ModelFamily.GRADIENT_BOOSTING: {
        "n_rounds": 150,
        "learning_rate": 0.1,
        "max_depth": 3,
        "min_leaf": 2,
    },
}


def default_spec(family: ModelFamily, seed: int = 0, **overrides) -> ModelSpec:
    params = dict(DEFAULT_HYPERPARAMETERS[family])
    params.update(overrides)
    return ModelSpec(family=family, hyperparameters=params, seed=seed)


@dataclass
class TrainedModel:
    spec: ModelSpec
    feature_names: list[str]
    classes: list[int]
    core: LogisticCore | ForestCore | BoostCore

    def to_dict(self) -> dict:
        kind = {
            LogisticCore: "logistic",
            ForestCore: "forest",
            BoostCore: "boost",
        }[type(self.core)]
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "feature_names": list(self.feature_names),
            "classes": list(self.classes),
            "core_kind": kind,
            "core": self.core.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedModel":
        if data.get("format_version") != MODEL_FORMAT_VERSION:
            raise FeatureMismatch(f"unsupported model format {data.get('format_version')}")
        core_cls = {"logistic": LogisticCore, "forest": ForestCore, "boost": BoostCore}[
            data["core_kind"]
        ]
        return cls(
            spec=ModelSpec.from_dict(data["spec"]),
            feature_names=list(data["feature_names"]),
            classes=[int(c) for c in data["classes"]],
            core=core_cls.from_dict(data["core"]),
        )


def train(spec: ModelSpec, table: FeatureTable) -> TrainedModel:
    """Fit ``spec`` on the whole table. Deterministic per (spec, table)."""
    X = table.matrix
    if not np.isfinite(X).all():
        raise NonFiniteFeature("feature matrix contains NaN or infinity")
    classes = sorted(int(c) for c in np.unique(table.labels))
    if len(classes) < 2:
        raise DegenerateData("constant label column")
    index_of = {c: i for i, c in enumerate(classes)}
    y_index = np.asarray([index_of[int(v)] for v in table.labels], dtype=np.int64)
    params = spec.hyperparameters

    if spec.family is ModelFamily.LOGISTIC_REGRESSION:
        core = fit_logistic(X, y_index, len(classes), float(params.get("l2_strength", 1.0)))
    elif spec.family is ModelFamily.RANDOM_FOREST:
        core = fit_forest(
            X,
            y_index,
            len(classes),
            n_trees=int(params.get("n_trees", 200)),
            max_depth=int(params.get("max_depth", 10)),
            min_leaf=int(params.get("min_leaf", 1)),
            features_per_split=params.get("features_per_split"),
            seed=spec.seed,
        )
    else:
        core = fit_boost(
            X,
            y_index,
            len(classes),
            n_rounds=int(params.get("n_rounds", 150)),
            learning_rate=float(params.get("learning_rate", 0.1)),
            max_depth=int(params.get("max_depth", 3)),
            min_leaf=int(params.get("min_leaf", 1)),
        )
    return TrainedModel(
        spec=spec,
        feature_names=list(table.feature_names),
        classes=classes,
        core=core,
    )


def predict_proba(model: TrainedModel, rows: FeatureTable | np.ndarray) -> np.ndarray:
    """Per-row class probability vectors, columns ordered like ``model.classes``."""
    if isinstance(rows, FeatureTable):
        if rows.feature_names != model.feature_names:
            raise FeatureMismatch("feature names do not match the trained model")
        X = rows.matrix
    else:
        X = np.asarray(rows, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(model.feature_names):
            raise FeatureMismatch(
                f"expected {len(model.feature_names)} features, got {X.shape}"
            )
    probs = model.core.predict_proba(X)
    return probs


__all__ = [
    "Averaging",
    "EvaluationReport",
    "ModelFamily",
    "ModelSpec",
    "TrainedModel",
    "default_spec",
    "evaluate",
    "predict_proba",
    "roc_curve_points",
    "stratified_kfold",
    "stratified_split",
    "train",
]
