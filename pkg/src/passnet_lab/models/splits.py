"""Stratified holdout and k-fold splitting."""

from __future__ import annotations

import numpy as np

from ..errors import TooFewRows
from ..features import FeatureTable
from ..rng import make_rng


def stratified_split(
    table: FeatureTable, test_fraction: float = 0.30, seed: int = 0
) -> tuple[FeatureTable, FeatureTable]:
    """Disjoint, exhaustive train/test split, per-class proportions within
    one row of exact stratification, deterministic per seed."""
    labels = table.labels
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2 or counts.min() < 2:
        raise TooFewRows("need at least two rows of each of two classes")

    n = len(labels)
    total_test = int(round(test_fraction * n))
    quotas = test_fraction * counts
    base = np.floor(quotas).astype(int)
    remainder = total_test - int(base.sum())
    if remainder > 0:
        fractional = quotas - base
        for c in np.argsort(-fractional, kind="stable")[:remainder]:
            base[c] += 1
    base = np.minimum(base, counts - 1)

    rng = make_rng(seed, "stratified_split")
    test_idx: list[int] = []
    for cls, take in zip(classes, base):
        members = np.flatnonzero(labels == cls)
        shuffled = members[rng.permutation(len(members))]
        test_idx.extend(int(i) for i in shuffled[:take])

    test_mask = np.zeros(n, dtype=bool)
    test_mask[test_idx] = True
    train = table.select(np.flatnonzero(~test_mask))
    test = table.select(np.flatnonzero(test_mask))
    return train, test


def stratified_kfold(table: FeatureTable, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """k disjoint folds of row indices; per-fold class counts within one of
    exact proportion. Folds partition the table."""
    labels = table.labels
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        raise TooFewRows(f"every class needs at least k={k} rows")

    rng = make_rng(seed, "stratified_kfold")
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in classes:
        members = np.flatnonzero(labels == cls)
        shuffled = members[rng.permutation(len(members))]
        for fold in range(k):
            folds[fold].extend(int(i) for i in shuffled[fold::k])
    return [np.array(sorted(fold), dtype=np.int64) for fold in folds]
