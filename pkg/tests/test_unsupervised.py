"""Standardization, k-means, silhouette, NMI, PCA, and the elbow scan."""

from __future__ import annotations

import numpy as np
import pytest

from passnet_lab.errors import EmptyData, KTooLarge, LengthMismatch, SingleCluster
from passnet_lab.unsupervised import (
    elbow_scan,
    kmeans,
    nmi,
    pca,
    project,
    silhouette,
    standardize,
)
from oracles import oracle_best_partition_wcss

FOUR_POINTS = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])


class TestStandardize:
    def test_hand_zscores(self):
        data = np.array([[1.0], [2.0], [3.0]])
        out, params = standardize(data)
        np.testing.assert_allclose(out[:, 0], [-1.2247448713915892, 0.0, 1.2247448713915892],
                                   atol=1e-9)
        assert out[:, 0].mean() == pytest.approx(0.0, abs=1e-12)
        assert out[:, 0].std() == pytest.approx(1.0, abs=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(50, 3))
        once, _ = standardize(data)
        twice, _ = standardize(once)
        np.testing.assert_allclose(once, twice, atol=1e-12)

    def test_constant_column_dropped_and_recorded(self):
        data = np.column_stack([np.arange(5.0), np.full(5, 3.0)])
        out, params = standardize(data)
        assert out.shape == (5, 1)
        assert params.dropped_columns == [1]

    def test_empty_rejected(self):
        with pytest.raises(EmptyData):
            standardize(np.zeros((0, 2)))


class TestKMeans:
    def test_two_far_pairs(self):
        result = kmeans(FOUR_POINTS, k=2, seed=1)
        assert result.assignments[0] == result.assignments[1]
        assert result.assignments[2] == result.assignments[3]
        assert result.assignments[0] != result.assignments[2]
        assert result.wcss == pytest.approx(1.0, abs=1e-12)
        assert result.wcss == pytest.approx(oracle_best_partition_wcss(FOUR_POINTS, 2), abs=1e-12)

    def test_k_equals_n_zero_wcss(self):
        result = kmeans(FOUR_POINTS, k=4, seed=0)
        assert result.wcss == pytest.approx(0.0, abs=1e-12)

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            kmeans(np.array([[1.0], [1.0], [2.0]]), k=3)

    def test_wcss_monotone_every_restart(self):
        rng = np.random.default_rng(8)
        data = rng.normal(size=(60, 4))
        result = kmeans(data, k=3, seed=5)
        for history in result.restart_histories:
            assert (np.diff(history) <= 1e-9).all()

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(40, 3))
        a = kmeans(data, k=3, seed=9)
        b = kmeans(data, k=3, seed=9)
        np.testing.assert_array_equal(a.assignments, b.assignments)
        assert a.wcss == b.wcss

    def test_empty_cluster_reseeded_at_farthest_point(self):
        from passnet_lab.unsupervised import _lloyd

        # second centroid starts so far away that it captures nothing
        data = np.array([[0.0], [1.0], [10.0]])
        centroids = np.array([[0.5], [1000.0]])
        assignments, final_centroids, wcss, _, history = _lloyd(data, centroids, 50, 1e-9)
        assert set(assignments.tolist()) == {0, 1}
        assert (np.diff(history) <= 1e-9).all()
        assert wcss == pytest.approx(0.5)  # clusters {0,1} and {10}

    def test_matches_exhaustive_optimum_usually(self):
        # restart quality: best-of-10 k-means++ hits the optimum on >= 90%
        # of small random instances
        rng = np.random.default_rng(3)
        hits = 0
        for trial in range(100):
            n = int(rng.integers(5, 9))
            k = int(rng.integers(2, 4))
            data = np.round(rng.normal(size=(n, 2)), 3)
            result = kmeans(data, k=k, seed=trial)
            optimum = oracle_best_partition_wcss(data, k)
            if result.wcss <= optimum + 1e-9:
                hits += 1
        assert hits >= 90


class TestSilhouette:
    def test_two_tight_far_pairs(self):
        result = kmeans(FOUR_POINTS, k=2, seed=0)
        assert silhouette(FOUR_POINTS, result.assignments) > 0.9

    def test_singletons_score_zero(self):
        data = np.array([[0.0], [5.0], [10.0]])
        assert silhouette(data, np.array([0, 1, 2])) == 0.0

    def test_single_cluster_rejected(self):
        with pytest.raises(SingleCluster):
            silhouette(FOUR_POINTS, np.zeros(4))

    def test_within_bounds(self):
        rng = np.random.default_rng(12)
        data = rng.normal(size=(30, 2))
        result = kmeans(data, k=4, seed=2)
        value = silhouette(data, result.assignments)
        assert -1.0 <= value <= 1.0


class TestNmi:
    def test_identical_labelings(self):
        assert nmi([0, 1, 0, 2, 1], [5, 9, 5, 7, 9]) == pytest.approx(1.0)

    def test_constant_labeling_zero(self):
        assert nmi([1, 1, 1, 1], [0, 1, 0, 1]) == 0.0
        assert nmi([0, 1, 0, 1], [2, 2, 2, 2]) == 0.0

    def test_independent_labelings_zero(self):
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        a = rng.integers(0, 3, 40)
        b = rng.integers(0, 4, 40)
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.integers(0, 3, 30)
            b = rng.integers(0, 3, 30)
            assert 0.0 <= nmi(a, b) <= 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            nmi([0, 1], [0, 1, 2])


class TestPca:
    def test_ratios_sum_to_one(self):
        rng = np.random.default_rng(6)
        model = pca(rng.normal(size=(40, 5)))
        assert model.explained_variance_ratio.sum() == pytest.approx(1.0, abs=1e-9)
        assert (np.diff(model.explained_variance_ratio) <= 1e-12).all()

    def test_perfectly_correlated_first_ratio_one(self):
        x = np.arange(20.0)
        model = pca(np.column_stack([x, 3.0 * x]))
        assert model.explained_variance_ratio[0] == pytest.approx(1.0, abs=1e-9)

    def test_components_orthonormal(self):
        rng = np.random.default_rng(7)
        model = pca(rng.normal(size=(30, 4)))
        gram = model.components @ model.components.T
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-9)

    def test_full_reconstruction(self):
        rng = np.random.default_rng(8)
        data = rng.normal(size=(25, 4)) * [1.0, 10.0, 0.1, 5.0]
        model = pca(data)
        reduced = model.project(data, 4)
        rebuilt = model.reconstruct(reduced)
        assert np.max(np.abs(rebuilt - data)) < 1e-8

    def test_reconstruction_with_constant_column(self):
        rng = np.random.default_rng(9)
        data = np.column_stack([rng.normal(size=20), np.full(20, 7.0), rng.normal(size=20)])
        model = pca(data)
        rebuilt = model.reconstruct(model.project(data, 2))
        assert np.max(np.abs(rebuilt - data)) < 1e-8

    def test_project_function_alias(self):
        rng = np.random.default_rng(10)
        data = rng.normal(size=(15, 3))
        model = pca(data)
        np.testing.assert_array_equal(project(model, data, 2), model.project(data, 2))


class TestElbowScan:
    def scan_data(self, seed=11):
        rng = np.random.default_rng(seed)
        blobs = [rng.normal(c, 0.4, size=(20, 3)) for c in ([0, 0, 0], [4, 4, 0], [0, 4, 4])]
        labels = np.repeat([0, 1, 2], 20)
        return np.vstack(blobs), labels

    def test_wcss_non_increasing_in_k(self):
        data, labels = self.scan_data()
        scan = elbow_scan(data, range(2, 8), seed=1, league_labels=labels, n_init=5)
        wcss = [row.wcss for row in scan.rows]
        assert all(b <= a + 1e-9 for a, b in zip(wcss, wcss[1:]))

    def test_k3_recovers_league_structure(self):
        data, labels = self.scan_data()
        scan = elbow_scan(data, range(2, 5), seed=2, league_labels=labels, n_init=5)
        by_k = {row.k: row for row in scan.rows}
        assert by_k[3].nmi_vs_league > 0.9
        assert by_k[3].silhouette > 0.5

    def test_pca_scan_same_structure(self):
        data, labels = self.scan_data()
        raw = elbow_scan(data, range(2, 5), seed=3, league_labels=labels, n_init=3)
        reduced = elbow_scan(data, range(2, 5), seed=3, with_pca=True, n_components=2,
                             league_labels=labels, n_init=3)
        assert [r.k for r in raw.rows] == [r.k for r in reduced.rows]
        assert all(r.with_pca for r in reduced.rows)
        assert not any(r.with_pca for r in raw.rows)

    def test_no_labels_gives_none_nmi(self):
        data, _ = self.scan_data()
        scan = elbow_scan(data, range(2, 4), seed=4, n_init=3)
        assert all(row.nmi_vs_league is None for row in scan.rows)
