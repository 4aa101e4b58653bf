"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a single ``ACCEPTANCE <criterion>: PASS`` line when it
passes (visible with ``pytest -s`` or in captured output). Criteria that
require the real public dataset are skipped with an explicit reason and
replaced by the property suites, which must all pass.
"""

from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np
import pytest

from passnet_lab.cli import main as cli_main
from passnet_lab.features import TargetKind
from passnet_lab.ingest import Competition, filter_outcomes, load_matches, matches_to_csv
from passnet_lab.ioutil import sha256_file
from passnet_lab.models import (
    Averaging,
    ModelFamily,
    default_spec,
    evaluate,
    predict_proba,
    stratified_split,
    train,
)
from passnet_lab.models.evaluation import roc_curve_points
from passnet_lab.netmetrics import (
    average_shortest_path_value,
    betweenness_values,
    closeness_values,
    clustering_values,
    eigenvector_values,
)
from passnet_lab.explain import ShapMode, permutation_importance, shapley_values
from passnet_lab.league import Provenance, simulate_league, standings_from_outcomes
from passnet_lab.synthetic import (
    generate_corpus,
    make_informative_noise,
    make_separable,
    make_xor,
)
from passnet_lab.unsupervised import kmeans, nmi, pca, silhouette
from oracles import (
    adj_from_edges,
    oracle_avg_shortest_path,
    oracle_best_partition_wcss,
    oracle_betweenness,
    oracle_closeness,
    oracle_clustering,
    oracle_pair_auc,
    random_graph,
)

REAL_DATASET_ENV = "PASSNET_LAB_DATASET_DIR"

real_dataset_missing = pytest.mark.skipif(
    REAL_DATASET_ENV not in os.environ,
    reason=(
        f"public dataset not available (set {REAL_DATASET_ENV} to a directory with canonical "
        "events.csv/matches.csv); replaced by the property suites per the acceptance contract"
    ),
)


@pytest.fixture(scope="module")
def real_tables():
    """Feature tables built once from the real corpus (env-gated)."""
    from passnet_lab.features import Granularity, TableMode, build_table
    from passnet_lab.netmetrics import aggregate, metrics_columns, metrics_row
    from passnet_lab.passnet import build_all_networks
    from passnet_lab.features import compute_match_stats, stats_feature_dict
    from passnet_lab.ingest import parse_event_log

    base = Path(os.environ[REAL_DATASET_ENV])
    events = parse_event_log((base / "events.csv").read_bytes())
    matches = load_matches((base / "matches.csv").read_bytes()).matches

    networks = build_all_networks(events, matches)
    columns = metrics_columns()
    metrics_store = {}
    for net in networks:
        row = metrics_row(aggregate(net))
        metrics_store[(net.match_id, net.team_id, net.segment.value)] = dict(zip(columns, row))
    by_match: dict[str, list] = {}
    for ev in events:
        by_match.setdefault(ev.match_id, []).append(ev)
    stats_store = {}
    for m in matches:
        for team in (m.home_team_id, m.away_team_id):
            stats_store[(m.match_id, team)] = stats_feature_dict(
                compute_match_stats(by_match.get(m.match_id, []), m, team)
            )

    def build(mode: TableMode, granularity: Granularity, target: TargetKind):
        return build_table(matches, metrics_store, stats_store, mode,
                           granularity=granularity, target_kind=target)

    return build, matches


def _rf_report(table, seed: int, averaging: Averaging):
    from passnet_lab.models.tuning import tune

    train_t, test_t = stratified_split(table, 0.30, seed=seed)
    result = tune(ModelFamily.RANDOM_FOREST, train_t, budget=10, seed=seed, cv_folds=10)
    model = train(result.best_spec, train_t)
    return evaluate(predict_proba(model, test_t), test_t.labels, averaging,
                    classes=model.classes)


def passed(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


class TestCriterion01GraphMetricOracles:
    def test_graph_metric_oracle_suite(self):
        start = time.monotonic()
        named = [
            adj_from_edges(11, [(0, 1), (1, 2), (2, 3)]),                      # path
            adj_from_edges(11, [(0, 1), (0, 2), (0, 3), (0, 4)]),              # star
            adj_from_edges(11, [(0, 1), (1, 2), (2, 0)]),                      # triangle
            adj_from_edges(7, [(u, v) for u in range(7) for v in range(u + 1, 7)]),  # complete
        ]
        rng = np.random.default_rng(1234)
        graphs = list(named)
        for _ in range(200):
            n = int(rng.integers(2, 8))
            graphs.append(random_graph(rng, n, float(rng.uniform(0.05, 0.95))))

        for adj in graphs:
            np.testing.assert_allclose(closeness_values(adj), oracle_closeness(adj), atol=1e-9)
            np.testing.assert_allclose(betweenness_values(adj), oracle_betweenness(adj), atol=1e-9)
            np.testing.assert_allclose(clustering_values(adj), oracle_clustering(adj), atol=1e-9)
            ours = average_shortest_path_value(adj)
            expected = oracle_avg_shortest_path(adj)
            if expected is None:
                assert ours is None
            else:
                assert abs(ours - expected) < 1e-9
            vector = eigenvector_values(adj)
            if vector.sum() > 0:
                lam = float(vector @ (adj @ vector))
                assert np.max(np.abs(adj @ vector - lam * vector)) < 1e-8

        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"oracle suite took {elapsed:.1f}s"
        passed("graph-metric oracle suite")


class TestCriterion02DrawFiltering:
    def test_draw_filtering_on_bundled_synthetic_corpus(self):
        corpus = generate_corpus(
            seed=20, leagues={Competition.LA_LIGA: 10}, max_matches_per_league=40
        )
        result = load_matches(matches_to_csv(corpus.matches))
        assert len(result.matches) == 40
        kept = filter_outcomes(result.matches, include_draws=False)
        draws = [m for m in result.matches if m.is_draw]
        # frozen counts for this corpus seed
        assert len(draws) == 7
        assert len(kept) == 33
        assert len(kept) + len(draws) == 40
        with_draws = filter_outcomes(result.matches, include_draws=True)
        assert with_draws == result.matches
        passed("draw filtering (synthetic corpus, 40 -> 33 non-draws)")

    @real_dataset_missing
    def test_draw_filtering_on_real_dataset(self):
        base = Path(os.environ[REAL_DATASET_ENV])
        result = load_matches((base / "matches.csv").read_bytes())
        assert len(result.matches) == 1941
        assert len(filter_outcomes(result.matches, include_draws=False)) == 1470
        passed("draw filtering (real dataset, 1941 -> 1470)")


class TestCriterion03ClassifierSanity:
    def test_classifier_sanity(self):
        start = time.monotonic()
        separable = make_separable(n=200, seed=41)
        train_t, test_t = stratified_split(separable, 0.30, seed=1)
        lr = train(default_spec(ModelFamily.LOGISTIC_REGRESSION, seed=1), train_t)
        lr_acc = float(
            (predict_proba(lr, test_t).argmax(axis=1) == test_t.labels).mean()
        )
        assert lr_acc >= 0.99

        xor = make_xor(n=500, seed=42)
        xor_train, xor_test = stratified_split(xor, 0.30, seed=2)

        def accuracy(model) -> float:
            preds = predict_proba(model, xor_test).argmax(axis=1)
            return float((preds == xor_test.labels).mean())

        rf = train(default_spec(ModelFamily.RANDOM_FOREST, seed=3, n_trees=100, max_depth=10), xor_train)
        gb = train(default_spec(ModelFamily.GRADIENT_BOOSTING, seed=4, n_rounds=100,
                                learning_rate=0.2, max_depth=4), xor_train)
        lr_xor = train(default_spec(ModelFamily.LOGISTIC_REGRESSION, seed=5), xor_train)
        rf_acc, gb_acc, lr_xor_acc = accuracy(rf), accuracy(gb), accuracy(lr_xor)
        assert rf_acc >= 0.90, f"forest accuracy {rf_acc}"
        assert gb_acc >= 0.90, f"boosting accuracy {gb_acc}"
        assert lr_xor_acc <= 0.65, f"linear model should fail XOR, got {lr_xor_acc}"

        elapsed = time.monotonic() - start
        assert elapsed < 60.0, f"classifier sanity took {elapsed:.1f}s"
        passed(
            f"classifier sanity (LR {lr_acc:.3f} separable; "
            f"RF {rf_acc:.3f} / GB {gb_acc:.3f} / LR {lr_xor_acc:.3f} on XOR)"
        )


class TestCriterion04AucCorrectness:
    def test_auc_correctness(self):
        labels = np.array([0, 0, 1, 1])
        scores = np.array([0.1, 0.4, 0.35, 0.8])
        _, _, auc = roc_curve_points(labels, scores)
        assert auc == 0.75

        rng = np.random.default_rng(99)
        for _ in range(100):
            n = int(rng.integers(4, 60))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            scores = np.round(rng.random(n), 2)
            _, _, sweep = roc_curve_points(labels, scores)
            assert abs(sweep - oracle_pair_auc(labels, scores)) < 1e-12
        passed("AUC correctness (sweep == pair counting, canonical 0.75)")


class TestCriterion05PaperNumberReproduction:
    @real_dataset_missing
    def test_reported_value_bands_on_real_dataset(self, real_tables):
        # bands, not point values: splits and hyperparameters are undisclosed
        from passnet_lab.features import Granularity, TableMode

        build, _ = real_tables
        mixed = _rf_report(build(TableMode.MIXED, Granularity.HALVES, TargetKind.BINARY),
                           seed=1, averaging=Averaging.BINARY_POSITIVE)
        assert 0.65 <= mixed.accuracy <= 0.78
        assert 0.70 <= mixed.auc <= 0.82
        for mode in (TableMode.NETS, TableMode.STATS):
            solo = _rf_report(build(mode, Granularity.HALVES, TargetKind.BINARY),
                              seed=2, averaging=Averaging.BINARY_POSITIVE)
            assert 0.60 <= solo.accuracy <= 0.75

        ternary_table = build(TableMode.MIXED, Granularity.HALVES, TargetKind.TERNARY)
        ternary = _rf_report(ternary_table, seed=3, averaging=Averaging.MACRO)
        assert 0.48 <= ternary.accuracy <= 0.62
        for family in ModelFamily:
            train_t, test_t = stratified_split(ternary_table, 0.30, seed=4)
            model = train(default_spec(family, seed=4), train_t)
            report = evaluate(predict_proba(model, test_t), test_t.labels,
                              Averaging.MACRO, classes=model.classes)
            assert report.accuracy > 1 / 3
        passed("reported-value bands on the real dataset")

    def test_replacement_property_suites_active(self):
        if REAL_DATASET_ENV in os.environ:
            pytest.skip("real dataset present; band test runs instead")
        # with the dataset absent, criteria 1, 3, 4, 6-9 stand in; they run
        # in this module, so here we only record the substitution.
        passed("reported-value bands replaced by property suites (dataset absent)")


CONFIG_TEMPLATE = """\
events_path = data/events.csv
matches_path = data/matches.csv
output_dir = out
seed = 23
window = 3
min_history = 2
granularity = {granularity}
mode = mixed
target_kind = binary
model_family = random_forest
tune_budget = 1
cv_folds = 2
top_n = 5
importance_repeats = 2
shap_samples = 8
shap_rows = 2
shap_background = 8
correlate_league = LaLiga
synth_teams = 6
synth_leagues = LaLiga,PremierLeague
"""

PIPELINE_STAGES = [
    "synth", "ingest", "build-nets", "metrics", "features", "train",
    "evaluate", "cluster", "importance", "simulate", "correlate", "report",
]


def run_pipeline(workdir: Path, granularity: str) -> None:
    (workdir / "pipeline.cfg").write_text(CONFIG_TEMPLATE.format(granularity=granularity))
    for stage in PIPELINE_STAGES:
        code = cli_main([stage, "--config", str(workdir / "pipeline.cfg")])
        assert code == 0, f"stage {stage} exited {code}"


class TestCriterion06HalvesVersusFull:
    def test_both_granularities_run_structurally(self, tmp_path):
        full = tmp_path / "full"
        halves = tmp_path / "halves"
        full.mkdir()
        halves.mkdir()
        run_pipeline(full, "full")
        run_pipeline(halves, "halves")
        for d in (full, halves):
            assert (d / "out" / "report.csv").exists()
        passed("halves vs full granularity (synthetic structural run)")

    @real_dataset_missing
    def test_halves_auc_at_least_full_minus_margin(self, real_tables):
        from passnet_lab.features import Granularity, TableMode

        build, _ = real_tables
        halves = _rf_report(build(TableMode.NETS, Granularity.HALVES, TargetKind.BINARY),
                            seed=6, averaging=Averaging.BINARY_POSITIVE)
        full = _rf_report(build(TableMode.NETS, Granularity.FULL_GAME, TargetKind.BINARY),
                          seed=6, averaging=Averaging.BINARY_POSITIVE)
        assert halves.auc >= full.auc - 0.02
        passed(f"halves AUC {halves.auc:.3f} vs full {full.auc:.3f} (margin 0.02)")


class TestCriterion07UnsupervisedSuite:
    def test_unsupervised_suite(self):
        start = time.monotonic()
        rng = np.random.default_rng(55)

        data = rng.normal(size=(80, 5))
        result = kmeans(data, k=4, seed=3)
        for history in result.restart_histories:
            assert (np.diff(history) <= 1e-9).all(), "wcss must not increase within Lloyd"

        value = silhouette(data, result.assignments)
        assert -1.0 <= value <= 1.0

        labels = rng.integers(0, 3, 60)
        assert nmi(labels, labels) == pytest.approx(1.0)
        assert nmi(np.zeros(60), labels) == 0.0

        spread = rng.normal(size=(40, 6)) * [1, 5, 0.2, 3, 9, 1]
        model = pca(spread)
        assert model.explained_variance_ratio.sum() == pytest.approx(1.0, abs=1e-9)
        rebuilt = model.reconstruct(model.project(spread, 6))
        assert np.max(np.abs(rebuilt - spread)) < 1e-8

        four = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
        fit = kmeans(four, k=2, seed=1)
        assert fit.wcss == pytest.approx(oracle_best_partition_wcss(four, 2), abs=1e-12)
        assert fit.assignments[0] == fit.assignments[1] != fit.assignments[2]

        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"unsupervised suite took {elapsed:.1f}s"
        passed("unsupervised suite (Lloyd monotone, bounds, PCA, 4-point optimum)")


class TestCriterion08ExplainabilitySuite:
    def test_explainability_suite(self):
        start = time.monotonic()
        rng = np.random.default_rng(77)

        # 8-feature fixture with a trained forest; feature 7 is never informative
        X = rng.normal(size=(400, 8))
        y = ((X[:, 0] + 0.8 * X[:, 1] * X[:, 2]) > 0).astype(np.int64)
        from test_models_trees import table_from

        table = table_from(X, y)
        model = train(default_spec(ModelFamily.RANDOM_FOREST, seed=5, n_trees=30, max_depth=5), table)
        rows = table.select(range(3))
        background = table.select(range(100, 108))

        exact = shapley_values(model, rows, background, mode=ShapMode.EXACT)
        fn_rows = predict_proba(model, rows)[:, 1]
        for i in range(rows.n_rows):
            total = exact.base_value + exact.values[i].sum()
            assert abs(total - fn_rows[i]) < 1e-6, "exact Shapley local accuracy"

        def ignores_last(Z):
            return Z[:, 0] + Z[:, 1] ** 2

        dummy = shapley_values(ignores_last, rng.normal(size=(4, 6)), rng.normal(size=(8, 6)),
                               mode=ShapMode.EXACT)
        assert np.max(np.abs(dummy.values[:, 5])) < 1e-9, "dummy feature must get zero"

        estimate = shapley_values(model, rows, background, mode=ShapMode.MONTE_CARLO,
                                  samples=2048, seed=3)
        deviation = float(np.max(np.abs(estimate.values - exact.values)))
        assert deviation < 0.05, f"Monte-Carlo deviated {deviation:.3f}"

        synth, informative = make_informative_noise(n=1000, n_noise=4, seed=8)
        fit_table = synth.select(range(600))
        holdout = synth.select(range(600, 1000))
        forest = train(default_spec(ModelFamily.RANDOM_FOREST, seed=9, n_trees=40, max_depth=6),
                       fit_table)
        report = permutation_importance(forest, holdout, repeats=10, seed=4)
        assert report.mean_drops[informative] > 0.3
        noise = [abs(report.mean_drops[i]) for i in range(5) if i != informative]
        assert max(noise) < 0.02

        elapsed = time.monotonic() - start
        assert elapsed < 120.0, f"explainability suite took {elapsed:.1f}s"
        passed(f"explainability suite (MC deviation {deviation:.3f}, importance separation)")


class TestCriterion09SimulationSuite:
    def test_simulation_suite(self):
        from test_league import league_results, synthetic_two_league_table
        from passnet_lab.ingest import Outcome

        # point conservation on every simulated match
        for outcome in (Outcome.HOME_WIN, Outcome.HOME_LOSS, Outcome.DRAW):
            results = league_results({"a:b": outcome})
            table = standings_from_outcomes(Competition.LA_LIGA, results, Provenance.SIMULATED)
            total = sum(r.points for r in table.rows)
            assert total == (2 if outcome is Outcome.DRAW else 3)

        # identity oracle: true outcomes reproduce the real table exactly
        features, matches = synthetic_two_league_table(seed=6)
        truth = {m.match_id: m.outcome() for m in matches}
        identity = simulate_league(Competition.LA_LIGA, features, matches,
                                   predicted_outcomes=truth)
        assert identity.comparison.exact_hits == len(identity.real.rows)
        assert identity.comparison.champion_correct

        # model-driven run reports well-formed counts
        model_run = simulate_league(
            Competition.LA_LIGA, features, matches,
            family=ModelFamily.RANDOM_FOREST,
            spec=default_spec(ModelFamily.RANDOM_FOREST, seed=2, n_trees=30, max_depth=6),
        )
        cmp = model_run.comparison
        assert 0 <= cmp.exact_hits <= cmp.within_two <= len(model_run.simulated.rows)
        passed("simulation suite (point conservation, identity oracle, counts)")

    @real_dataset_missing
    def test_reference_counts_on_real_dataset(self, real_tables):
        # soft targets: exact hits within +-3 of the reference counts
        # (France 5, England 3); champion correct for at least one of
        # England, Germany, France
        from passnet_lab.features import Granularity, TableMode

        build, matches = real_tables
        table = build(TableMode.MIXED, Granularity.HALVES, TargetKind.TERNARY)
        references = {Competition.LIGUE_1: 5, Competition.PREMIER_LEAGUE: 3}
        champions = []
        for league in (Competition.PREMIER_LEAGUE, Competition.BUNDESLIGA, Competition.LIGUE_1):
            result = simulate_league(league, table, matches,
                                     family=ModelFamily.RANDOM_FOREST, seed=7)
            champions.append(result.comparison.champion_correct)
            if league in references:
                assert abs(result.comparison.exact_hits - references[league]) <= 3
        assert any(champions)
        passed("simulation reference counts on the real dataset")


class TestCriterion10Determinism:
    def test_end_to_end_byte_identical(self, tmp_path):
        runs = []
        for name in ("one", "two"):
            workdir = tmp_path / name
            workdir.mkdir()
            run_pipeline(workdir, "full")
            tree = {
                p.relative_to(workdir / "out").as_posix(): sha256_file(p)
                for p in sorted((workdir / "out").rglob("*"))
                if p.is_file()
            }
            runs.append(tree)
        assert runs[0] == runs[1], "artifact trees differ between identical runs"
        passed(f"end-to-end determinism ({len(runs[0])} artifacts byte-identical)")
