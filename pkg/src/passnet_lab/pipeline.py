"""Deterministic, resumable pipeline stages.

Every artifact gets a ``<name>.meta.json`` sidecar carrying the stage
name, seed, full config echo, config hash, and input content hashes.
A stage whose outputs exist with matching sidecars is a no-op. Sidecars
contain no timestamps or absolute paths, so identical configs and
inputs produce byte-identical artifact trees.
"""

from __future__ import annotations

import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from . import netmetrics
from .config import PipelineConfig
from .errors import ConfigError, DataError, MissingArtifact, UnknownLeague
from .explain import beeswarm_rows, permutation_importance, shap_summary, shapley_values
from .features import (
    FeatureTable,
    Granularity,
    TableMode,
    TargetKind,
    build_table,
    compute_match_stats,
    stats_feature_dict,
)
from .ingest import (
    MatchRecord,
    events_to_csv,
    filter_outcomes,
    load_matches,
    matches_to_csv,
    parse_event_log,
)
from .ioutil import (
    json_text,
    read_csv,
    read_json,
    sha256_bytes,
    sha256_file,
    write_csv,
    write_json,
)
from .league import (
    Provenance,
    aggregate_team_means,
    metric_rank_correlations,
    simulate_league,
    standings_from_outcomes,
)
from .models import (
    Averaging,
    TrainedModel,
    evaluate,
    predict_proba,
    stratified_split,
    train,
)
from .models.tuning import tune
from .passnet import build_all_networks, PassingNetwork
from .synthetic import generate_corpus
from .unsupervised import elbow_scan, pca

logger = logging.getLogger(__name__)

STAGES = (
    "ingest",
    "build-nets",
    "metrics",
    "features",
    "train",
    "evaluate",
    "cluster",
    "importance",
    "simulate",
    "correlate",
    "report",
)

_PRODUCER_BY_PREFIX = (
    (("events.csv", "matches.csv", "ingest_report.json"), "ingest"),
    (("networks.json",), "build-nets"),
    (("metrics.csv",), "metrics"),
    (("features_",), "features"),
    (("model_", "split_", "tuning_"), "train"),
    (("evaluation_", "roc_", "pr_"), "evaluate"),
)


def _producing_stage(name: str) -> str | None:
    for patterns, stage in _PRODUCER_BY_PREFIX:
        for pattern in patterns:
            if name == pattern or name.startswith(pattern):
                return stage
    return None


def worker_count() -> int:
    env = os.environ.get("PASSNET_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"PASSNET_LAB_THREADS must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def parallel_map(fn: Callable, items: list) -> list:
    """Order-preserving map over a bounded thread pool (results do not
    depend on scheduling; tasks must be pure)."""
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- sidecars and stage running ------------------------------------------------------


def _sidecar_path(artifact: Path) -> Path:
    return artifact.with_name(artifact.name + ".meta.json")


def _stage_meta(config: PipelineConfig, stage: str, inputs: dict[str, Path]) -> dict:
    echo = dict(config.echo)
    return {
        "stage": stage,
        "seed": config.seed,
        "config": echo,
        "config_hash": sha256_bytes(json_text(echo).encode("utf-8")),
        "inputs": {name: sha256_file(path) for name, path in sorted(inputs.items())},
    }


def _check_inputs(stage: str, inputs: dict[str, Path]) -> None:
    for name, path in inputs.items():
        if path.exists():
            continue
        producer = _producing_stage(name)
        if producer and producer != stage:
            raise MissingArtifact(name, producer)
        raise DataError(f"input file {path} does not exist")


def run_stage(
    config: PipelineConfig,
    stage: str,
    inputs: dict[str, Path],
    outputs: list[Path],
    build: Callable[[], None],
) -> bool:
    """Run one stage unless its outputs are already up to date.

    Returns True when the stage actually ran.
    """
    _check_inputs(stage, inputs)
    meta = _stage_meta(config, stage, inputs)
    up_to_date = all(
        out.exists()
        and _sidecar_path(out).exists()
        and read_json(_sidecar_path(out)) == meta
        for out in outputs
    )
    if up_to_date and outputs:
        print(f"{stage}: up-to-date", file=sys.stderr)
        return False
    config.output_dir.mkdir(parents=True, exist_ok=True)
    build()
    for out in outputs:
        if not out.exists():
            raise DataError(f"stage {stage} failed to write {out.name}")
        write_json(_sidecar_path(out), meta)
    return True


# -- shared loaders -------------------------------------------------------------------


def _load_events(config: PipelineConfig):
    return parse_event_log(
        (config.output_dir / "events.csv").read_bytes(), "canonical_csv"
    )


def _load_matches(config: PipelineConfig) -> list[MatchRecord]:
    return load_matches((config.output_dir / "matches.csv").read_bytes()).matches


def _load_networks(config: PipelineConfig) -> list[PassingNetwork]:
    payload = read_json(config.output_dir / "networks.json")
    return [PassingNetwork.from_dict(item) for item in payload]


def _load_metrics_store(config: PipelineConfig) -> dict[tuple[str, str, str], dict[str, float | None]]:
    _, rows = read_csv(config.output_dir / "metrics.csv")
    store: dict[tuple[str, str, str], dict[str, float | None]] = {}
    for row in rows:
        key = (row["match_id"], row["team_id"], row["segment"])
        store[key] = {
            col: (float(row[col]) if row[col] != "" else None)
            for col in netmetrics.metrics_columns()
        }
    return store


def _build_stats_store(events, matches) -> dict[tuple[str, str], dict[str, float]]:
    by_match: dict[str, list] = {}
    for ev in events:
        by_match.setdefault(ev.match_id, []).append(ev)
    store: dict[tuple[str, str], dict[str, float]] = {}
    for match in matches:
        match_events = by_match.get(match.match_id, [])
        for team in (match.home_team_id, match.away_team_id):
            stats = compute_match_stats(match_events, match, team)
            store[(match.match_id, team)] = stats_feature_dict(stats)
    return store


def _assemble_table(config: PipelineConfig, target_kind: TargetKind) -> FeatureTable:
    events = _load_events(config)
    matches = _load_matches(config)
    metrics_store = _load_metrics_store(config)
    stats_store = _build_stats_store(events, matches)
    return build_table(
        matches,
        metrics_store,
        stats_store,
        config.mode,
        granularity=config.granularity,
        target_kind=target_kind,
        venue_conditioned=config.venue_conditioned,
        window=config.window,
        min_history=config.min_history,
    )


def _feature_paths(config: PipelineConfig) -> tuple[Path, Path]:
    slug = config.feature_slug
    return (
        config.output_dir / f"features_{slug}.csv",
        config.output_dir / f"features_{slug}.json",
    )


def write_feature_table(table: FeatureTable, csv_path: Path, meta_path: Path) -> None:
    header = table.feature_names + ["label", "match_id"]
    rows = [
        list(table.matrix[i]) + [int(table.labels[i]), table.match_ids[i]]
        for i in range(table.n_rows)
    ]
    write_csv(csv_path, header, rows)
    write_json(meta_path, table.sidecar())


def load_feature_table(csv_path: Path, meta_path: Path) -> FeatureTable:
    meta = read_json(meta_path)
    header, rows = read_csv(csv_path)
    feature_names = header[:-2]
    matrix = np.array(
        [[float(row[name]) for name in feature_names] for row in rows], dtype=np.float64
    )
    if not rows:
        matrix = np.zeros((0, len(feature_names)))
    return FeatureTable(
        feature_names=feature_names,
        matrix=matrix,
        labels=np.array([int(row["label"]) for row in rows], dtype=np.int64),
        match_ids=[row["match_id"] for row in rows],
        mode=TableMode(meta["mode"]),
        granularity=Granularity(meta["granularity"]),
        target_kind=TargetKind(meta["target_kind"]),
        window=int(meta["window"]),
        min_history=int(meta["min_history"]),
        venue_conditioned=bool(meta["venue_conditioned"]),
    )


# -- stages ---------------------------------------------------------------------------


def stage_synth(config: PipelineConfig) -> bool:
    """Extra convenience stage: materialize a synthetic corpus at the
    configured input paths."""
    leagues = {league: config.synth_teams for league in config.synth_leagues}
    corpus = generate_corpus(seed=config.seed, leagues=leagues)
    config.events_path.parent.mkdir(parents=True, exist_ok=True)
    config.events_path.write_bytes(events_to_csv(corpus.events))
    config.matches_path.write_bytes(matches_to_csv(corpus.matches))
    print(
        f"synth: wrote {len(corpus.matches)} matches "
        f"({corpus.draw_count} draws), {len(corpus.events)} events",
        file=sys.stderr,
    )
    return True


def stage_ingest(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {config.events_path.name: config.events_path,
              config.matches_path.name: config.matches_path}
    outputs = [out / "events.csv", out / "matches.csv", out / "ingest_report.json"]

    def build() -> None:
        events = parse_event_log(config.events_path.read_bytes(), config.events_format)
        result = load_matches(config.matches_path.read_bytes())
        non_draws = filter_outcomes(result.matches, include_draws=False)
        (out / "events.csv").write_bytes(events_to_csv(events))
        (out / "matches.csv").write_bytes(matches_to_csv(result.matches))
        write_json(
            out / "ingest_report.json",
            {
                "events": len(events),
                "matches": len(result.matches),
                "rejected_matches": sorted(d.match_id for d in result.diagnostics),
                "draws": len(result.matches) - len(non_draws),
                "non_draws": len(non_draws),
            },
        )

    return run_stage(config, "ingest", inputs, outputs, build)


def stage_build_nets(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {"events.csv": out / "events.csv", "matches.csv": out / "matches.csv"}
    outputs = [out / "networks.json"]

    def build() -> None:
        events = _load_events(config)
        matches = _load_matches(config)
        by_match: dict[str, list] = {}
        for ev in events:
            by_match.setdefault(ev.match_id, []).append(ev)
        nets_per_match = parallel_map(
            lambda m: build_all_networks(by_match.get(m.match_id, []), [m]), matches
        )
        networks = [net.to_dict() for nets in nets_per_match for net in nets]
        write_json(out / "networks.json", networks)

    return run_stage(config, "build-nets", inputs, outputs, build)


def stage_metrics(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {"networks.json": out / "networks.json"}
    outputs = [out / "metrics.csv"]

    def build() -> None:
        networks = _load_networks(config)
        rows = parallel_map(
            lambda net: [net.match_id, net.team_id, net.segment.value]
            + netmetrics.metrics_row(netmetrics.aggregate(net)),
            networks,
        )
        header = ["match_id", "team_id", "segment"] + netmetrics.metrics_columns()
        write_csv(out / "metrics.csv", header, rows)

    return run_stage(config, "metrics", inputs, outputs, build)


def stage_features(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {
        "events.csv": out / "events.csv",
        "matches.csv": out / "matches.csv",
        "metrics.csv": out / "metrics.csv",
    }
    csv_path, meta_path = _feature_paths(config)

    def build() -> None:
        table = _assemble_table(config, config.target_kind)
        write_feature_table(table, csv_path, meta_path)

    return run_stage(config, "features", inputs, [csv_path, meta_path], build)


def stage_train(config: PipelineConfig) -> bool:
    out = config.output_dir
    csv_path, meta_path = _feature_paths(config)
    inputs = {csv_path.name: csv_path, meta_path.name: meta_path}
    slug = config.model_slug
    model_path = out / f"model_{slug}.json"
    split_path = out / f"split_{slug}.json"
    tuning_path = out / f"tuning_{slug}.json"

    def build() -> None:
        table = load_feature_table(csv_path, meta_path)
        train_table, test_table = stratified_split(table, config.test_fraction, seed=config.seed)
        result = tune(
            config.model_family,
            train_table,
            budget=config.tune_budget,
            seed=config.seed,
            cv_folds=config.cv_folds,
        )
        model = train(result.best_spec, train_table)
        write_json(model_path, model.to_dict())
        write_json(
            split_path,
            {"train_match_ids": train_table.match_ids, "test_match_ids": test_table.match_ids},
        )
        write_json(
            tuning_path,
            {
                "best_spec": result.best_spec.to_dict(),
                "best_score": result.best_score,
                "trials": [
                    {"spec": t.spec.to_dict(), "score": t.score, "error": t.error}
                    for t in result.trials
                ],
            },
        )

    return run_stage(config, "train", inputs, [model_path, split_path, tuning_path], build)


def _load_model_and_split(config: PipelineConfig):
    out = config.output_dir
    csv_path, meta_path = _feature_paths(config)
    slug = config.model_slug
    table = load_feature_table(csv_path, meta_path)
    model = TrainedModel.from_dict(read_json(out / f"model_{slug}.json"))
    split = read_json(out / f"split_{slug}.json")
    index_of = {mid: i for i, mid in enumerate(table.match_ids)}
    train_rows = [index_of[mid] for mid in split["train_match_ids"]]
    test_rows = [index_of[mid] for mid in split["test_match_ids"]]
    return table, model, table.select(train_rows), table.select(test_rows)


def stage_evaluate(config: PipelineConfig) -> bool:
    out = config.output_dir
    csv_path, meta_path = _feature_paths(config)
    slug = config.model_slug
    inputs = {
        csv_path.name: csv_path,
        meta_path.name: meta_path,
        f"model_{slug}.json": out / f"model_{slug}.json",
        f"split_{slug}.json": out / f"split_{slug}.json",
    }
    eval_path = out / f"evaluation_{slug}.json"
    roc_path = out / f"roc_{slug}.csv"
    pr_path = out / f"pr_{slug}.csv"

    def build() -> None:
        table, model, _, test_table = _load_model_and_split(config)
        probs = predict_proba(model, test_table)
        averaging = (
            Averaging.BINARY_POSITIVE
            if table.target_kind is TargetKind.BINARY
            else Averaging.MACRO
        )
        report = evaluate(probs, test_table.labels, averaging, classes=model.classes)
        payload = report.to_dict()
        payload.update(
            {
                "mode": config.mode.value,
                "granularity": config.granularity.value,
                "target_kind": config.target_kind.value,
                "family": config.model_family.value,
                "test_rows": test_table.n_rows,
            }
        )
        write_json(eval_path, payload)
        write_csv(roc_path, ["fpr", "tpr"], report.roc_points)
        write_csv(pr_path, ["recall", "precision"], report.pr_points)

    return run_stage(config, "evaluate", inputs, [eval_path, roc_path, pr_path], build)


def _cluster_rows(config: PipelineConfig):
    """(matrix, league labels, dropped-row count) for the clustering stage."""
    matches = _load_matches(config)
    competition_of = {m.match_id: m.competition.value for m in matches}
    store = _load_metrics_store(config)
    columns = netmetrics.metrics_columns()
    per_row: list[tuple[str, list[float | None]]] = []
    for (match_id, team_id, segment), values in sorted(store.items()):
        if segment != "full":
            continue
        per_row.append((f"{match_id}|{team_id}", [values[c] for c in columns]))

    if config.cluster_rows == "team_seasons":
        grouped: dict[str, list[list[float | None]]] = {}
        for key, row in per_row:
            match_id, team_id = key.split("|")
            grouped.setdefault(f"{competition_of[match_id]}|{team_id}", []).append(row)
        keys = sorted(grouped)
        data, labels, dropped = [], [], 0
        for key in keys:
            rows = [r for r in grouped[key] if None not in r]
            if not rows:
                dropped += 1
                continue
            data.append(np.asarray(rows, dtype=np.float64).mean(axis=0))
            labels.append(key.split("|")[0])
        return np.asarray(data), labels, dropped

    data, labels, dropped = [], [], 0
    for key, row in per_row:
        if None in row:
            dropped += 1
            continue
        match_id, _ = key.split("|")
        data.append([float(v) for v in row])
        labels.append(competition_of[match_id])
    return np.asarray(data), labels, dropped


def stage_cluster(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {"metrics.csv": out / "metrics.csv", "matches.csv": out / "matches.csv"}
    scan_path = out / "cluster_scan.csv"
    pca_path = out / "pca_explained.csv"

    def build() -> None:
        data, labels, dropped = _cluster_rows(config)
        if dropped:
            logger.warning("cluster: dropped %d rows with missing metrics", dropped)
        k_range = range(config.k_min, config.k_max + 1)
        rows = []
        for with_pca in (False, True):
            scan = elbow_scan(
                data,
                k_range,
                seed=config.seed,
                with_pca=with_pca,
                n_components=config.pca_components,
                league_labels=labels,
            )
            rows.extend(
                [r.k, r.wcss, r.silhouette, r.nmi_vs_league, r.with_pca] for r in scan.rows
            )
        write_csv(scan_path, ["k", "wcss", "silhouette", "nmi", "with_pca"], rows)

        model = pca(data)
        ratios = model.explained_variance_ratio
        cumulative = np.cumsum(ratios)
        write_csv(
            pca_path,
            ["component", "explained_ratio", "cumulative_ratio"],
            [[i + 1, float(r), float(c)] for i, (r, c) in enumerate(zip(ratios, cumulative))],
        )

    return run_stage(config, "cluster", inputs, [scan_path, pca_path], build)


def stage_importance(config: PipelineConfig) -> bool:
    out = config.output_dir
    csv_path, meta_path = _feature_paths(config)
    slug = config.model_slug
    inputs = {
        csv_path.name: csv_path,
        meta_path.name: meta_path,
        f"model_{slug}.json": out / f"model_{slug}.json",
        f"split_{slug}.json": out / f"split_{slug}.json",
    }
    importance_path = out / f"importance_{slug}.csv"
    shap_path = out / f"shap_{slug}.csv"
    summary_path = out / f"shap_summary_{slug}.json"

    def build() -> None:
        _, model, train_table, test_table = _load_model_and_split(config)
        report = permutation_importance(
            model, test_table, repeats=config.importance_repeats, seed=config.seed
        )
        write_csv(
            importance_path,
            ["feature", "mean_drop", "std_drop", "rank"],
            [[name, mean, std, rank] for name, mean, std, rank in report.top(config.top_n)],
        )

        rows = test_table.select(range(min(config.shap_rows, test_table.n_rows)))
        background = train_table.select(range(min(config.shap_background, train_table.n_rows)))
        matrix = shapley_values(
            model,
            rows,
            background,
            mode=config.shap_mode,
            samples=config.shap_samples,
            seed=config.seed,
        )
        write_csv(
            shap_path,
            ["row_id", "feature", "feature_value", "contribution"],
            beeswarm_rows(matrix),
        )
        summary = shap_summary(matrix)
        write_json(
            summary_path,
            {
                "base_value": summary.base_value,
                "top": [
                    {"feature": name, "mean_abs_contribution": value, "rank": rank}
                    for name, value, rank in summary.top(config.top_n)
                ],
            },
        )

    return run_stage(
        config, "importance", inputs, [importance_path, shap_path, summary_path], build
    )


def stage_simulate(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {
        "events.csv": out / "events.csv",
        "matches.csv": out / "matches.csv",
        "metrics.csv": out / "metrics.csv",
    }
    summary_path = out / "simulation_summary.json"
    if not (out / "matches.csv").exists():
        raise MissingArtifact("matches.csv", "ingest")
    present = {m.competition for m in _load_matches(config)}
    leagues = [lg for lg in config.simulate_leagues if lg in present]
    outputs = [summary_path]
    for league in leagues:
        outputs.append(out / f"standings_{league.value}.csv")
        outputs.append(out / f"simulation_{league.value}.json")

    def build() -> None:
        matches = _load_matches(config)
        table = _assemble_table(config, TargetKind.TERNARY)
        summary = {"simulated": [], "skipped": []}
        for league in leagues:
            try:
                result = simulate_league(
                    league, table, matches,
                    family=config.model_family, seed=config.seed,
                )
            except UnknownLeague as exc:
                summary["skipped"].append({"league": league.value, "reason": str(exc)})
                # placeholder artifacts keep the output set stable
                write_csv(out / f"standings_{league.value}.csv",
                          ["league", "rank", "team", "points", "provenance"], [])
                write_json(out / f"simulation_{league.value}.json",
                           {"league": league.value, "error": str(exc)})
                continue
            rows = []
            for standings in (result.real, result.simulated):
                rows.extend(
                    [league.value, r.rank, r.team, r.points, standings.provenance.value]
                    for r in standings.rows
                )
            write_csv(
                out / f"standings_{league.value}.csv",
                ["league", "rank", "team", "points", "provenance"],
                rows,
            )
            write_json(
                out / f"simulation_{league.value}.json",
                {
                    "league": league.value,
                    "n_matches": result.n_matches,
                    "spec": result.spec.to_dict(),
                    **result.comparison.to_dict(),
                },
            )
            summary["simulated"].append(league.value)
        write_json(summary_path, summary)

    return run_stage(config, "simulate", inputs, outputs, build)


def stage_correlate(config: PipelineConfig) -> bool:
    out = config.output_dir
    inputs = {"metrics.csv": out / "metrics.csv", "matches.csv": out / "matches.csv"}
    league = config.correlate_league
    corr_path = out / f"correlations_{league.value}.csv"

    def build() -> None:
        matches = [m for m in _load_matches(config) if m.competition is league]
        if not matches:
            raise DataError(f"no matches for league {league.value}")
        store = _load_metrics_store(config)
        team_ids = {m.home_team_id for m in matches} | {m.away_team_id for m in matches}
        per_row = [
            (team_id, values)
            for (match_id, team_id, segment), values in sorted(store.items())
            if segment == "full" and team_id in team_ids
        ]
        means = aggregate_team_means(per_row)
        standings = standings_from_outcomes(
            league, [(m, m.outcome()) for m in matches], Provenance.REAL
        )
        results = metric_rank_correlations(means, standings)
        write_csv(corr_path, ["metric", "r", "p"], [[m, r, p] for m, r, p, _ in results])

    return run_stage(config, "correlate", inputs, [corr_path], build)


def stage_report(config: PipelineConfig) -> bool:
    out = config.output_dir
    eval_paths = sorted(
        p for p in out.glob("evaluation_*.json") if not p.name.endswith(".meta.json")
    )
    if not eval_paths:
        raise MissingArtifact("evaluation_*.json", "evaluate")
    inputs = {p.name: p for p in eval_paths}
    report_path = out / "report.csv"

    def build() -> None:
        rows = []
        for path in eval_paths:
            payload = read_json(path)
            rows.append(
                [
                    payload["mode"],
                    payload["granularity"],
                    payload["target_kind"],
                    payload["family"],
                    payload["accuracy"],
                    payload["precision"],
                    payload["recall"],
                    payload["f1"],
                    payload["auc"],
                ]
            )
        write_csv(
            report_path,
            ["mode", "granularity", "target_kind", "family",
             "accuracy", "precision", "recall", "f1", "auc"],
            rows,
        )

    return run_stage(config, "report", inputs, [report_path], build)


STAGE_FUNCTIONS: dict[str, Callable[[PipelineConfig], bool]] = {
    "synth": stage_synth,
    "ingest": stage_ingest,
    "build-nets": stage_build_nets,
    "metrics": stage_metrics,
    "features": stage_features,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "cluster": stage_cluster,
    "importance": stage_importance,
    "simulate": stage_simulate,
    "correlate": stage_correlate,
    "report": stage_report,
}
