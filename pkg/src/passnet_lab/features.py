"""Per-match statistics and rolling-average feature tables.

Feature naming follows the ``avg_<base>_<T1|T2>[_<1H|2H>]`` convention:
every feature is a rolling mean over a team's previous matches, ``T1``
tags the home side, ``T2`` the away side, and network features carry a
half suffix when built at half granularity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date as Date
from enum import Enum

import numpy as np

from .errors import InsufficientHistory, MalformedInput
from .ingest import Event, EventKind, MatchRecord, Outcome
from .netmetrics import NETWORK_LEVEL_COLUMNS, NODE_METRICS

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 5
DEFAULT_MIN_HISTORY = 5


class Venue(str, Enum):
    HOME = "home"
    AWAY = "away"


class TableMode(str, Enum):
    NETS = "nets"
    STATS = "stats"
    MIXED = "mixed"


class Granularity(str, Enum):
    FULL_GAME = "full"
    HALVES = "halves"


class TargetKind(str, Enum):
    BINARY = "binary"
    TERNARY = "ternary"


@dataclass(frozen=True)
class MatchStats:
    """The fourteen per-match statistics for one team."""

    saves: int
    red_cards: int
    yellow_cards: int
    assists: int
    shots: int
    opponent_shots: int
    shots_on_target: int
    passes: int
    goals: int
    opponent_goals: int
    possession: float
    pass_accuracy: float
    save_accuracy: float
    shot_on_target_accuracy: float


# feature base names, in the order they appear in tables
STAT_FEATURE_NAMES = (
    "saves",
    "red_cards",
    "yellow_cards",
    "assists",
    "shots",
    "shots_against",
    "shots_on_target",
    "passes",
    "goals",
    "goals_against",
    "possession",
    "pass_accuracy",
    "save_accuracy",
    "shot_on_target_accuracy",
)


def stats_feature_dict(stats: MatchStats) -> dict[str, float]:
    return {
        "saves": float(stats.saves),
        "red_cards": float(stats.red_cards),
        "yellow_cards": float(stats.yellow_cards),
        "assists": float(stats.assists),
        "shots": float(stats.shots),
        "shots_against": float(stats.opponent_shots),
        "shots_on_target": float(stats.shots_on_target),
        "passes": float(stats.passes),
        "goals": float(stats.goals),
        "goals_against": float(stats.opponent_goals),
        "possession": stats.possession,
        "pass_accuracy": stats.pass_accuracy,
        "save_accuracy": stats.save_accuracy,
        "shot_on_target_accuracy": stats.shot_on_target_accuracy,
    }


def compute_match_stats(events: list[Event], match: MatchRecord, team: str) -> MatchStats:
    """Tally the statistics for ``team`` from the match's event stream.

    Possession is the team's share of pass events (the dataset has no
    possession clock); degenerate denominators yield 0.
    """
    if team not in (match.home_team_id, match.away_team_id):
        raise MalformedInput(f"team {team} not in match {match.match_id}")

    saves = red = yellow = assists = 0
    shots = shots_on_target = opp_shots = 0
    passes = passes_ok = opp_passes = 0
    goals = opp_goals = 0
    for ev in events:
        if ev.match_id != match.match_id:
            continue
        ours = ev.team_id == team
        if ev.kind is EventKind.PASS:
            if ours:
                passes += 1
                if ev.success:
                    passes_ok += 1
            else:
                opp_passes += 1
        elif ev.kind is EventKind.SHOT:
            if ours:
                shots += 1
                if ev.success:
                    shots_on_target += 1
            else:
                opp_shots += 1
        elif ev.kind is EventKind.SAVE:
            if ours and ev.success:
                saves += 1
        elif ev.kind is EventKind.RED_CARD:
            red += ours
        elif ev.kind is EventKind.YELLOW_CARD:
            yellow += ours
        elif ev.kind is EventKind.ASSIST:
            assists += ours
        elif ev.kind is EventKind.GOAL:
            if ours:
                goals += 1
            else:
                opp_goals += 1

    total_passes = passes + opp_passes
    return MatchStats(
        saves=saves,
        red_cards=red,
        yellow_cards=yellow,
        assists=assists,
        shots=shots,
        opponent_shots=opp_shots,
        shots_on_target=shots_on_target,
        passes=passes,
        goals=goals,
        opponent_goals=opp_goals,
        possession=passes / total_passes if total_passes else 0.0,
        pass_accuracy=passes_ok / passes if passes else 0.0,
        save_accuracy=saves / (saves + opp_goals) if (saves + opp_goals) else 0.0,
        shot_on_target_accuracy=shots_on_target / shots if shots else 0.0,
    )


# -- rolling features ----------------------------------------------------------

# feature key: (base name, half suffix or None)
FeatureKey = tuple[str, str | None]


@dataclass(frozen=True)
class TeamMatchFeatures:
    """One team's raw per-match feature values, tagged with venue and date."""

    match_id: str
    date: Date
    venue: Venue
    values: dict[FeatureKey, float | None]


def network_feature_keys(granularity: Granularity) -> list[FeatureKey]:
    bases = [f"{agg}_{metric.value}" for metric in NODE_METRICS for agg in _FEATURE_AGGS]
    bases.extend(NETWORK_LEVEL_COLUMNS)
    if granularity is Granularity.FULL_GAME:
        return [(base, None) for base in bases]
    return [(base, half) for half in ("1H", "2H") for base in bases]


# table-facing aggregate tags: the mean aggregate is spelled "avg"
_FEATURE_AGGS = ("min", "max", "avg", "std")


def stats_feature_keys() -> list[FeatureKey]:
    return [(name, None) for name in STAT_FEATURE_NAMES]


def feature_keys_for_mode(mode: TableMode, granularity: Granularity) -> list[FeatureKey]:
    if mode is TableMode.NETS:
        return network_feature_keys(granularity)
    if mode is TableMode.STATS:
        return stats_feature_keys()
    return network_feature_keys(granularity) + stats_feature_keys()


def feature_name(key: FeatureKey, team_tag: str) -> str:
    base, half = key
    name = f"avg_{base}_{team_tag}"
    if half:
        name += f"_{half}"
    return name


def rolling_features(
    history: list[TeamMatchFeatures],
    venue: Venue,
    window: int = DEFAULT_WINDOW,
    venue_conditioned: bool = True,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> tuple[dict[FeatureKey, float | None], int]:
    """Mean of each feature over the most recent qualifying prior matches.

    ``history`` must already be restricted to matches strictly before the
    target date. Qualifying matches share the venue role when
    ``venue_conditioned``. Raises ``InsufficientHistory`` when fewer than
    ``min_history`` qualify; features that are missing in every window
    match stay None.
    """
    if venue_conditioned:
        qualifying = [rec for rec in history if rec.venue is venue]
    else:
        qualifying = list(history)
    used = qualifying[-window:]
    coverage = len(used)
    if coverage == 0 or coverage < min_history:
        raise InsufficientHistory(f"{coverage} qualifying prior matches, need {max(min_history, 1)}")

    means: dict[FeatureKey, float | None] = {}
    for key in used[0].values:
        present = [rec.values[key] for rec in used if rec.values[key] is not None]
        means[key] = sum(present) / len(present) if present else None
    return means, coverage


# -- table assembly --------------------------------------------------------------


@dataclass
class FeatureTable:
    feature_names: list[str]
    matrix: np.ndarray  # (n_rows, n_features) float64
    labels: np.ndarray  # int64 Outcome values
    match_ids: list[str]
    mode: TableMode
    granularity: Granularity
    target_kind: TargetKind
    window: int = DEFAULT_WINDOW
    min_history: int = DEFAULT_MIN_HISTORY
    venue_conditioned: bool = True
    coverages: list[tuple[int, int]] = field(default_factory=list)
    skips: dict[str, int] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(self.match_ids)

    def select(self, row_indices) -> "FeatureTable":
        idx = list(row_indices)
        return FeatureTable(
            feature_names=self.feature_names,
            matrix=self.matrix[idx],
            labels=self.labels[idx],
            match_ids=[self.match_ids[i] for i in idx],
            mode=self.mode,
            granularity=self.granularity,
            target_kind=self.target_kind,
            window=self.window,
            min_history=self.min_history,
            venue_conditioned=self.venue_conditioned,
            coverages=[self.coverages[i] for i in idx] if self.coverages else [],
            skips={},
        )

    def sidecar(self) -> dict:
        return {
            "mode": self.mode.value,
            "granularity": self.granularity.value,
            "target_kind": self.target_kind.value,
            "window": self.window,
            "min_history": self.min_history,
            "venue_conditioned": self.venue_conditioned,
            "rows": self.n_rows,
            "features": len(self.feature_names),
            "skips": dict(sorted(self.skips.items())),
        }


def build_table(
    matches: list[MatchRecord],
    metrics_store: dict[tuple[str, str, str], dict[str, float | None]],
    stats_store: dict[tuple[str, str], dict[str, float]],
    mode: TableMode,
    granularity: Granularity = Granularity.FULL_GAME,
    target_kind: TargetKind = TargetKind.BINARY,
    venue_conditioned: bool = True,
    window: int = DEFAULT_WINDOW,
    min_history: int = DEFAULT_MIN_HISTORY,
) -> FeatureTable:
    """One row per match where both teams have enough rolling history.

    ``metrics_store`` maps (match_id, team_id, segment) to network metric
    columns; ``stats_store`` maps (match_id, team_id) to the statistics
    features. Rows are ordered by (date, match_id).
    """
    keys = feature_keys_for_mode(mode, granularity)
    ordered = sorted(matches, key=lambda m: (m.date, m.match_id))

    histories: dict[str, list[TeamMatchFeatures]] = {}
    rows: list[list[float]] = []
    labels: list[int] = []
    match_ids: list[str] = []
    coverages: list[tuple[int, int]] = []
    skips = {"insufficient_history": 0, "draws_excluded": 0, "missing_feature": 0}

    names = [feature_name(k, "T1") for k in keys] + [feature_name(k, "T2") for k in keys]

    for match in ordered:
        sides = ((match.home_team_id, Venue.HOME), (match.away_team_id, Venue.AWAY))
        row_values: list[float] = []
        ok = True
        reason = None
        covs: list[int] = []
        for team, venue in sides:
            history = [rec for rec in histories.get(team, []) if rec.date < match.date]
            try:
                means, coverage = rolling_features(
                    history, venue, window=window,
                    venue_conditioned=venue_conditioned, min_history=min_history,
                )
            except InsufficientHistory:
                ok = False
                reason = "insufficient_history"
                break
            ordered_means = [means[k] for k in keys]
            if any(v is None for v in ordered_means):
                ok = False
                reason = "missing_feature"
                break
            row_values.extend(ordered_means)  # type: ignore[arg-type]
            covs.append(coverage)

        outcome = match.outcome()
        if ok and target_kind is TargetKind.BINARY and outcome is Outcome.DRAW:
            ok = False
            reason = "draws_excluded"
        if ok:
            rows.append(row_values)
            labels.append(int(outcome.value))
            match_ids.append(match.match_id)
            coverages.append((covs[0], covs[1]))
        elif reason:
            skips[reason] += 1

        # append this match's raw features to both teams' histories
        for team, venue in sides:
            values = _side_values(match, team, keys, metrics_store, stats_store)
            histories.setdefault(team, []).append(
                TeamMatchFeatures(match.match_id, match.date, venue, values)
            )

    matrix = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    return FeatureTable(
        feature_names=names,
        matrix=matrix,
        labels=np.asarray(labels, dtype=np.int64),
        match_ids=match_ids,
        mode=mode,
        granularity=granularity,
        target_kind=target_kind,
        window=window,
        min_history=min_history,
        venue_conditioned=venue_conditioned,
        coverages=coverages,
        skips=skips,
    )


_SEGMENT_OF_HALF = {None: "full", "1H": "1H", "2H": "2H"}


def _side_values(
    match: MatchRecord,
    team: str,
    keys: list[FeatureKey],
    metrics_store: dict[tuple[str, str, str], dict[str, float | None]],
    stats_store: dict[tuple[str, str], dict[str, float]],
) -> dict[FeatureKey, float | None]:
    values: dict[FeatureKey, float | None] = {}
    for base, half in keys:
        if base in _STAT_NAME_SET:
            stats = stats_store.get((match.match_id, team))
            if stats is None:
                raise MalformedInput(f"stats store missing ({match.match_id}, {team})")
            values[(base, half)] = stats[base]
        else:
            segment = _SEGMENT_OF_HALF[half]
            metrics = metrics_store.get((match.match_id, team, segment))
            if metrics is None:
                raise MalformedInput(
                    f"metrics store missing ({match.match_id}, {team}, {segment})"
                )
            values[(base, half)] = metrics[_metrics_column(base)]
    return values


_STAT_NAME_SET = set(STAT_FEATURE_NAMES)


def _metrics_column(base: str) -> str:
    # table names use "avg" for the mean aggregate; the metrics CSV uses "mean"
    if base.startswith("avg_") and base != "avg_shortest_path":
        return "mean_" + base[4:]
    return base
