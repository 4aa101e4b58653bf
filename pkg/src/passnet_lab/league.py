"""Season-level analyses: metric/ranking correlations, per-league model
evaluation, and the leave-one-league-out season simulation.

Points follow the standard 3/1/0 rule. Standings are always recomputed
from outcomes (real or predicted) with the same code path, so feeding
true outcomes through the simulator reproduces the real table exactly.
Tie-break: points, then wins, then team id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import betainc

from .errors import MissingTeam, TooShort, UnknownLeague, ZeroVariance
from .features import FeatureTable, TargetKind
from .ingest import DOMESTIC_LEAGUES, Competition, MatchRecord, Outcome
from .models import (
    Averaging,
    EvaluationReport,
    ModelFamily,
    ModelSpec,
    default_spec,
    evaluate,
    predict_proba,
    stratified_split,
    train,
)
from .models.tuning import tune
from .rng import derive_seed

# -- Pearson correlation -----------------------------------------------------------


def pearson(x, y) -> tuple[float, float]:
    """Sample correlation and two-sided p-value from the t distribution
    (CDF via the regularized incomplete beta)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n != len(y):
        raise TooShort("inputs differ in length")
    if n < 3:
        raise TooShort("need at least 3 points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise ZeroVariance("constant input")
    r = float(xc @ yc) / denom
    r = min(max(r, -1.0), 1.0)
    if abs(r) == 1.0:
        return r, 0.0
    dof = n - 2
    t_sq = r * r * dof / (1.0 - r * r)
    p = float(betainc(dof / 2.0, 0.5, dof / (dof + t_sq)))
    return r, p


# -- standings ----------------------------------------------------------------------


class Provenance(str, Enum):
    REAL = "real"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class StandingRow:
    rank: int
    team: str
    points: int
    wins: int
    draws: int
    losses: int


@dataclass
class StandingsTable:
    league: Competition
    rows: list[StandingRow]
    provenance: Provenance

    def rank_of(self, team: str) -> int:
        for row in self.rows:
            if row.team == team:
                return row.rank
        raise MissingTeam(f"{team} not in standings")

    @property
    def champion(self) -> str:
        return self.rows[0].team


@dataclass(frozen=True)
class SimulationComparison:
    exact_hits: int
    within_two: int
    champion_correct: bool

    def to_dict(self) -> dict:
        return {
            "exact_hits": self.exact_hits,
            "within_two": self.within_two,
            "champion_correct": self.champion_correct,
        }


def standings_from_outcomes(
    league: Competition,
    results: list[tuple[MatchRecord, Outcome]],
    provenance: Provenance,
) -> StandingsTable:
    """Allocate 3/1/0 points per outcome and rank by (points, wins, team id)."""
    points: dict[str, int] = {}
    wins: dict[str, int] = {}
    draws: dict[str, int] = {}
    losses: dict[str, int] = {}

    def touch(team: str) -> None:
        points.setdefault(team, 0)
        wins.setdefault(team, 0)
        draws.setdefault(team, 0)
        losses.setdefault(team, 0)

    for match, outcome in results:
        home, away = match.home_team_id, match.away_team_id
        touch(home)
        touch(away)
        if outcome is Outcome.HOME_WIN:
            points[home] += 3
            wins[home] += 1
            losses[away] += 1
        elif outcome is Outcome.HOME_LOSS:
            points[away] += 3
            wins[away] += 1
            losses[home] += 1
        else:
            points[home] += 1
            points[away] += 1
            draws[home] += 1
            draws[away] += 1

    order = sorted(points, key=lambda t: (-points[t], -wins[t], t))
    rows = [
        StandingRow(rank=i + 1, team=t, points=points[t], wins=wins[t],
                    draws=draws[t], losses=losses[t])
        for i, t in enumerate(order)
    ]
    return StandingsTable(league=league, rows=rows, provenance=provenance)


def compare_standings(real: StandingsTable, simulated: StandingsTable) -> SimulationComparison:
    exact = 0
    within_two = 0
    for row in simulated.rows:
        diff = abs(row.rank - real.rank_of(row.team))
        if diff == 0:
            exact += 1
        if diff <= 2:
            within_two += 1
    return SimulationComparison(
        exact_hits=exact,
        within_two=within_two,
        champion_correct=simulated.champion == real.champion,
    )


# -- metric vs ranking correlations ----------------------------------------------------


def metric_rank_correlations(
    team_metric_means: dict[str, dict[str, float]],
    standings: StandingsTable,
) -> list[tuple[str, float | None, float | None, str]]:
    """Per metric: correlate team season means against final rank.

    Returns (metric, r, p, note) tuples; constant metrics are flagged
    with note ``zero_variance`` instead of failing the whole run.
    """
    results = []
    ranks = [float(row.rank) for row in standings.rows]
    for metric, by_team in team_metric_means.items():
        values = []
        for row in standings.rows:
            if row.team not in by_team:
                raise MissingTeam(f"no {metric} values for {row.team}")
            values.append(by_team[row.team])
        try:
            r, p = pearson(values, ranks)
            results.append((metric, r, p, ""))
        except ZeroVariance:
            results.append((metric, None, None, "zero_variance"))
    return results


def aggregate_team_means(
    per_row: list[tuple[str, dict[str, float | None]]]
) -> dict[str, dict[str, float]]:
    """Mean of each metric per team over its rows, skipping missing values."""
    sums: dict[str, dict[str, float]] = {}
    counts: dict[str, dict[str, int]] = {}
    for team, metrics in per_row:
        for metric, value in metrics.items():
            if value is None:
                continue
            sums.setdefault(metric, {}).setdefault(team, 0.0)
            counts.setdefault(metric, {}).setdefault(team, 0)
            sums[metric][team] += value
            counts[metric][team] += 1
    return {
        metric: {team: sums[metric][team] / counts[metric][team] for team in sums[metric]}
        for metric in sums
    }


# -- per-league evaluation ---------------------------------------------------------------


def per_league_evaluation(
    table: FeatureTable,
    matches: list[MatchRecord],
    family: ModelFamily,
    seed: int = 0,
    tune_budget: int = 10,
    cv_folds: int = 10,
    test_fraction: float = 0.30,
) -> dict[Competition, EvaluationReport]:
    """Full split/tune/train/evaluate pipeline restricted to each league."""
    competition_of = {m.match_id: m.competition for m in matches}
    leagues = sorted({competition_of[mid] for mid in table.match_ids}, key=lambda c: c.value)
    averaging = (
        Averaging.BINARY_POSITIVE if table.target_kind is TargetKind.BINARY else Averaging.MACRO
    )
    reports: dict[Competition, EvaluationReport] = {}
    for league in leagues:
        rows = [i for i, mid in enumerate(table.match_ids) if competition_of[mid] is league]
        league_table = table.select(rows)
        league_seed = derive_seed(seed, "league", league.value)
        train_table, test_table = stratified_split(league_table, test_fraction, seed=league_seed)
        result = tune(family, train_table, budget=tune_budget, seed=league_seed, cv_folds=cv_folds)
        model = train(result.best_spec, train_table)
        probs = predict_proba(model, test_table)
        reports[league] = evaluate(probs, test_table.labels, averaging, classes=model.classes)
    return reports


# -- season simulation ----------------------------------------------------------------------


@dataclass
class SimulationResult:
    real: StandingsTable
    simulated: StandingsTable
    comparison: SimulationComparison
    n_matches: int
    spec: ModelSpec


def simulate_league(
    target_league: Competition,
    table: FeatureTable,
    matches: list[MatchRecord],
    family: ModelFamily = ModelFamily.RANDOM_FOREST,
    seed: int = 0,
    spec: ModelSpec | None = None,
    predicted_outcomes: dict[str, Outcome] | None = None,
) -> SimulationResult:
    """Leave-one-league-out season simulation.

    Trains a 3-class model on every row outside ``target_league``,
    predicts each covered target-league match, and builds the simulated
    points table; the real table is computed from actual results over
    the same matches. ``predicted_outcomes`` overrides the model (used
    by the identity oracle: feeding true outcomes must reproduce the
    real table).
    """
    if target_league not in DOMESTIC_LEAGUES:
        raise UnknownLeague(f"{target_league.value} is not a simulatable domestic league")
    if table.target_kind is not TargetKind.TERNARY:
        raise UnknownLeague("simulation needs a ternary feature table (draws included)")

    match_of = {m.match_id: m for m in matches}
    target_rows = [
        i for i, mid in enumerate(table.match_ids)
        if match_of[mid].competition is target_league
    ]
    if not target_rows:
        raise UnknownLeague(f"no feature rows for {target_league.value}")
    train_rows = [
        i for i, mid in enumerate(table.match_ids)
        if match_of[mid].competition is not target_league
    ]

    target_table = table.select(target_rows)
    used_spec = spec or default_spec(family, seed=derive_seed(seed, "simulate", target_league.value))

    if predicted_outcomes is None:
        model = train(used_spec, table.select(train_rows))
        probs = predict_proba(model, target_table)
        classes = np.asarray(model.classes)
        predicted = {
            mid: Outcome(int(classes[col]))
            for mid, col in zip(target_table.match_ids, np.argmax(probs, axis=1))
        }
    else:
        predicted = {mid: predicted_outcomes[mid] for mid in target_table.match_ids}

    covered = [match_of[mid] for mid in target_table.match_ids]
    simulated = standings_from_outcomes(
        target_league, [(m, predicted[m.match_id]) for m in covered], Provenance.SIMULATED
    )
    real = standings_from_outcomes(
        target_league, [(m, m.outcome()) for m in covered], Provenance.REAL
    )
    return SimulationResult(
        real=real,
        simulated=simulated,
        comparison=compare_standings(real, simulated),
        n_matches=len(covered),
        spec=used_spec,
    )
