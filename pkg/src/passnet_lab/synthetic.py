"""Synthetic data: ML benchmark fixtures and a full synthetic match corpus.

The corpus generator produces event streams and match records that
satisfy every ingest invariant (timestamps past regulation time,
substitution chains, goal events consistent with scorelines) with team
strengths driving both outcomes and network texture, so the entire
pipeline can run end-to-end without external data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date
from datetime import timedelta

import numpy as np

from .features import FeatureTable, Granularity, TableMode, TargetKind
from .ingest import Competition, Event, EventKind, MatchRecord, Period
from .rng import make_rng

# -- ML fixtures -----------------------------------------------------------------


def _table_from_arrays(X: np.ndarray, y: np.ndarray, prefix: str) -> FeatureTable:
    return FeatureTable(
        feature_names=[f"{prefix}_{i}" for i in range(X.shape[1])],
        matrix=np.asarray(X, dtype=np.float64),
        labels=np.asarray(y, dtype=np.int64),
        match_ids=[f"row{i}" for i in range(len(y))],
        mode=TableMode.STATS,
        granularity=Granularity.FULL_GAME,
        target_kind=TargetKind.BINARY,
    )


def make_separable(n: int = 200, seed: int = 0) -> FeatureTable:
    """Two linearly separable 2-d blobs with a wide margin."""
    rng = make_rng(seed, "separable")
    half = n // 2
    a = rng.normal((-2.0, -2.0), 0.5, size=(half, 2))
    b = rng.normal((2.0, 2.0), 0.5, size=(n - half, 2))
    X = np.vstack([a, b])
    y = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(n - half, dtype=np.int64)])
    order = rng.permutation(n)
    return _table_from_arrays(X[order], y[order], "sep")


def make_xor(n: int = 500, seed: int = 0) -> FeatureTable:
    """XOR of two uniform coordinates: nonlinear, hopeless for linear models."""
    rng = make_rng(seed, "xor")
    X = rng.uniform(0.0, 1.0, size=(n, 2))
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(np.int64)
    return _table_from_arrays(X, y, "xor")


def make_informative_noise(
    n: int = 1000, n_noise: int = 4, seed: int = 0
) -> tuple[FeatureTable, int]:
    """One strongly informative column among pure-noise columns.

    Returns (table, informative column index).
    """
    rng = make_rng(seed, "informative")
    informative = rng.normal(0.0, 1.0, n)
    y = (informative > 0.0).astype(np.int64)
    noise = rng.normal(0.0, 1.0, size=(n, n_noise))
    X = np.column_stack([informative, noise])
    return _table_from_arrays(X, y, "col"), 0


# -- synthetic match corpus --------------------------------------------------------


@dataclass
class SyntheticCorpus:
    matches: list[MatchRecord]
    events: list[Event]

    @property
    def draw_count(self) -> int:
        return sum(1 for m in self.matches if m.is_draw)


_LEAGUE_CODES = {
    Competition.LA_LIGA: "lal",
    Competition.PREMIER_LEAGUE: "epl",
    Competition.SERIE_A: "sea",
    Competition.LIGUE_1: "li1",
    Competition.BUNDESLIGA: "bun",
    Competition.WORLD_CUP: "wc",
    Competition.EURO: "euro",
}

_HALF_REGULATION = 2700.0
_HALF_MAX = 2790.0  # stoppage-time seconds continue past 45*60


def generate_corpus(
    seed: int = 0,
    leagues: dict[Competition, int] | None = None,
    max_matches_per_league: int | None = None,
    base_date: Date = Date(2017, 8, 5),
) -> SyntheticCorpus:
    """Deterministic synthetic corpus: double round-robin per league."""
    if leagues is None:
        leagues = {Competition.LA_LIGA: 8, Competition.PREMIER_LEAGUE: 8}
    rng = make_rng(seed, "corpus")
    matches: list[MatchRecord] = []
    events: list[Event] = []

    for competition in sorted(leagues, key=lambda c: c.value):
        n_teams = leagues[competition]
        code = _LEAGUE_CODES[competition]
        teams = [f"{code}_t{i:02d}" for i in range(n_teams)]
        strengths = {
            team: float(np.linspace(0.9, -0.9, n_teams)[i] + rng.normal(0.0, 0.08))
            for i, team in enumerate(teams)
        }
        pairs = [(h, a) for h in teams for a in teams if h != a]
        order = rng.permutation(len(pairs))
        schedule = [pairs[i] for i in order]
        if max_matches_per_league is not None:
            schedule = schedule[:max_matches_per_league]
        for k, (home, away) in enumerate(schedule):
            match_id = f"{code}_m{k:03d}"
            match_date = base_date + timedelta(days=3 * k)
            match, match_events = _simulate_match(
                rng, match_id, competition, match_date, home, away, strengths
            )
            matches.append(match)
            events.extend(match_events)
    return SyntheticCorpus(matches=matches, events=events)


def _squad(team: str) -> list[str]:
    return [f"{team}_p{i:02d}" for i in range(1, 19)]


def _simulate_match(
    rng: np.random.Generator,
    match_id: str,
    competition: Competition,
    match_date: Date,
    home: str,
    away: str,
    strengths: dict[str, float],
) -> tuple[MatchRecord, list[Event]]:
    s_home, s_away = strengths[home], strengths[away]
    lam_home = 1.35 * math.exp(0.55 * (s_home - s_away) + 0.15)
    lam_away = 1.35 * math.exp(0.55 * (s_away - s_home) - 0.15)
    home_goals = int(rng.poisson(lam_home))
    away_goals = int(rng.poisson(lam_away))

    squads = {home: _squad(home), away: _squad(away)}
    starters = {team: tuple(squads[team][:11]) for team in (home, away)}

    events: list[Event] = []
    goals = {home: home_goals, away: away_goals}
    on_target: dict[str, int] = {}
    for team in (home, away):
        s = strengths[team]
        timeline = _substitution_timeline(rng, match_id, team, starters[team], squads[team], events)
        _emit_passes(rng, match_id, team, s, timeline, events)
        on_target[team] = _emit_shots(rng, match_id, team, s, goals[team], timeline, events)
    for team, opponent in ((home, away), (away, home)):
        _emit_saves(rng, match_id, team, starters[team][0], on_target[opponent], goals[opponent], events)
        _emit_cards(rng, match_id, team, starters[team], events)

    match = MatchRecord(
        match_id=match_id,
        competition=competition,
        date=match_date,
        home_team_id=home,
        away_team_id=away,
        home_goals=home_goals,
        away_goals=away_goals,
        home_starters=starters[home],
        away_starters=starters[away],
    )
    return match, events


class _SlotTimeline:
    """Tracks which player occupies each starter slot over time."""

    def __init__(self, starters: tuple[str, ...]):
        self.changes: list[list[tuple[float, str]]] = [[(-1.0, p)] for p in starters]

    def occupant(self, slot: int, timekey: float) -> str:
        player = self.changes[slot][0][1]
        for at, who in self.changes[slot]:
            if at <= timekey:
                player = who
        return player

    def substitute(self, slot: int, timekey: float, incoming: str) -> str:
        outgoing = self.occupant(slot, timekey)
        self.changes[slot].append((timekey, incoming))
        return outgoing


def _timekey(period: Period, second: float) -> float:
    return second + (10_000.0 if period is Period.SECOND_HALF else 0.0)


def _substitution_timeline(
    rng: np.random.Generator,
    match_id: str,
    team: str,
    starters: tuple[str, ...],
    squad: list[str],
    events: list[Event],
) -> _SlotTimeline:
    timeline = _SlotTimeline(starters)
    bench = list(squad[11:])
    n_subs = int(rng.integers(0, 4))
    times = sorted(float(rng.uniform(300.0, _HALF_REGULATION)) for _ in range(n_subs))
    for second in times:
        slot = int(rng.integers(0, 11))
        incoming = bench.pop(0)
        key = _timekey(Period.SECOND_HALF, second)
        outgoing = timeline.substitute(slot, key, incoming)
        events.append(
            Event(match_id, team, outgoing, Period.SECOND_HALF, second,
                  EventKind.SUBSTITUTION, True, 50.0, 50.0,
                  sub_out_id=outgoing, sub_in_id=incoming)
        )
    return timeline


def _slot_position(slot: int) -> tuple[float, float]:
    x = 8.0 + 84.0 * slot / 10.0
    y = 25.0 + 50.0 * ((slot * 7) % 11) / 10.0
    return x, y


def _emit_passes(
    rng: np.random.Generator,
    match_id: str,
    team: str,
    strength: float,
    timeline: _SlotTimeline,
    events: list[Event],
) -> None:
    n_attempts = max(120, int(rng.normal(250.0 + 95.0 * strength, 25.0)))
    success_prob = float(np.clip(0.72 + 0.13 * strength, 0.5, 0.95))
    concentration = max(0.8, 2.6 + 2.2 * strength)
    passer_pref = rng.dirichlet(np.full(11, concentration))
    recipient_pref = rng.dirichlet(np.full(11, concentration))

    halves = int(rng.binomial(n_attempts, 0.5))
    for period, count in ((Period.FIRST_HALF, halves), (Period.SECOND_HALF, n_attempts - halves)):
        seconds = np.sort(rng.uniform(0.0, _HALF_MAX, count))
        for second in seconds:
            slot = int(rng.choice(11, p=passer_pref))
            x0, y0 = _slot_position(slot)
            x = float(np.clip(x0 + rng.normal(0.0, 7.0), 0.0, 100.0))
            y = float(np.clip(y0 + rng.normal(0.0, 12.0), 0.0, 100.0))
            ok = bool(rng.random() < success_prob)
            recipient = None
            if ok:
                target = slot
                while target == slot:
                    target = int(rng.choice(11, p=recipient_pref))
                recipient = timeline.occupant(target, _timekey(period, float(second)))
            passer = timeline.occupant(slot, _timekey(period, float(second)))
            events.append(
                Event(match_id, team, passer, period, float(second), EventKind.PASS,
                      ok, x, y, recipient_id=recipient)
            )


def _emit_shots(
    rng: np.random.Generator,
    match_id: str,
    team: str,
    strength: float,
    goals: int,
    timeline: _SlotTimeline,
    events: list[Event],
) -> int:
    n_shots = max(goals, int(rng.normal(9.0 + 3.5 * strength, 2.0)))
    extra_on_target = int(rng.binomial(max(n_shots - goals, 0), 0.35))
    n_on_target = goals + extra_on_target
    flags = [True] * n_on_target + [False] * (n_shots - n_on_target)
    goal_flags = [True] * goals + [False] * (n_shots - goals)
    for i, second in enumerate(sorted(float(rng.uniform(0.0, _HALF_REGULATION)) for _ in range(n_shots))):
        period = Period.FIRST_HALF if rng.random() < 0.5 else Period.SECOND_HALF
        slot = int(rng.integers(5, 11))
        shooter = timeline.occupant(slot, _timekey(period, second))
        x = float(np.clip(88.0 + rng.normal(0.0, 5.0), 0.0, 100.0))
        y = float(np.clip(50.0 + rng.normal(0.0, 15.0), 0.0, 100.0))
        events.append(
            Event(match_id, team, shooter, period, second, EventKind.SHOT, flags[i], x, y)
        )
        if goal_flags[i]:
            events.append(
                Event(match_id, team, shooter, period, second + 0.5, EventKind.GOAL, True, x, y)
            )
            if rng.random() < 0.7:
                assist_slot = int(rng.integers(0, 11))
                assister = timeline.occupant(assist_slot, _timekey(period, second))
                events.append(
                    Event(match_id, team, assister, period, second + 0.25,
                          EventKind.ASSIST, True, x, y)
                )
    return n_on_target


def _emit_saves(
    rng: np.random.Generator,
    match_id: str,
    team: str,
    keeper: str,
    opponent_on_target: int,
    opponent_goals: int,
    events: list[Event],
) -> None:
    n_saves = max(0, opponent_on_target - opponent_goals)
    for second in sorted(float(rng.uniform(0.0, _HALF_REGULATION)) for _ in range(n_saves)):
        period = Period.FIRST_HALF if rng.random() < 0.5 else Period.SECOND_HALF
        events.append(
            Event(match_id, team, keeper, period, second, EventKind.SAVE, True, 3.0, 50.0)
        )


def _emit_cards(
    rng: np.random.Generator,
    match_id: str,
    team: str,
    starters: tuple[str, ...],
    events: list[Event],
) -> None:
    for _ in range(int(rng.poisson(1.6))):
        player = starters[int(rng.integers(0, 11))]
        second = float(rng.uniform(0.0, _HALF_REGULATION))
        period = Period.FIRST_HALF if rng.random() < 0.5 else Period.SECOND_HALF
        events.append(
            Event(match_id, team, player, period, second, EventKind.YELLOW_CARD, True, 50.0, 50.0)
        )
    if rng.random() < 0.05:
        player = starters[int(rng.integers(0, 11))]
        events.append(
            Event(match_id, team, player, Period.SECOND_HALF,
                  float(rng.uniform(0.0, _HALF_REGULATION)), EventKind.RED_CARD, True, 50.0, 50.0)
        )
