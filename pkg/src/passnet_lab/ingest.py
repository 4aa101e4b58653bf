"""Event and match ingestion.

Parses raw event streams (canonical CSV or Wyscout-v2-style JSON) and
match metadata into validated records, and applies outcome filtering.
The Wyscout field mapping is documented in ``docs/wyscout_mapping.md``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import date as Date
from enum import Enum

from .errors import DuplicateMatch, MalformedInput, MissingStarters

logger = logging.getLogger(__name__)

COORD_MIN = 0.0
COORD_MAX = 100.0
COORD_CLAMP_TOLERANCE = 0.5

EVENTS_CSV_HEADER = [
    "match_id",
    "team_id",
    "player_id",
    "period",
    "second",
    "kind",
    "success",
    "x",
    "y",
    "recipient_id",
    "sub_out_id",
    "sub_in_id",
]

MATCHES_CSV_HEADER = [
    "match_id",
    "competition",
    "date",
    "home_team_id",
    "away_team_id",
    "home_goals",
    "away_goals",
    "home_starters",
    "away_starters",
]


class Period(str, Enum):
    FIRST_HALF = "1H"
    SECOND_HALF = "2H"


class EventKind(str, Enum):
    PASS = "Pass"
    SHOT = "Shot"
    SAVE = "Save"
    FOUL = "Foul"
    YELLOW_CARD = "YellowCard"
    RED_CARD = "RedCard"
    SUBSTITUTION = "Substitution"
    GOAL = "Goal"
    ASSIST = "Assist"
    OTHER = "Other"


class Competition(str, Enum):
    LA_LIGA = "LaLiga"
    PREMIER_LEAGUE = "PremierLeague"
    SERIE_A = "SerieA"
    LIGUE_1 = "Ligue1"
    BUNDESLIGA = "Bundesliga"
    WORLD_CUP = "WorldCup"
    EURO = "Euro"


DOMESTIC_LEAGUES = (
    Competition.LA_LIGA,
    Competition.PREMIER_LEAGUE,
    Competition.SERIE_A,
    Competition.LIGUE_1,
    Competition.BUNDESLIGA,
)


class Outcome(int, Enum):
    HOME_LOSS = 0
    HOME_WIN = 1
    DRAW = 2


@dataclass(frozen=True)
class Event:
    """One atomic match event.

    ``recipient_id`` is present exactly for completed passes; the
    substitution ids exactly for substitution events.
    """

    match_id: str
    team_id: str
    player_id: str
    period: Period
    second: float
    kind: EventKind
    success: bool
    x: float
    y: float
    recipient_id: str | None = None
    sub_out_id: str | None = None
    sub_in_id: str | None = None

    def __post_init__(self):
        if self.second < 0:
            raise MalformedInput(f"negative event second {self.second}")
        for axis, value in (("x", self.x), ("y", self.y)):
            if not COORD_MIN <= value <= COORD_MAX:
                raise MalformedInput(f"coordinate {axis}={value} outside [0,100]")
        is_completed_pass = self.kind is EventKind.PASS and self.success
        if is_completed_pass and self.recipient_id is None:
            raise MalformedInput("completed pass without recipient")
        if not is_completed_pass and self.recipient_id is not None:
            raise MalformedInput("recipient on a non-completed-pass event")
        is_sub = self.kind is EventKind.SUBSTITUTION
        if is_sub and (self.sub_out_id is None or self.sub_in_id is None):
            raise MalformedInput("substitution without sub_out/sub_in")
        if not is_sub and (self.sub_out_id is not None or self.sub_in_id is not None):
            raise MalformedInput("substitution ids on a non-substitution event")


@dataclass(frozen=True)
class MatchRecord:
    match_id: str
    competition: Competition
    date: Date
    home_team_id: str
    away_team_id: str
    home_goals: int
    away_goals: int
    home_starters: tuple[str, ...]
    away_starters: tuple[str, ...]

    def __post_init__(self):
        if self.home_goals < 0 or self.away_goals < 0:
            raise MalformedInput(f"match {self.match_id}: negative goal count")

    def starters(self, team_id: str) -> tuple[str, ...]:
        if team_id == self.home_team_id:
            return self.home_starters
        if team_id == self.away_team_id:
            return self.away_starters
        raise MalformedInput(f"team {team_id} not in match {self.match_id}")

    @property
    def is_draw(self) -> bool:
        return self.home_goals == self.away_goals

    def outcome(self) -> Outcome:
        if self.home_goals > self.away_goals:
            return Outcome.HOME_WIN
        if self.home_goals < self.away_goals:
            return Outcome.HOME_LOSS
        return Outcome.DRAW


@dataclass
class LoadResult:
    matches: list[MatchRecord]
    diagnostics: list[MissingStarters] = field(default_factory=list)


def _clamp_coordinate(raw: float, context: str) -> float:
    if COORD_MIN <= raw <= COORD_MAX:
        return raw
    if COORD_MIN - COORD_CLAMP_TOLERANCE <= raw <= COORD_MAX + COORD_CLAMP_TOLERANCE:
        return min(max(raw, COORD_MIN), COORD_MAX)
    raise MalformedInput(f"{context}: coordinate {raw} outside [0,100] beyond clamp tolerance")


def _order_events(events: list[Event]) -> list[Event]:
    """Stable (period, second) sort within each match, match blocks in first-seen order."""
    match_order: dict[str, int] = {}
    for ev in events:
        match_order.setdefault(ev.match_id, len(match_order))
    period_index = {Period.FIRST_HALF: 0, Period.SECOND_HALF: 1}
    return sorted(
        events,
        key=lambda ev: (match_order[ev.match_id], period_index[ev.period], ev.second),
    )


# -- canonical CSV ----------------------------------------------------------


def _parse_csv_events(stream: bytes) -> list[Event]:
    text = stream.decode("utf-8")
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    if header != EVENTS_CSV_HEADER:
        raise MalformedInput(f"bad events CSV header: {header}")
    events = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(EVENTS_CSV_HEADER):
            raise MalformedInput(f"events CSV line {lineno}: expected {len(EVENTS_CSV_HEADER)} columns")
        ctx = f"events CSV line {lineno}"
        try:
            period = Period(row[3])
            second = float(row[4])
            kind = EventKind(row[5]) if row[5] in EventKind._value2member_map_ else EventKind.OTHER
            success = _parse_bool(row[6], ctx)
            x = _clamp_coordinate(float(row[7]), ctx)
            y = _clamp_coordinate(float(row[8]), ctx)
        except ValueError as exc:
            raise MalformedInput(f"{ctx}: {exc}") from exc
        events.append(
            Event(
                match_id=row[0],
                team_id=row[1],
                player_id=row[2],
                period=period,
                second=second,
                kind=kind,
                success=success,
                x=x,
                y=y,
                recipient_id=row[9] or None,
                sub_out_id=row[10] or None,
                sub_in_id=row[11] or None,
            )
        )
    return events


def _parse_bool(raw: str, context: str) -> bool:
    lowered = raw.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise MalformedInput(f"{context}: bad boolean {raw!r}")


def events_to_csv(events: list[Event]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVENTS_CSV_HEADER)
    for ev in events:
        writer.writerow(
            [
                ev.match_id,
                ev.team_id,
                ev.player_id,
                ev.period.value,
                repr(ev.second),
                ev.kind.value,
                "true" if ev.success else "false",
                repr(ev.x),
                repr(ev.y),
                ev.recipient_id or "",
                ev.sub_out_id or "",
                ev.sub_in_id or "",
            ]
        )
    return buf.getvalue().encode("utf-8")


# -- Wyscout-style JSON ------------------------------------------------------

# Event-id and tag-id mapping; see docs/wyscout_mapping.md for the table
# and the conventions (recipient inference, own goals, card tags).
_WYSCOUT_KIND_BY_EVENT_ID = {2: EventKind.FOUL, 8: EventKind.PASS, 9: EventKind.SAVE, 10: EventKind.SHOT}
_TAG_ACCURATE = 1801
_TAG_INACCURATE = 1802
_TAG_GOAL = 101
_TAG_OWN_GOAL = 102
_TAG_ASSIST = 301
_TAG_RED_CARD = 1701
_TAG_YELLOW_CARD = 1702
_TAG_SECOND_YELLOW = 1703


def _parse_wyscout_events(stream: bytes) -> list[Event]:
    try:
        payload = json.loads(stream.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"bad wyscout JSON: {exc}") from exc
    if isinstance(payload, dict):
        payload = payload.get("events")
    if payload is None or not isinstance(payload, list):
        raise MalformedInput("wyscout JSON must be a list of events or {'events': [...]}")

    raw_sorted = sorted(
        range(len(payload)),
        key=lambda i: (
            str(payload[i].get("matchId")),
            0 if payload[i].get("matchPeriod") == "1H" else 1,
            float(payload[i].get("eventSec", 0.0)),
        ),
    )
    ordered = [payload[i] for i in raw_sorted]

    teams_by_match: dict[str, set[str]] = {}
    for raw in ordered:
        teams_by_match.setdefault(str(raw.get("matchId")), set()).add(str(raw.get("teamId")))

    events: list[Event] = []
    demoted_passes = 0
    for idx, raw in enumerate(ordered):
        match_id = str(raw.get("matchId"))
        team_id = str(raw.get("teamId"))
        player_id = str(raw.get("playerId"))
        period = Period.FIRST_HALF if raw.get("matchPeriod") == "1H" else Period.SECOND_HALF
        try:
            second = float(raw.get("eventSec", 0.0))
        except (TypeError, ValueError) as exc:
            raise MalformedInput(f"wyscout event {idx}: bad eventSec") from exc
        tags = {t.get("id") for t in raw.get("tags", []) if isinstance(t, dict)}
        positions = raw.get("positions") or [{}]
        ctx = f"wyscout event {idx}"
        x = _clamp_coordinate(float(positions[0].get("x", 0.0)), ctx)
        y = _clamp_coordinate(float(positions[0].get("y", 0.0)), ctx)

        kind = _WYSCOUT_KIND_BY_EVENT_ID.get(raw.get("eventId"), EventKind.OTHER)
        if kind is EventKind.FOUL:
            if _TAG_RED_CARD in tags or _TAG_SECOND_YELLOW in tags:
                kind = EventKind.RED_CARD
            elif _TAG_YELLOW_CARD in tags:
                kind = EventKind.YELLOW_CARD
        if _TAG_ACCURATE in tags or _TAG_INACCURATE in tags:
            success = _TAG_ACCURATE in tags
        else:
            success = True

        recipient = None
        if kind is EventKind.PASS and success:
            recipient = _infer_recipient(ordered, idx, match_id, team_id)
            if recipient is None:
                success = False
                demoted_passes += 1

        events.append(
            Event(
                match_id=match_id,
                team_id=team_id,
                player_id=player_id,
                period=period,
                second=second,
                kind=kind,
                success=success,
                x=x,
                y=y,
                recipient_id=recipient,
            )
        )
        if kind is EventKind.PASS and _TAG_ASSIST in tags:
            events.append(
                Event(match_id, team_id, player_id, period, second, EventKind.ASSIST, True, x, y)
            )
        if _TAG_GOAL in tags and kind is EventKind.SHOT:
            events.append(
                Event(match_id, team_id, player_id, period, second, EventKind.GOAL, True, x, y)
            )
        if _TAG_OWN_GOAL in tags:
            credited = _other_team(teams_by_match[match_id], team_id)
            events.append(
                Event(match_id, credited, player_id, period, second, EventKind.GOAL, True, x, y)
            )
    if demoted_passes:
        logger.warning("wyscout: %d accurate passes demoted (no inferable recipient)", demoted_passes)
    return events


def _infer_recipient(ordered: list[dict], idx: int, match_id: str, team_id: str) -> str | None:
    for nxt in ordered[idx + 1 :]:
        if str(nxt.get("matchId")) != match_id:
            break
        if str(nxt.get("teamId")) != team_id:
            continue
        player = nxt.get("playerId")
        if player not in (None, 0, "0"):
            return str(player)
        return None
    return None


def _other_team(teams: set[str], team_id: str) -> str:
    others = sorted(t for t in teams if t != team_id)
    return others[0] if others else team_id


class EventFormat(str, Enum):
    WYSCOUT_JSON = "wyscout_json"
    CANONICAL_CSV = "canonical_csv"


def parse_event_log(stream: bytes, format: EventFormat | str = EventFormat.CANONICAL_CSV) -> list[Event]:
    """Parse an event stream into ordered Events.

    Unmappable kinds become ``Other``; events are returned in stable
    (period, second) order within each match.
    """
    fmt = EventFormat(format)
    if fmt is EventFormat.CANONICAL_CSV:
        events = _parse_csv_events(stream)
    else:
        events = _parse_wyscout_events(stream)
    return _order_events(events)


# -- matches -----------------------------------------------------------------


def load_matches(stream: bytes) -> LoadResult:
    """Parse the matches CSV.

    Matches without a valid 11-player starting list for both sides are
    rejected individually and reported in ``diagnostics``; structural
    problems raise ``MalformedInput``/``DuplicateMatch``.
    """
    text = stream.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return LoadResult(matches=[])
    if header != MATCHES_CSV_HEADER:
        raise MalformedInput(f"bad matches CSV header: {header}")

    seen: set[str] = set()
    result = LoadResult(matches=[])
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(MATCHES_CSV_HEADER):
            raise MalformedInput(f"matches CSV line {lineno}: expected {len(MATCHES_CSV_HEADER)} columns")
        match_id = row[0]
        if match_id in seen:
            raise DuplicateMatch(f"duplicate match_id {match_id!r}")
        seen.add(match_id)
        try:
            competition = Competition(row[1])
            match_date = Date.fromisoformat(row[2])
            home_goals = int(row[5])
            away_goals = int(row[6])
        except ValueError as exc:
            raise MalformedInput(f"matches CSV line {lineno}: {exc}") from exc

        ok = True
        starters: list[tuple[str, ...]] = []
        for col, side in ((row[7], "home"), (row[8], "away")):
            ids = tuple(p for p in col.split(";") if p)
            if len(ids) != 11 or len(set(ids)) != 11:
                diag = MissingStarters(match_id, f"{side} starters list invalid ({len(ids)} listed)")
                result.diagnostics.append(diag)
                logger.warning("skipping %s", diag)
                ok = False
                break
            starters.append(ids)
        if not ok:
            continue
        result.matches.append(
            MatchRecord(
                match_id=match_id,
                competition=competition,
                date=match_date,
                home_team_id=row[3],
                away_team_id=row[4],
                home_goals=home_goals,
                away_goals=away_goals,
                home_starters=starters[0],
                away_starters=starters[1],
            )
        )
    return result


def matches_to_csv(matches: list[MatchRecord]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MATCHES_CSV_HEADER)
    for m in matches:
        writer.writerow(
            [
                m.match_id,
                m.competition.value,
                m.date.isoformat(),
                m.home_team_id,
                m.away_team_id,
                str(m.home_goals),
                str(m.away_goals),
                ";".join(m.home_starters),
                ";".join(m.away_starters),
            ]
        )
    return buf.getvalue().encode("utf-8")


def filter_outcomes(matches: list[MatchRecord], include_draws: bool) -> list[MatchRecord]:
    """Drop drawn matches unless ``include_draws``; order is preserved."""
    if include_draws:
        return list(matches)
    return [m for m in matches if not m.is_draw]
