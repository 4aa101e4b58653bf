"""Player passing networks.

One directed, weighted 11-node network per (match, team, segment).
Substitutes are folded onto the starter slot of the player they
replaced (following replacement chains), so every network keeps the
same 11-slot structure. Edge weights count completed passes; node
positions are the mean origin coordinates of the slot's passes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnresolvableSubstitution
from .ingest import Event, EventKind, MatchRecord, Period

logger = logging.getLogger(__name__)

N_SLOTS = 11


class Segment(str, Enum):
    FULL = "full"
    FIRST_HALF = "1H"
    SECOND_HALF = "2H"

    def covers(self, period: Period) -> bool:
        if self is Segment.FULL:
            return True
        if self is Segment.FIRST_HALF:
            return period is Period.FIRST_HALF
        return period is Period.SECOND_HALF


@dataclass(frozen=True)
class PassingNetwork:
    match_id: str
    team_id: str
    segment: Segment
    slots: tuple[str, ...]
    weights: np.ndarray  # (11, 11) int64, w[i][j] = completed passes slot i -> slot j
    positions: tuple[tuple[float, float] | None, ...]  # mean pass-origin per slot

    @property
    def total_passes(self) -> int:
        return int(self.weights.sum())

    def to_dict(self) -> dict:
        return {
            "match_id": self.match_id,
            "team_id": self.team_id,
            "segment": self.segment.value,
            "slots": list(self.slots),
            "weights": self.weights.tolist(),
            "positions": [
                None if p is None else {"x": p[0], "y": p[1]} for p in self.positions
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PassingNetwork":
        return cls(
            match_id=data["match_id"],
            team_id=data["team_id"],
            segment=Segment(data["segment"]),
            slots=tuple(data["slots"]),
            weights=np.asarray(data["weights"], dtype=np.int64),
            positions=tuple(
                None if p is None else (float(p["x"]), float(p["y"]))
                for p in data["positions"]
            ),
        )


def build_substitution_map(
    events: list[Event], match: MatchRecord, team: str
) -> dict[str, int]:
    """Map every player who appeared for ``team`` to a starter slot index.

    Starters map to their own slot; a substitute inherits the slot of the
    player it replaced, following chains (A->B then B->C puts C on A's
    slot). Raises ``UnresolvableSubstitution`` when a sub_out player was
    never on the pitch.
    """
    starters = match.starters(team)
    slot_of: dict[str, int] = {p: i for i, p in enumerate(starters)}

    subs = [
        ev
        for ev in events
        if ev.kind is EventKind.SUBSTITUTION and ev.match_id == match.match_id and ev.team_id == team
    ]
    period_index = {Period.FIRST_HALF: 0, Period.SECOND_HALF: 1}
    subs.sort(key=lambda ev: (period_index[ev.period], ev.second))
    on_pitch = set(starters)
    for ev in subs:
        out_id, in_id = ev.sub_out_id, ev.sub_in_id
        if out_id not in on_pitch:
            raise UnresolvableSubstitution(
                f"match {match.match_id} team {team}: {out_id} substituted off but never on pitch"
            )
        slot_of[in_id] = slot_of[out_id]
        on_pitch.discard(out_id)
        on_pitch.add(in_id)
    return slot_of


def build_passing_network(
    events: list[Event], match: MatchRecord, team: str, segment: Segment
) -> PassingNetwork:
    """Build the network for one (match, team, segment).

    Only completed passes between distinct slots create edges; passes
    between players folded onto the same slot are dropped (counted in a
    debug log). Positions average the origin coordinates of all pass
    attempts by each slot within the segment.
    """
    slot_of = build_substitution_map(events, match, team)
    weights = np.zeros((N_SLOTS, N_SLOTS), dtype=np.int64)
    pos_sum = np.zeros((N_SLOTS, 2))
    pos_count = np.zeros(N_SLOTS, dtype=np.int64)
    folded_self_passes = 0

    for ev in events:
        if ev.match_id != match.match_id or ev.team_id != team:
            continue
        if ev.kind is not EventKind.PASS or not segment.covers(ev.period):
            continue
        origin_slot = slot_of.get(ev.player_id)
        if origin_slot is None:
            raise UnresolvableSubstitution(
                f"match {match.match_id} team {team}: {ev.player_id} appears without a substitution chain"
            )
        pos_sum[origin_slot] += (ev.x, ev.y)
        pos_count[origin_slot] += 1
        if not ev.success:
            continue
        target_slot = slot_of.get(ev.recipient_id)
        if target_slot is None:
            raise UnresolvableSubstitution(
                f"match {match.match_id} team {team}: recipient {ev.recipient_id} unmapped"
            )
        if target_slot == origin_slot:
            folded_self_passes += 1
            continue
        weights[origin_slot, target_slot] += 1

    if folded_self_passes:
        logger.debug(
            "match %s team %s segment %s: dropped %d same-slot passes",
            match.match_id,
            team,
            segment.value,
            folded_self_passes,
        )

    positions = tuple(
        (pos_sum[i, 0] / pos_count[i], pos_sum[i, 1] / pos_count[i]) if pos_count[i] else None
        for i in range(N_SLOTS)
    )
    return PassingNetwork(
        match_id=match.match_id,
        team_id=team,
        segment=segment,
        slots=match.starters(team),
        weights=weights,
        positions=positions,
    )


def build_all_networks(
    events: list[Event], matches: list[MatchRecord]
) -> list[PassingNetwork]:
    """All (match, team, segment) networks, in deterministic order."""
    by_match: dict[str, list[Event]] = {}
    for ev in events:
        by_match.setdefault(ev.match_id, []).append(ev)
    networks = []
    for match in matches:
        match_events = by_match.get(match.match_id, [])
        for team in (match.home_team_id, match.away_team_id):
            for segment in (Segment.FULL, Segment.FIRST_HALF, Segment.SECOND_HALF):
                networks.append(build_passing_network(match_events, match, team, segment))
    return networks
