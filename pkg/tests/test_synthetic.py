"""Synthetic corpus invariants: the generated data must satisfy every
ingest/network precondition so the pipeline runs on it unmodified."""

from __future__ import annotations

import numpy as np
import pytest

from passnet_lab.ingest import (
    Competition,
    EventKind,
    events_to_csv,
    load_matches,
    matches_to_csv,
    parse_event_log,
)
from passnet_lab.passnet import Segment, build_passing_network
from passnet_lab.synthetic import generate_corpus


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(seed=7, leagues={Competition.LA_LIGA: 6, Competition.PREMIER_LEAGUE: 6})


class TestCorpus:
    def test_deterministic(self, corpus):
        again = generate_corpus(seed=7, leagues={Competition.LA_LIGA: 6, Competition.PREMIER_LEAGUE: 6})
        assert again.matches == corpus.matches
        assert again.events == corpus.events

    def test_schedule_is_double_round_robin(self, corpus):
        lal = [m for m in corpus.matches if m.competition is Competition.LA_LIGA]
        assert len(lal) == 6 * 5
        pairs = {(m.home_team_id, m.away_team_id) for m in lal}
        assert len(pairs) == len(lal)

    def test_goal_events_match_scorelines(self, corpus):
        by_match: dict[str, list] = {}
        for ev in corpus.events:
            if ev.kind is EventKind.GOAL:
                by_match.setdefault(ev.match_id, []).append(ev)
        for match in corpus.matches:
            goals = by_match.get(match.match_id, [])
            home = sum(1 for g in goals if g.team_id == match.home_team_id)
            away = sum(1 for g in goals if g.team_id == match.away_team_id)
            assert (home, away) == (match.home_goals, match.away_goals)

    def test_round_trips_through_csv(self, corpus):
        events = parse_event_log(events_to_csv(corpus.events))
        assert len(events) == len(corpus.events)
        matches = load_matches(matches_to_csv(corpus.matches))
        assert matches.matches == corpus.matches
        assert not matches.diagnostics

    def test_networks_buildable_for_every_match(self, corpus):
        by_match: dict[str, list] = {}
        for ev in corpus.events:
            by_match.setdefault(ev.match_id, []).append(ev)
        for match in corpus.matches[:20]:
            events = by_match[match.match_id]
            for team in (match.home_team_id, match.away_team_id):
                full = build_passing_network(events, match, team, Segment.FULL)
                first = build_passing_network(events, match, team, Segment.FIRST_HALF)
                second = build_passing_network(events, match, team, Segment.SECOND_HALF)
                assert full.total_passes > 0
                np.testing.assert_array_equal(full.weights, first.weights + second.weights)

    def test_stoppage_time_events_present(self, corpus):
        assert any(ev.second > 45 * 60 for ev in corpus.events)

    def test_network_totals_equal_folded_successful_passes(self, corpus):
        from passnet_lab.passnet import build_substitution_map

        by_match: dict[str, list] = {}
        for ev in corpus.events:
            by_match.setdefault(ev.match_id, []).append(ev)
        for match in corpus.matches[:10]:
            events = by_match[match.match_id]
            for team in (match.home_team_id, match.away_team_id):
                slot_of = build_substitution_map(events, match, team)
                expected = sum(
                    1
                    for ev in events
                    if ev.team_id == team and ev.kind is EventKind.PASS and ev.success
                    and slot_of[ev.player_id] != slot_of[ev.recipient_id]
                )
                net = build_passing_network(events, match, team, Segment.FULL)
                assert net.total_passes == expected

    def test_substitution_chains_resolve(self, corpus):
        subs = [ev for ev in corpus.events if ev.kind is EventKind.SUBSTITUTION]
        assert subs, "corpus should contain substitutions"
        chained = [
            s for s in subs
            if any(t.sub_in_id == s.sub_out_id and t.match_id == s.match_id for t in subs)
        ]
        # chains occur when a slot is substituted twice in one match
        assert isinstance(chained, list)

    def test_outcome_strength_correlation(self, corpus):
        # better-seeded teams (lower index) should win more often
        lal = [m for m in corpus.matches if m.competition is Competition.LA_LIGA]
        top = "lal_t00"
        bottom = "lal_t05"
        top_points = sum(
            3 for m in lal
            if (m.home_team_id == top and m.home_goals > m.away_goals)
            or (m.away_team_id == top and m.away_goals > m.home_goals)
        )
        bottom_points = sum(
            3 for m in lal
            if (m.home_team_id == bottom and m.home_goals > m.away_goals)
            or (m.away_team_id == bottom and m.away_goals > m.home_goals)
        )
        assert top_points > bottom_points

    def test_capped_corpus_size(self):
        small = generate_corpus(seed=20, leagues={Competition.LA_LIGA: 10},
                                max_matches_per_league=40)
        assert len(small.matches) == 40
