from __future__ import annotations

import numpy as np
import pytest

from betrayal.cohort import collect_relations
from betrayal.errors import InvalidSpec
from betrayal.gamelog import dump_game, filter_messages
from betrayal.lingcues import load_lexicons, tokenize
from betrayal.synth import (
    SynthSpec,
    filler_vocabulary,
    generate_corpus,
    imminent_positive_rate,
    length_distribution,
)

LEX = load_lexicons()


@pytest.fixture(scope="module")
def small():
    return generate_corpus(SynthSpec(n_games=8, seed=1))


def test_hazard_zero_means_no_betrayals():
    c = generate_corpus(SynthSpec(n_games=6, hazard=0.0, seed=3))
    assert c.truth()["n_betrayals"] == 0
    assert c.friendships
    assert collect_relations(c.games)[0] == []


def test_hazard_one_betrays_every_friendship():
    c = generate_corpus(SynthSpec(n_games=6, hazard=1.0, fade=0.0, min_friendship=4, seed=3))
    assert c.friendships and all(f.outcome == "betrayal" and f.length == 4 for f in c.friendships)
    assert len(collect_relations(c.games)[0]) == len(c.friendships)


@pytest.mark.parametrize("kw", [
    dict(n_games=0), dict(hazard=-0.1), dict(hazard=1.2), dict(hazard=0.7, fade=0.5),
    dict(seasons=(10, 5)), dict(seasons=(12, 12)), dict(positive_effect=0.0), dict(min_friendship=0),
    dict(min_friendship=5, max_friendship=4), dict(positive_rate=0.9, positive_effect=1.5),
    dict(planning_rate=0.9, planning_effect=2.0), dict(messages_per_season=0.0),
])
def test_invalid_spec(kw):
    with pytest.raises(InvalidSpec):
        SynthSpec(**kw)


def test_spec_dict_round_trip():
    spec = SynthSpec(n_games=3, hazard=0.2, seasons=(25, 30))
    assert SynthSpec.from_dict(spec.to_dict()) == spec
    assert SynthSpec.from_dict({"hazard": "0.25", "seasons": "24,26"}).seasons == (24, 26)
    with pytest.raises(InvalidSpec):
        SynthSpec.from_dict({"hazards": 0.1})


def test_null_spec():
    n = SynthSpec().null()
    assert (n.positive_effect, n.planning_effect, n.betrayer_politeness_effect, n.victim_politeness_effect) == (1,) * 4


def test_deterministic(small):
    again = generate_corpus(SynthSpec(n_games=8, seed=1))
    assert [dump_game(g) for g in again.games] == [dump_game(g) for g in small.games]
    assert again.truth() == small.truth()


def test_relations_recover_planted_betrayals(small):
    planted = {(f.game_id, f.dyad, f.last, f.betrayer) for f in small.betrayals}
    found = {(b.game_id, b.span.dyad, b.span.last_friendly_season, b.betrayer)
             for b in collect_relations(small.games)[0]}
    assert planted and found == planted


def test_messages_are_player_traffic(small):
    for g in small.games:
        assert filter_messages(g) == g


def test_filler_avoids_cue_vocabulary():
    filler = filler_vocabulary(LEX)
    cue_tokens = set()
    for group in (LEX.connectives, LEX.claim_markers, LEX.premise_markers, LEX.subjectivity_phrases,
                  LEX.sentiment_lexicon):
        for p in group:
            cue_tokens.update(tokenize(p))
    assert filler and not set(filler) & cue_tokens


def test_length_distribution_sums_to_one():
    d = length_distribution(SynthSpec())
    assert sum(d["betrayal"].values()) + sum(d["fade"].values()) == pytest.approx(1.0)


def test_imminent_rate_matches_simulation():
    spec = SynthSpec()
    rng = np.random.default_rng(0)
    pos = tot = 0
    for _ in range(200_000):
        a = spec.min_friendship
        while True:
            u = rng.random()
            if u < spec.hazard:
                if a >= 4:
                    pos += 1
                    tot += a - 1
                break
            if a == spec.max_friendship or u < spec.hazard + spec.fade:
                break
            a += 1
    assert imminent_positive_rate(spec) == pytest.approx(pos / tot, rel=0.01)
