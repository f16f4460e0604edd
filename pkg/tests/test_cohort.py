from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betrayal.cohort import (
    TaskInstance,
    build_cohort,
    collect_relations,
    class_balance,
    control_window,
    design_matrix,
    false_positive_proximity,
    featurize,
    instances_from_csv,
    instances_to_csv,
    label_imminent_task,
    label_longterm_task,
    match_controls,
)
from betrayal.errors import ImbalanceError, InsufficientControls
from betrayal.gamelog import game_from_dict
from betrayal.lingcues import feature_names, load_lexicons
from betrayal.relations import BetrayalRecord, FriendshipSpan

from helpers import B, V, alliance_dict, alliance_game

LEX = load_lexicons()


def span(length, start, game="g1", dyad=("AUSTRIA", "RUSSIA"), first=None):
    first = start if first is None else first
    return FriendshipSpan(dyad, first, first + length - 1, (), game, start)


def betrayal(length, start, game="g1", dyad=("AUSTRIA", "RUSSIA"), betrayer="RUSSIA"):
    s = span(length, start, game, dyad)
    victim = dyad[0] if betrayer == dyad[1] else dyad[1]
    return BetrayalRecord(s, betrayer, victim, s.last_friendly_season + 1, ())


# ---------------------------------------------------------------- matching


def test_match_example_by_exhaustive_distance():
    b = betrayal(5, 3)
    cands = [span(5, 9, "g2"), span(2, 3, "g3"), span(5, 3, "g4")]
    pairs, _ = match_controls([b], cands)
    assert (pairs[0].control.length_seasons, pairs[0].control.start_offset) == (5, 3)
    # oracle: evaluate every candidate's z-scored L1 distance directly
    pts = np.array([[5, 3], [5, 9], [2, 3], [5, 3]], float)
    z = (pts - pts.mean(0)) / pts.std(0)
    d = np.abs(z[1:] - z[0]).sum(1)
    assert pairs[0].distance == pytest.approx(d.min())
    assert cands[int(np.argmin(d))] is pairs[0].control


def test_single_candidate_always_taken():
    b = betrayal(3, 0)
    far = span(10, 40, "g2")
    pairs, _ = match_controls([b], [far])
    assert pairs[0].control is far


def test_insufficient_controls():
    with pytest.raises(InsufficientControls):
        match_controls([betrayal(3, 0), betrayal(4, 1, "g2")], [span(3, 0, "g3")])


def test_ties_break_on_offset_gap_then_id():
    b = betrayal(4, 5)
    # identical covariates tie on distance and offset gap; the smaller id wins
    a1, a2 = span(4, 6, "gB"), span(4, 6, "gA")
    pairs, _ = match_controls([b], [a1, a2])
    assert pairs[0].control.game_id == "gA"


def test_strict_balance():
    bs = [betrayal(3 + i % 2, i, f"b{i}") for i in range(12)]
    cands = [span(12 + i % 3, 60 + i, f"c{i}") for i in range(12)]
    pairs, report = match_controls(bs, cands)
    assert not report.balanced
    with pytest.raises(ImbalanceError):
        match_controls(bs, cands, strict_balance=True)


_cov = st.tuples(st.integers(3, 12), st.integers(0, 30))


@settings(max_examples=60, deadline=None)
@given(st.lists(_cov, min_size=1, max_size=8), st.lists(_cov, min_size=8, max_size=14), st.integers(0, 5))
def test_matching_injective_and_deterministic(bcov, ccov, seed):
    bs = [betrayal(l, s, f"b{i}") for i, (l, s) in enumerate(bcov)]
    cs = [span(l, s, f"c{i}") for i, (l, s) in enumerate(ccov)]
    pairs, report = match_controls(bs, cs, seed)
    ids = [p.control.span_id for p in pairs]
    assert len(set(ids)) == len(ids) == len(bs)
    again, _ = match_controls(bs, cs, seed)
    assert [(p.control.span_id, p.control_betrayer) for p in again] == \
        [(p.control.span_id, p.control_betrayer) for p in pairs]
    assert all(p.control_betrayer in p.control.dyad and p.control_victim in p.control.dyad for p in pairs)
    assert 0 <= report.p_length <= 1 and 0 <= report.p_start_offset <= 1
    # greedy order: longest friendships pick first
    lengths = [p.betrayal.span.length_seasons for p in pairs]
    assert lengths == sorted(lengths, reverse=True)


# ---------------------------------------------------------------- long-term task


def test_six_season_friendship_gives_five_instances():
    b = betrayal(6, 2)
    pairs, _ = match_controls([b], [span(8, 0, "g2")])
    inst = label_longterm_task(pairs)
    pos = [i for i in inst if i.label == 1]
    assert sorted(i.t for i in pos) == [2, 3, 4, 5, 6]
    neg = [i for i in inst if i.label == 0]
    assert sorted(i.t for i in neg) == [2, 3, 4, 5, 6]
    assert all(i.group_key == i.game_id for i in inst)


def test_empty_window_yields_nothing():
    s = FriendshipSpan(("AUSTRIA", "RUSSIA"), 4, 4, (), "g", 4)
    b = BetrayalRecord(s, "RUSSIA", "AUSTRIA", 5, ())
    pairs, _ = match_controls([b], [span(3, 0, "g2")])
    assert label_longterm_task(pairs) == []


def test_control_window_is_clipped_to_control_span():
    pairs, _ = match_controls([betrayal(10, 0)], [span(3, 0, "g2")])
    assert list(control_window(pairs[0])) == [0, 1]


@settings(max_examples=40, deadline=None)
@given(st.lists(_cov, min_size=1, max_size=6), st.lists(_cov, min_size=6, max_size=10))
def test_longterm_never_uses_t0_or_t1(bcov, ccov):
    bs = [betrayal(l, s, f"b{i}") for i, (l, s) in enumerate(bcov)]
    cs = [span(l, s, f"c{i}") for i, (l, s) in enumerate(ccov)]
    inst = label_longterm_task(match_controls(bs, cs)[0])
    assert all(i.t >= 2 for i in inst)
    assert all(i.label in (0, 1) for i in inst)


# ---------------------------------------------------------------- imminent task


def test_four_season_friendship_window():
    inst = label_imminent_task([betrayal(4, 0)])
    assert sorted((i.t, i.label) for i in inst) == [(2, 1), (3, 0), (4, 0)]


def test_short_friendships_are_excluded():
    assert label_imminent_task([betrayal(3, 0)]) == []


@given(st.lists(st.tuples(st.integers(3, 12), st.integers(0, 20)), max_size=10))
def test_imminent_positives_bounded(cov):
    bs = [betrayal(l, s, f"g{i}") for i, (l, s) in enumerate(cov)]
    inst = label_imminent_task(bs)
    qualifying = sum(1 for b in bs if b.span.length_seasons >= 4)
    assert class_balance(inst)["positive"] == qualifying
    assert class_balance(inst)["n"] == sum(b.span.length_seasons - 1 for b in bs if b.span.length_seasons >= 4)


def test_false_positive_proximity():
    mk = lambda t, label: TaskInstance("g", ("A", "B"), 10 - t, t, label, "A", "B", "s")  # noqa: E731
    inst = [mk(2, 1), mk(3, 0), mk(4, 0), mk(5, 0)]
    rep = false_positive_proximity(inst, [1, 1, 1, 0])
    assert rep == {"false_positives": 2, "near": 1, "share": 0.5}


# ---------------------------------------------------------------- cohort assembly and features


def test_alliance_cohort_needs_controls():
    with pytest.raises(InsufficientControls):
        build_cohort([alliance_game()])


def betrayals_of(game):
    return collect_relations([game])[0]


def _chatty_alliance():
    msgs = {
        2: [{"from": B, "to": V, "text": "Great news, thanks friend.", "admin": False}],
        3: [{"from": V, "to": B, "text": "I will attack next year.", "admin": False},
            {"from": "GM", "to": B, "text": "reminder", "admin": True}],
    }
    return game_from_dict(alliance_dict(messages=msgs))


def test_featurize_and_drop_silent():
    game = _chatty_alliance()
    (bet,) = betrayals_of(game)
    raw = label_imminent_task([bet])
    assert sorted(i.season_index for i in raw) == [2, 3, 4]
    kept = featurize(raw, [game], LEX)
    assert sorted(i.season_index for i in kept) == [2, 3]
    all_ = featurize(raw, [game], LEX, drop_silent=False)
    assert len(all_) == 3
    names = feature_names()
    s2 = next(i for i in kept if i.season_index == 2)
    assert s2.features[names.index("B:n_messages")] == 1
    assert s2.features[names.index("V:n_messages")] == 0
    assert s2.features[names.index("imbalance:positive_sentiment")] == 1.0
    s3 = next(i for i in kept if i.season_index == 3)
    # the admin message is ignored
    assert s3.features[names.index("V:n_messages")] == 1 and s3.features[names.index("B:n_messages")] == 0


def test_design_matrix_and_csv_round_trip():
    game = _chatty_alliance()
    inst = featurize(label_imminent_task(betrayals_of(game)), [game], LEX)
    X, y, groups, names = design_matrix(inst)
    assert X.shape == (2, 32) and len(names) == 32
    assert all(n.startswith(("B:", "V:")) for n in names)
    assert list(groups) == ["alliance", "alliance"]
    text = instances_to_csv(inst)
    assert text.splitlines()[0].startswith("game_id,dyad,season,t,label,betrayer,victim,B:n_messages")
    back = instances_from_csv(text)
    for a, b in zip(inst, back):
        assert (a.game_id, a.dyad, a.season_index, a.t, a.label, a.betrayer, a.victim) == \
            (b.game_id, b.dyad, b.season_index, b.t, b.label, b.betrayer, b.victim)
        assert np.array_equal(a.features, b.features)
    assert instances_to_csv(back) == text
