from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from betrayal.errors import ConsistencyError, EmptyCorpus, RecordSyntaxError, SchemaError
from betrayal.gamelog import (
    BROADCAST,
    Move,
    Order,
    corpus_statistics,
    dump_game,
    filter_messages,
    game_to_dict,
    load_corpus,
    nearest_rank,
    parse_game_log,
    standard_only,
    summarize,
    write_corpus,
)

from helpers import alliance_dict, game_dict, jsonl, order, season


def msg(a, b, text="hello there.", admin=False):
    return {"from": a, "to": b, "text": text, "admin": admin}


def test_minimal_record():
    g = parse_game_log(json.dumps(game_dict([season(0)])))
    assert len(g.seasons) == 1 and g.seasons[0].orders == () and g.seasons[0].messages == ()


def test_season_indices_follow_year_and_phase():
    g = parse_game_log(json.dumps(game_dict([season(0), season(1)])))
    assert [s.index for s in g.seasons] == [0, 1]
    assert [(s.year, s.phase) for s in g.seasons] == [(1901, "spring"), (1901, "fall")]


def test_order_parse_with_custom_power_names():
    powers = ["AUS", "ENG", "FRA", "GER", "ITA", "RUS", "TUR"]
    s = season(0, [{"power": "GER", "unit": "army", "location": "MUN", "action": {"move": "TYR"}}])
    g = parse_game_log(json.dumps(game_dict([s], powers=powers)))
    assert g.seasons[0].orders[0] == Order("GER", "army", "MUN", Move("TYR"))


def test_syntax_error_has_line_and_column():
    with pytest.raises(RecordSyntaxError) as exc:
        parse_game_log('{"game_id": "x", ', line=7)
    assert exc.value.line == 7 and exc.value.col > 0


def test_bad_utf8():
    with pytest.raises(RecordSyntaxError):
        parse_game_log(b"\xff\xfe")


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("game_id"), "game_id"),
        (lambda d: d.update(powers=["A"]), "powers"),
        (lambda d: d["seasons"][0].update(phase="winter"), "seasons[0].phase"),
        (lambda d: d["seasons"][0].update(year="1901"), "seasons[0].year"),
        (lambda d: d["seasons"][0].update(orders=[{"power": "ITALY", "unit": "tank", "location": "ROM",
                                                  "action": {"hold": None}}]), "seasons[0].orders[0].unit"),
        (lambda d: d["seasons"][0].update(orders=[order("ITALY", "rome", {"hold": None})]),
         "seasons[0].orders[0].location"),
    ],
)
def test_schema_errors(mutate, field):
    d = game_dict([season(0)])
    mutate(d)
    with pytest.raises(SchemaError) as exc:
        parse_game_log(json.dumps(d))
    assert exc.value.field == field


@pytest.mark.parametrize(
    "seasons",
    [
        [season(1), season(0)],  # non-monotone
        [season(0), season(0)],  # repeated
        [season(0, [order("NOBODY", "ROM", {"hold": None})])],
        [season(0, [order("ITALY", "ROM", {"move": "ROM"})])],
        [season(0, messages=[msg("ITALY", "ITALY")])],
        [season(0, messages=[msg("ITALY", "FRANCE", "   ")])],
        [season(0, occupancy={"ROM": "NOBODY"})],
    ],
)
def test_consistency_errors(seasons):
    with pytest.raises(ConsistencyError):
        parse_game_log(json.dumps(game_dict(seasons)))


def test_year_before_start():
    d = game_dict([season(0)])
    d["seasons"][0]["year"] = 1900
    with pytest.raises(ConsistencyError):
        parse_game_log(json.dumps(d))


def test_filter_messages():
    msgs = [msg("ITALY", "FRANCE"), msg("FRANCE", "ITALY"), msg("ITALY", "GERMANY"),
            msg("GM", "ITALY", "setup", admin=True), msg("ITALY", BROADCAST, "I hold ROM")]
    g = parse_game_log(json.dumps(game_dict([season(0, [order("ITALY", "ROM", {"hold": None})], messages=msgs)])))
    f = filter_messages(g)
    assert [m.text for m in f.seasons[0].messages] == ["hello there."] * 3
    assert f.seasons[0].orders == g.seasons[0].orders
    assert filter_messages(f) == f


def test_filter_all_admin():
    msgs = [msg("GM", "ITALY", "welcome", admin=True), msg("ITALY", "GM", "ok", admin=True)]
    g = parse_game_log(json.dumps(game_dict([season(0, messages=msgs)])))
    assert filter_messages(g).n_messages == 0


def test_round_trip(tmp_path):
    d = alliance_dict(messages={1: [msg("RUSSIA", "AUSTRIA", "Shall we? Next year.")]})
    g = parse_game_log(json.dumps(d))
    assert parse_game_log(dump_game(g)) == g
    assert game_to_dict(g)["seasons"][3]["orders"] == d["seasons"][3]["orders"]
    path = tmp_path / "c.jsonl"
    write_corpus([g, g], path)
    assert load_corpus(path) == [g, g]


def test_load_corpus_skips_blank_lines_and_reports_line(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(jsonl(game_dict([season(0)])) + "\n" + "{broken\n")
    with pytest.raises(RecordSyntaxError) as exc:
        load_corpus(path)
    assert exc.value.line == 3


def test_standard_only():
    a = parse_game_log(json.dumps(game_dict([season(0)], game_id="a")))
    b = parse_game_log(json.dumps(game_dict([season(0)], game_id="b", variant="fleet_rome")))
    assert standard_only([a, b]) == [a]


def test_nearest_rank():
    v = [1, 2, 3, 4, 5, 6, 7, 8]
    assert (nearest_rank(v, 0.25), nearest_rank(v, 0.5), nearest_rank(v, 0.75)) == (2, 4, 6)
    assert nearest_rank([3, 9], 0.5) == 3
    s = summarize([5])
    assert s.q1 == s.median == s.q3 == 5


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=50))
def test_quartiles_ordered(values):
    s = summarize(values)
    assert s.minimum <= s.q1 <= s.median <= s.q3 <= s.maximum
    assert s.median in values


def _four_message_game(game_id="g"):
    msgs = [msg("ITALY", "FRANCE", f"one two {i}.") for i in range(4)]
    return parse_game_log(json.dumps(game_dict([season(0, messages=msgs)], game_id=game_id)))


def test_corpus_statistics_small():
    st_ = corpus_statistics([_four_message_game()])
    assert st_.n_games == 1 and st_.n_messages == 4
    assert st_.messages_per_game.median == 4
    assert st_.sentences_per_message.median == 1
    assert st_.words_per_sentence.median == 3


def test_corpus_statistics_copies_keep_medians():
    g = _four_message_game()
    one = corpus_statistics([g])
    many = corpus_statistics([g] * 5)
    assert many.messages_per_game.median == one.messages_per_game.median
    assert many.sentences_per_message.median == one.sentences_per_message.median
    assert many.n_messages == 20


def test_corpus_statistics_empty():
    with pytest.raises(EmptyCorpus):
        corpus_statistics([])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3))
def test_synthetic_counts_match_generator(n_dyadic, n_admin):
    msgs = [msg("ITALY", "FRANCE", "a b.")] * n_dyadic + [msg("GM", "ITALY", "x", admin=True)] * n_admin
    g = parse_game_log(json.dumps(game_dict([season(0, messages=msgs)])))
    assert corpus_statistics([filter_messages(g)]).n_messages == n_dyadic


def test_synth_corpus_statistics_match_bookkeeping():
    from betrayal.synth import SynthSpec, generate_corpus

    corpus = generate_corpus(SynthSpec(n_games=3, seed=2))
    stats = corpus_statistics([filter_messages(g) for g in corpus.games])
    assert stats.n_games == 3
    assert stats.n_messages == sum(g.n_messages for g in corpus.games)
