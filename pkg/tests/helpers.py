"""Fixture builders and brute-force reference implementations for tests."""

from __future__ import annotations

import json

from betrayal.gamelog import STANDARD_POWERS, game_from_dict

B, V = "RUSSIA", "AUSTRIA"


def order(power, loc, action, unit="army"):
    return {"power": power, "unit": unit, "location": loc, "action": action}


def season(idx, orders=(), occupancy=None, centers=None, messages=()):
    return {
        "year": 1901 + idx // 2,
        "phase": ("spring", "fall")[idx % 2],
        "occupancy": occupancy or {},
        "centers": centers or {},
        "orders": list(orders),
        "messages": list(messages),
    }


def game_dict(seasons, game_id="g1", variant="standard", powers=STANDARD_POWERS):
    return {"game_id": game_id, "variant": variant, "powers": list(powers), "seasons": seasons}


# Static board for the two-player story: V holds Vienna, B sits in Galicia,
# Warsaw and Venice, a third power sits in Silesia.
BOARD = {"VIE": V, "BOH": V, "TRI": V, "GAL": B, "WAR": B, "VEN": B, "SIL": "GERMANY"}
CENTERS = {"VIE": V, "TRI": V, "WAR": B, "VEN": B}


def alliance_dict(n_seasons: int = 10, messages=None) -> dict:
    """Four friendly acts at t = 4, 3, 3, 1 then B attacks (t = 0) and V retaliates."""
    messages = messages or {}
    acts = {
        2: [order(B, "GAL", {"support_hold": {"power": V, "loc": "VIE"}})],
        3: [
            order(V, "BOH", {"support_move": {"power": B, "from": "WAR", "to": "SIL"}}),
            order(B, "WAR", {"move": "SIL"}),
            order(B, "GAL", {"support_hold": {"power": V, "loc": "VIE"}}),
        ],
        5: [
            order(V, "TRI", {"support_move": {"power": B, "from": "VEN", "to": "TYR"}}),
            order(B, "VEN", {"move": "TYR"}),
        ],
        6: [order(B, "GAL", {"move": "VIE"})],
        7: [order(V, "BOH", {"move": "WAR"})],
    }
    seasons = [
        season(i, acts.get(i, ()), BOARD, CENTERS, messages.get(i, ())) for i in range(n_seasons)
    ]
    return game_dict(seasons, game_id="alliance")


def alliance_game(**kw):
    return game_from_dict(alliance_dict(**kw))


def bounce_dict() -> dict:
    s = season(
        0,
        [order("ITALY", "VEN", {"move": "TYR"}), order("GERMANY", "MUN", {"move": "TYR"})],
        occupancy={"VEN": "ITALY", "MUN": "GERMANY"},
        centers={"VEN": "ITALY", "MUN": "GERMANY"},
    )
    return game_dict([s], game_id="bounce")


def jsonl(*dicts) -> str:
    return "".join(json.dumps(d) + "\n" for d in dicts)


# --------------------------------------------------------------------------
# Reference labeling rules, written directly from the definitions and
# deliberately without the production code's run-building approach.
# --------------------------------------------------------------------------


def reference_spans(acts, pair, max_gap=5, min_len=3, strict=False):
    """acts: list of (season, kind, actor). Returns [(first, last)] of stable friendships.

    Enumerates every candidate interval [i, j] of friendly acts and keeps the
    maximal ones meeting all the conditions.
    """
    hostile = sorted({s for s, k, _ in acts if k == "hostile"})
    friendly = [(s, a) for s, k, a in acts if k == "friendly" and s not in hostile]

    def connected(i, j):
        for x in range(i, j):
            s0, s1 = friendly[x][0], friendly[x + 1][0]
            if s1 - s0 > max_gap or any(s0 < h < s1 for h in hostile):
                return False
        return True

    # maximal connected runs: extend until the link breaks
    runs = []
    i = 0
    while i < len(friendly):
        j = i
        while j + 1 < len(friendly) and connected(j, j + 1):
            j += 1
        runs.append(friendly[i : j + 1])
        i = j + 1
    out = []
    for run in runs:
        first, last = run[0][0], run[-1][0]
        actors = [a for _, a in run]
        ok_recip = all(actors.count(p) >= (2 if strict else 1) for p in pair)
        if len(run) >= 2 and last - first + 1 >= min_len and ok_recip:
            out.append((first, last))
    return out


def reference_betrayals(acts, span_last, max_gap=5):
    """Betrayers for a span ending at ``span_last``; [] if none."""
    hostile_seasons = {s for s, k, _ in acts if k == "hostile"}
    after = [(s, k, a) for s, k, a in acts if s > span_last]
    hostile_seen = []
    for s, k, a in after:
        if k == "friendly" and s not in hostile_seasons:
            break
        if k == "hostile":
            hostile_seen.append((s, a))
    if len(hostile_seen) < 2 or hostile_seen[0][0] - span_last > max_gap:
        return []
    first = hostile_seen[0][0]
    return sorted({a for s, a in hostile_seen if s == first})
