"""Friendly/hostile acts from orders, dyad timelines, friendships, betrayals.

A friendly act is support given to another power's unit.  A hostile act is a
move into a territory occupied by another power's unit or onto a supply
center it controls, or support for a third power's move that is hostile to
that power.  Two moves into the same empty, unowned territory (a "bounce")
produce nothing.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .errors import EmptyCorpus, UnknownTerritory
from .gamelog import (
    STANDARD_TERRITORIES,
    Convoy,
    GameLog,
    Move,
    Order,
    SeasonRecord,
    SupportHold,
    SupportMove,
    order_to_dict,
)

FRIENDLY = "friendly"
HOSTILE = "hostile"


@dataclass(frozen=True)
class RelationConfig:
    convoy_as_friendly: bool = False
    # require two friendly acts in each direction rather than two overall
    strict_reciprocity: bool = False
    max_gap: int = 5
    min_length: int = 3
    min_friendly_acts: int = 2
    min_hostile_acts: int = 2


DEFAULT_CONFIG = RelationConfig()


def dyad(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def dyad_name(pair: tuple[str, str]) -> str:
    return f"{pair[0]}-{pair[1]}"


@dataclass(frozen=True)
class Act:
    season_index: int
    kind: str
    actor: str
    recipient: str
    evidence: tuple[Order, ...]

    @property
    def pair(self) -> tuple[str, str]:
        return dyad(self.actor, self.recipient)

    def to_dict(self) -> dict:
        return {
            "season": self.season_index,
            "kind": self.kind,
            "actor": self.actor,
            "recipient": self.recipient,
            "evidence": [order_to_dict(o) for o in self.evidence],
        }


@dataclass(frozen=True)
class DyadTimeline:
    pair: tuple[str, str]
    acts: tuple[Act, ...]
    game_id: str
    game_start: int = 0
    game_end: int = 0  # index of the last season in the game


@dataclass(frozen=True)
class FriendshipSpan:
    dyad: tuple[str, str]
    first_friendly_season: int
    last_friendly_season: int
    acts: tuple[Act, ...]
    game_id: str
    start_offset: int

    @property
    def length_seasons(self) -> int:
        return self.last_friendly_season - self.first_friendly_season + 1

    @property
    def span_id(self) -> str:
        return f"{self.game_id}:{dyad_name(self.dyad)}:{self.first_friendly_season}"

    def to_dict(self) -> dict:
        return {
            "id": self.span_id,
            "game_id": self.game_id,
            "dyad": list(self.dyad),
            "first_friendly_season": self.first_friendly_season,
            "last_friendly_season": self.last_friendly_season,
            "length_seasons": self.length_seasons,
            "start_offset": self.start_offset,
            "n_acts": len(self.acts),
        }


@dataclass(frozen=True)
class BetrayalRecord:
    span: FriendshipSpan
    betrayer: str
    victim: str
    betrayal_season: int
    hostile_acts: tuple[Act, ...]

    @property
    def game_id(self) -> str:
        return self.span.game_id

    def relative_index(self, season: int) -> int:
        """Seasons back from the first hostile act (t = 0)."""
        return self.betrayal_season - season

    def to_dict(self) -> dict:
        return {
            "span": self.span.span_id,
            "game_id": self.game_id,
            "betrayer": self.betrayer,
            "victim": self.victim,
            "betrayal_season": self.betrayal_season,
            "last_friendly_season": self.span.last_friendly_season,
            "length_seasons": self.span.length_seasons,
            "n_hostile_acts": len(self.hostile_acts),
        }


# --------------------------------------------------------------------------
# Classification of a season's orders
# --------------------------------------------------------------------------


def _hostile_targets(power: str, dest: str, season: SeasonRecord) -> list[str]:
    out = []
    occupant = season.occupancy.get(dest)
    if occupant is not None and occupant != power:
        out.append(occupant)
    owner = season.centers.get(dest)
    if owner is not None and owner != power and owner not in out:
        out.append(owner)
    return out


def _check_territories(order: Order, season: SeasonRecord, known: frozenset) -> None:
    for t in order.territories():
        if t not in known and t not in season.occupancy and t not in season.centers:
            raise UnknownTerritory(t)


def classify_interactions(
    season: SeasonRecord,
    config: RelationConfig = DEFAULT_CONFIG,
    known_territories: frozenset = STANDARD_TERRITORIES,
) -> list[Act]:
    acts = []
    idx = season.index
    for order in season.orders:
        _check_territories(order, season, known_territories)
        a = order.action
        p = order.power
        if isinstance(a, Move):
            for target in _hostile_targets(p, a.dest, season):
                acts.append(Act(idx, HOSTILE, p, target, (order,)))
            continue
        aiding = isinstance(a, (SupportHold, SupportMove)) or (
            isinstance(a, Convoy) and config.convoy_as_friendly
        )
        if not aiding or a.target_power == p:
            continue
        acts.append(Act(idx, FRIENDLY, p, a.target_power, (order,)))
        if isinstance(a, (SupportMove, Convoy)):
            # helping a third power attack X is hostile toward X
            for target in _hostile_targets(a.target_power, a.dest, season):
                if target != p:
                    acts.append(Act(idx, HOSTILE, p, target, (order,)))
    return acts


def build_timelines(game: GameLog, config: RelationConfig = DEFAULT_CONFIG) -> dict[tuple[str, str], DyadTimeline]:
    """Timelines for every pair of the game's powers (possibly empty)."""
    per_pair: dict[tuple[str, str], list[Act]] = defaultdict(list)
    for season in game.seasons:
        for act in classify_interactions(season, config):
            per_pair[act.pair].append(act)
    start = game.seasons[0].index if game.seasons else 0
    end = game.last_season_index
    out = {}
    for a, b in combinations(sorted(game.powers), 2):
        pair = (a, b)
        # stable sort keeps list order within a season
        acts = sorted(per_pair.get(pair, ()), key=lambda x: x.season_index)
        out[pair] = DyadTimeline(pair, tuple(acts), game.game_id, start, end)
    return out


def build_dyad_timeline(game: GameLog, pair, config: RelationConfig = DEFAULT_CONFIG) -> DyadTimeline:
    pair = dyad(*pair)
    acts = []
    for season in game.seasons:
        acts.extend(a for a in classify_interactions(season, config) if a.pair == pair)
    start = game.seasons[0].index if game.seasons else 0
    return DyadTimeline(pair, tuple(acts), game.game_id, start, game.last_season_index)


# --------------------------------------------------------------------------
# Friendships and betrayals
# --------------------------------------------------------------------------


def _hostile_seasons(acts: Iterable[Act]) -> set[int]:
    return {a.season_index for a in acts if a.kind == HOSTILE}


def _reciprocated(acts: list[Act], pair: tuple[str, str], strict: bool, min_acts: int) -> bool:
    per_actor = defaultdict(int)
    for a in acts:
        per_actor[a.actor] += 1
    need = min_acts if strict else 1
    return all(per_actor[p] >= need for p in pair)


def find_stable_friendships(
    timeline: DyadTimeline, config: RelationConfig = DEFAULT_CONFIG
) -> list[FriendshipSpan]:
    """Maximal runs of friendly acts that qualify as stable friendships.

    A season holding any hostile act of the dyad is hostile-dominant: its
    friendly acts are ignored and it breaks a run.  Runs also break when
    more than ``max_gap`` seasons separate consecutive friendly acts.
    """
    hostile = sorted(_hostile_seasons(timeline.acts))
    friendly = [a for a in timeline.acts if a.kind == FRIENDLY and a.season_index not in hostile]
    runs: list[list[Act]] = []
    for act in friendly:
        if runs:
            prev = runs[-1][-1].season_index
            s = act.season_index
            broken = s - prev > config.max_gap or any(prev < h < s for h in hostile)
            if not broken:
                runs[-1].append(act)
                continue
        runs.append([act])

    spans = []
    for run in runs:
        first, last = run[0].season_index, run[-1].season_index
        if len(run) < config.min_friendly_acts:
            continue
        if last - first + 1 < config.min_length:
            continue
        if not _reciprocated(run, timeline.pair, config.strict_reciprocity, config.min_friendly_acts):
            continue
        spans.append(
            FriendshipSpan(timeline.pair, first, last, tuple(run), timeline.game_id, first - timeline.game_start)
        )
    return spans


def detect_betrayal(
    span: FriendshipSpan, timeline: DyadTimeline, config: RelationConfig = DEFAULT_CONFIG
) -> list[BetrayalRecord]:
    """Betrayal records ending ``span``: empty, one, or two (mutual)."""
    hostile = _hostile_seasons(timeline.acts)
    episode: list[Act] = []
    for act in timeline.acts:
        if act.season_index <= span.last_friendly_season:
            continue
        if act.kind == FRIENDLY:
            if act.season_index in hostile:
                continue
            break
        episode.append(act)
    if len(episode) < config.min_hostile_acts:
        return []
    first = episode[0].season_index
    # a friendship that already faded is not betrayed
    if first - span.last_friendly_season > config.max_gap:
        return []
    initiators = sorted({a.actor for a in episode if a.season_index == first})
    records = []
    for betrayer in initiators:
        victim = span.dyad[1] if betrayer == span.dyad[0] else span.dyad[0]
        records.append(BetrayalRecord(span, betrayer, victim, first, tuple(episode)))
    return records


@dataclass(frozen=True)
class DyadRelations:
    timeline: DyadTimeline
    spans: tuple[FriendshipSpan, ...]
    betrayals: tuple[BetrayalRecord, ...]

    @property
    def controls(self) -> tuple[FriendshipSpan, ...]:
        betrayed = {b.span.span_id for b in self.betrayals}
        return tuple(s for s in self.spans if s.span_id not in betrayed)


def game_relations(game: GameLog, config: RelationConfig = DEFAULT_CONFIG) -> list[DyadRelations]:
    out = []
    for tl in build_timelines(game, config).values():
        spans = find_stable_friendships(tl, config)
        betrayals = [r for s in spans for r in detect_betrayal(s, tl, config)]
        out.append(DyadRelations(tl, tuple(spans), tuple(betrayals)))
    return out


# --------------------------------------------------------------------------
# Relationship stability
# --------------------------------------------------------------------------

AGE_BUCKETS = tuple(str(a) for a in range(1, 10)) + ("10+",)


def age_bucket(age: int) -> str:
    return str(age) if age < 10 else "10+"


@dataclass
class TransitionStats:
    """Per-(kind, age) counts of relationship seasons and their transitions.

    ``cells[(kind, bucket)] = (transitions, observations)`` where kind is
    ``friendly`` (transition = dissolves into hostility) or ``hostile``
    (transition = resolves into friendship).
    """

    cells: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)

    def probability(self, kind: str, bucket: str) -> float | None:
        ev, n = self.cells.get((kind, bucket), (0, 0))
        return ev / n if n else None

    def pooled(self, kind: str, min_age: int = 1) -> float | None:
        ev = n = 0
        for (k, b), (e, m) in self.cells.items():
            age = 10 if b == "10+" else int(b)
            if k == kind and age >= min_age:
                ev += e
                n += m
        return ev / n if n else None

    @property
    def rate_ratio(self) -> float | None:
        """P(friendship -> hostility) / P(hostility -> friendship), per season."""
        f = self.pooled(FRIENDLY)
        h = self.pooled(HOSTILE)
        if f is None or not h:
            return None
        return f / h

    def rows(self) -> list[dict]:
        out = []
        for kind in (FRIENDLY, HOSTILE):
            for b in AGE_BUCKETS:
                ev, n = self.cells.get((kind, b), (0, 0))
                out.append({
                    "relationship": kind, "age": b, "transitions": ev, "observations": n,
                    "probability": ev / n if n else "",
                })
        return out


def _timeline_transitions(tl: DyadTimeline, max_gap: int, cells: dict) -> None:
    state: dict[int, str] = {}
    for a in tl.acts:
        if a.kind == HOSTILE:
            state[a.season_index] = HOSTILE
        else:
            state.setdefault(a.season_index, FRIENDLY)
    seasons = sorted(state)
    kind = None
    start = prev = None
    for i, s in enumerate(seasons):
        k = state[s]
        if kind != k or s - prev > max_gap:
            kind, start = k, s
        prev = s
        age = s - start + 1
        nxt = seasons[i + 1] if i + 1 < len(seasons) else None
        if nxt is not None and nxt - s <= max_gap:
            changed = state[nxt] != k
        elif tl.game_end - s > max_gap:
            changed = False  # faded out
        else:
            continue  # censored by the end of the game
        ev, n = cells.get((k, age_bucket(age)), (0, 0))
        cells[(k, age_bucket(age))] = (ev + int(changed), n + 1)


def transition_statistics(corpus: list[GameLog], config: RelationConfig = DEFAULT_CONFIG) -> TransitionStats:
    if not corpus:
        raise EmptyCorpus("corpus contains no games")
    cells: dict = {}
    for game in corpus:
        for tl in build_timelines(game, config).values():
            _timeline_transitions(tl, config.max_gap, cells)
    return TransitionStats(cells)
