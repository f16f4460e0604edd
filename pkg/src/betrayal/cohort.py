"""Matched betrayal/control population and labeled task instances."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import ImbalanceError, InsufficientControls
from .gamelog import GameLog
from .lingcues import LexiconSet, aggregate_season_features, extract_message_cues, feature_names
from .relations import (
    DEFAULT_CONFIG,
    BetrayalRecord,
    FriendshipSpan,
    RelationConfig,
    dyad_name,
    game_relations,
)
from .stats import mann_whitney_u

BALANCE_ALPHA = 0.05
IMMINENT_MIN_LENGTH = 4
MODEL_BLOCKS = ("B", "V")
CSV_BLOCKS = ("B", "V", "imbalance")


@dataclass(frozen=True)
class MatchedPair:
    betrayal: BetrayalRecord
    control: FriendshipSpan
    distance: float
    control_betrayer: str  # role assigned to the control dyad, by coin flip

    @property
    def control_victim(self) -> str:
        a, b = self.control.dyad
        return b if self.control_betrayer == a else a


@dataclass(frozen=True)
class BalanceReport:
    n_pairs: int
    p_length: float
    p_start_offset: float
    mean_length: tuple[float, float]  # (betrayals, controls)
    mean_start_offset: tuple[float, float]

    @property
    def balanced(self) -> bool:
        return min(self.p_length, self.p_start_offset) > BALANCE_ALPHA

    def to_dict(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "p_length": self.p_length,
            "p_start_offset": self.p_start_offset,
            "mean_length": list(self.mean_length),
            "mean_start_offset": list(self.mean_start_offset),
        }


@dataclass(frozen=True)
class TaskInstance:
    game_id: str
    dyad: tuple[str, str]
    season_index: int
    t: int
    label: int
    betrayer: str
    victim: str
    source: str  # id of the friendship span the season belongs to
    features: np.ndarray | None = None

    @property
    def group_key(self) -> str:
        return self.game_id


def _covariates(span: FriendshipSpan) -> tuple[int, int]:
    return span.length_seasons, span.start_offset


def balance_report(pairs: Sequence[MatchedPair]) -> BalanceReport:
    bl = [p.betrayal.span.length_seasons for p in pairs]
    cl = [p.control.length_seasons for p in pairs]
    bs = [p.betrayal.span.start_offset for p in pairs]
    cs = [p.control.start_offset for p in pairs]
    if not pairs:
        return BalanceReport(0, 1.0, 1.0, (0.0, 0.0), (0.0, 0.0))
    return BalanceReport(
        len(pairs),
        mann_whitney_u(bl, cl).p_value,
        mann_whitney_u(bs, cs).p_value,
        (float(np.mean(bl)), float(np.mean(cl))),
        (float(np.mean(bs)), float(np.mean(cs))),
    )


def match_controls(
    betrayals: Sequence[BetrayalRecord],
    candidates: Sequence[FriendshipSpan],
    seed: int = 0,
    strict_balance: bool = False,
) -> tuple[list[MatchedPair], BalanceReport]:
    """Greedy nearest-neighbour matching of betrayals to never-betrayed spans.

    Longest friendships pick first.  Distance is L1 on covariates
    (length, start offset) z-scored over the pooled betrayals and candidates.
    """
    if len(candidates) < len(betrayals):
        raise InsufficientControls(
            f"{len(candidates)} control friendships for {len(betrayals)} betrayals"
        )
    if not betrayals:
        return [], balance_report([])
    pooled = np.array([_covariates(b.span) for b in betrayals] + [_covariates(c) for c in candidates], float)
    mu = pooled.mean(axis=0)
    sd = pooled.std(axis=0)
    sd[sd == 0] = 1.0

    cand = np.array([_covariates(c) for c in candidates], float)
    cand_z = (cand - mu) / sd
    cand_ids = [c.span_id for c in candidates]
    free = np.ones(len(candidates), bool)

    order = sorted(
        betrayals,
        key=lambda b: (-b.span.length_seasons, b.game_id, dyad_name(b.span.dyad), b.betrayer),
    )
    rng = np.random.default_rng(seed)
    pairs = []
    for b in order:
        bz = (np.array(_covariates(b.span), float) - mu) / sd
        dist = np.abs(cand_z - bz).sum(axis=1)
        offset_gap = np.abs(cand[:, 1] - b.span.start_offset)
        best = min(
            np.flatnonzero(free),
            key=lambda j: (dist[j], offset_gap[j], cand_ids[j]),
        )
        free[best] = False
        control = candidates[best]
        role = control.dyad[int(rng.integers(2))]
        pairs.append(MatchedPair(b, control, float(dist[best]), role))

    report = balance_report(pairs)
    if strict_balance and not report.balanced:
        raise ImbalanceError(
            f"matched sets differ: p_length={report.p_length:.3g}, p_start={report.p_start_offset:.3g}"
        )
    return pairs, report


# --------------------------------------------------------------------------
# Task labeling
# --------------------------------------------------------------------------


def betrayal_window(b: BetrayalRecord) -> range:
    """Seasons strictly before the last friendly act."""
    return range(b.span.first_friendly_season, b.span.last_friendly_season)


def control_window(pair: MatchedPair) -> range:
    """The control's final seasons, as many as the betrayal window has."""
    c = pair.control
    n = len(betrayal_window(pair.betrayal))
    return range(max(c.first_friendly_season, c.last_friendly_season - n), c.last_friendly_season)


def _relative(last_friendly: int, season: int) -> int:
    # t = 1 is the season of the last friendly act
    return last_friendly + 1 - season


def betrayal_instances(b: BetrayalRecord, label: int) -> list[TaskInstance]:
    last = b.span.last_friendly_season
    return [
        TaskInstance(b.game_id, b.span.dyad, s, _relative(last, s), label, b.betrayer, b.victim, b.span.span_id)
        for s in betrayal_window(b)
    ]


def label_longterm_task(pairs: Sequence[MatchedPair]) -> list[TaskInstance]:
    out = []
    for p in pairs:
        out.extend(betrayal_instances(p.betrayal, 1))
        c = p.control
        for s in control_window(p):
            out.append(TaskInstance(
                c.game_id, c.dyad, s, _relative(c.last_friendly_season, s), 0,
                p.control_betrayer, p.control_victim, c.span_id,
            ))
    return out


def label_imminent_task(
    betrayals: Sequence[BetrayalRecord], min_length: int = IMMINENT_MIN_LENGTH
) -> list[TaskInstance]:
    """Newest window season (t = 2) positive, older window seasons negative."""
    out = []
    for b in betrayals:
        if b.span.length_seasons < min_length:
            continue
        for inst in betrayal_instances(b, 0):
            out.append(replace(inst, label=int(inst.t == 2)))
    return out


def class_balance(instances: Sequence[TaskInstance]) -> dict:
    n = len(instances)
    pos = sum(i.label for i in instances)
    return {"n": n, "positive": pos, "negative": n - pos, "positive_rate": pos / n if n else 0.0}


def false_positive_proximity(
    instances: Sequence[TaskInstance], predictions: Sequence[int], within: int = 2
) -> dict:
    """Share of false positives at most ``within`` seasons before the last friendly act."""
    fps = [i for i, p in zip(instances, predictions) if p == 1 and i.label == 0]
    near = sum(1 for i in fps if i.t - 1 <= within)
    return {"false_positives": len(fps), "near": near, "share": near / len(fps) if fps else 0.0}


# --------------------------------------------------------------------------
# Population assembly and features
# --------------------------------------------------------------------------


@dataclass
class Cohort:
    betrayals: list[BetrayalRecord]
    candidates: list[FriendshipSpan]
    pairs: list[MatchedPair]
    balance: BalanceReport


def collect_relations(
    corpus: Iterable[GameLog], config: RelationConfig = DEFAULT_CONFIG
) -> tuple[list[BetrayalRecord], list[FriendshipSpan]]:
    betrayals, candidates = [], []
    for game in corpus:
        for rel in game_relations(game, config):
            betrayals.extend(rel.betrayals)
            candidates.extend(rel.controls)
    return betrayals, candidates


def build_cohort(
    corpus: Iterable[GameLog],
    config: RelationConfig = DEFAULT_CONFIG,
    seed: int = 0,
    strict_balance: bool = False,
) -> Cohort:
    betrayals, candidates = collect_relations(corpus, config)
    pairs, report = match_controls(betrayals, candidates, seed, strict_balance)
    return Cohort(betrayals, candidates, pairs, report)


class CueCache:
    """Message cues keyed by text; extraction depends on nothing else."""

    def __init__(self, lexicon: LexiconSet):
        self.lexicon = lexicon
        self._cache: dict = {}

    def __call__(self, message):
        cues = self._cache.get(message.text)
        if cues is None:
            cues = self._cache[message.text] = extract_message_cues(message.text, self.lexicon)
        return cues


def featurize(
    instances: Sequence[TaskInstance],
    corpus: Iterable[GameLog],
    lexicon: LexiconSet,
    drop_silent: bool = True,
) -> list[TaskInstance]:
    """Attach the B/V/imbalance cue vector of each instance's season.

    Seasons in which neither side wrote to the other carry no linguistic
    evidence and are dropped unless ``drop_silent`` is false.
    """
    games = {g.game_id: g for g in corpus}
    cues_of = CueCache(lexicon)
    out = []
    for inst in instances:
        season = games[inst.game_id].season(inst.season_index)
        msgs = [m for m in season.messages if not m.admin] if season is not None else []
        sf = aggregate_season_features(msgs, (inst.betrayer, inst.victim), cues_of=cues_of)
        if drop_silent and sum(sf.n_messages) == 0:
            continue
        out.append(replace(inst, features=sf.vector(CSV_BLOCKS)))
    return out


def block_columns(blocks: Sequence[str] = MODEL_BLOCKS) -> list[int]:
    names = feature_names(CSV_BLOCKS)
    wanted = set(feature_names(blocks))
    return [i for i, n in enumerate(names) if n in wanted]


def design_matrix(
    instances: Sequence[TaskInstance], blocks: Sequence[str] = MODEL_BLOCKS
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[str]]:
    cols = block_columns(blocks)
    X = np.array([i.features[cols] for i in instances], float).reshape(len(instances), len(cols))
    y = np.array([i.label for i in instances], int)
    groups = np.array([i.group_key for i in instances])
    return X, y, groups, feature_names(blocks)


CSV_HEADER = ["game_id", "dyad", "season", "t", "label", "betrayer", "victim"]


def instances_to_csv(instances: Sequence[TaskInstance]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER + feature_names(CSV_BLOCKS))
    for i in instances:
        feats = [repr(float(x)) for x in i.features] if i.features is not None else []
        w.writerow([i.game_id, dyad_name(i.dyad), i.season_index, i.t, i.label, i.betrayer, i.victim] + feats)
    return buf.getvalue()


def instances_from_csv(text: str) -> list[TaskInstance]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    n_fixed = len(CSV_HEADER)
    out = []
    for r in rows[1:]:
        a, b = r[1].split("-", 1)
        feats = np.array([float(x) for x in r[n_fixed:]]) if len(r) > n_fixed else None
        out.append(TaskInstance(r[0], (a, b), int(r[2]), int(r[3]), int(r[4]), r[5], r[6], "", feats))
    return out
