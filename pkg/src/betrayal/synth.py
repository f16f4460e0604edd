"""Seeded synthetic corpora with planted betrayals and cue shifts.

Each power keeps one unit per partner on a static board, so every dyad's
orders are independent of the others.  A friendship is mutual support
every season; after ``min_friendship`` seasons it ends each season in
betrayal with probability ``hazard``, fades out with probability ``fade``,
or continues up to ``max_friendship``.  A betrayal is a hostile move by the
betrayer followed by the victim's retaliation one season later.

Message text is token salad built from the shipped lexicons and a neutral
filler vocabulary; it is only meaningful to lexicon-based extractors.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from itertools import combinations

import numpy as np

from .errors import InvalidSpec
from .gamelog import (
    FIRST_YEAR,
    PHASES,
    STANDARD_POWERS,
    STANDARD_TERRITORIES,
    SUPPLY_CENTERS,
    GameLog,
    Hold,
    Message,
    Move,
    Order,
    SeasonRecord,
    SupportHold,
)
from .lingcues import LexiconSet, load_lexicons
from .lingcues.cues import NEGATORS

COOLDOWN = 6  # silent seasons after an episode; more than the friendship gap

_FILLER_CANDIDATES = (
    "army fleet border coast channel province supply center unit units line front turn spring "
    "autumn winter year sea land north south east west river mountain harbor port capital "
    "territory board map order orders hold holds support move moves build builds disband "
    "retreat garrison flank position region zone area route path position march sail bounce "
    "vienna berlin paris london rome moscow ankara warsaw venice tunis naples spain norway "
    "sweden denmark holland belgium burgundy piedmont tyrolia bohemia galicia silesia "
    "ukraine livonia finland syria armenia smyrna greece serbia albania rumania bulgaria "
    "we us our me my it this that these those the a an of to with on at by from in into "
    "onto over under about toward around against between"
).split()

_CHATTER = ("hold", "line", "border", "map")


@dataclass(frozen=True)
class SynthSpec:
    n_games: int = 40
    seasons: tuple[int, int] = (30, 36)
    hazard: float = 0.15
    fade: float = 0.2
    start_prob: float = 0.3
    min_friendship: int = 3
    max_friendship: int = 10
    # planted effects (multipliers on per-sentence or per-message rates)
    positive_effect: float = 1.5  # betrayer, whole pre-betrayal window
    planning_effect: float = 0.6  # betrayer, whole pre-betrayal window
    betrayer_politeness_effect: float = 0.5  # betrayer, season t = 2
    victim_politeness_effect: float = 0.5  # victim, season t = 2
    # message rates
    messages_per_season: float = 2.0  # Poisson mean of extra messages per direction
    sentences_per_message: float = 1.5
    words_per_sentence: float = 4.0
    positive_rate: float = 0.25
    negative_rate: float = 0.15
    planning_rate: float = 0.25
    gratitude_rate: float = 0.5
    rude_rate: float = 0.2
    chatter_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.seasons
        problems = []
        if self.n_games < 1:
            problems.append("n_games must be positive")
        if not 0 < lo <= hi:
            problems.append("seasons must be a range lo <= hi with lo > 0")
        if not 1 <= self.min_friendship <= self.max_friendship:
            problems.append("need 1 <= min_friendship <= max_friendship")
        elif lo < self.max_friendship + COOLDOWN + 3:
            problems.append(f"games need at least {self.max_friendship + COOLDOWN + 3} seasons")
        for name in ("hazard", "fade", "start_prob", "positive_rate", "negative_rate", "planning_rate",
                     "gratitude_rate", "rude_rate", "chatter_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name}={v} outside [0, 1]")
        if self.hazard + self.fade > 1.0:
            problems.append("hazard + fade exceeds 1")
        for name in ("positive_effect", "planning_effect", "betrayer_politeness_effect",
                     "victim_politeness_effect", "messages_per_season", "sentences_per_message",
                     "words_per_sentence"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.positive_rate * self.positive_effect + self.negative_rate > 1.0:
            problems.append("positive and negative sentence rates exceed 1 after effects")
        for name, eff in (("planning", self.planning_effect),
                          ("gratitude", max(self.betrayer_politeness_effect, self.victim_politeness_effect))):
            if getattr(self, f"{name}_rate") * eff > 1.0:
                problems.append(f"{name} rate exceeds 1 after effects")
        if problems:
            raise InvalidSpec("; ".join(problems))

    def null(self) -> "SynthSpec":
        """Same spec with every planted effect switched off."""
        return replace(self, positive_effect=1.0, planning_effect=1.0,
                       betrayer_politeness_effect=1.0, victim_politeness_effect=1.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seasons"] = list(self.seasons)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        kw = {}
        for f, default in asdict(cls()).items():
            if f not in d:
                continue
            v = d[f]
            if f == "seasons":
                v = tuple(int(x) for x in (v.split(",") if isinstance(v, str) else v))
            else:
                v = type(default)(v)
            kw[f] = v
        unknown = set(d) - set(asdict(cls()))
        if unknown:
            raise InvalidSpec(f"unknown synth parameters: {sorted(unknown)}")
        return cls(**kw)


@dataclass(frozen=True)
class PlantedFriendship:
    game_id: str
    dyad: tuple[str, str]
    first: int
    last: int
    outcome: str  # "betrayal" | "fade"
    betrayer: str | None = None

    @property
    def victim(self) -> str | None:
        if self.betrayer is None:
            return None
        return self.dyad[1] if self.betrayer == self.dyad[0] else self.dyad[0]

    @property
    def length(self) -> int:
        return self.last - self.first + 1

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id, "dyad": list(self.dyad), "first": self.first, "last": self.last,
            "length": self.length, "outcome": self.outcome, "betrayer": self.betrayer, "victim": self.victim,
        }


@dataclass
class SynthCorpus:
    games: list[GameLog]
    friendships: list[PlantedFriendship]
    spec: SynthSpec

    @property
    def betrayals(self) -> list[PlantedFriendship]:
        return [f for f in self.friendships if f.outcome == "betrayal"]

    def truth(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "n_games": len(self.games),
            "n_friendships": len(self.friendships),
            "n_betrayals": len(self.betrayals),
            "n_fades": len(self.friendships) - len(self.betrayals),
            "imminent_positive_rate": imminent_positive_rate(self.spec),
            "friendships": [f.to_dict() for f in self.friendships],
        }


def length_distribution(spec: SynthSpec) -> dict[str, dict[int, float]]:
    """P(friendship ends at length a by betrayal / by fading)."""
    m, M, h, f = spec.min_friendship, spec.max_friendship, spec.hazard, spec.fade
    alive = 1.0
    out = {"betrayal": {}, "fade": {}}
    for a in range(m, M + 1):
        out["betrayal"][a] = alive * h
        out["fade"][a] = alive * (1.0 - h) if a == M else alive * f
        alive *= 1.0 - h - f
    return out


def imminent_positive_rate(spec: SynthSpec, min_length: int = 4) -> float:
    """Expected share of positives among imminent-task seasons.

    A betrayed friendship of length ``a`` contributes ``a - 1`` window
    seasons, exactly one of them positive.
    """
    dist = length_distribution(spec)["betrayal"]
    pos = sum(p for a, p in dist.items() if a >= min_length)
    tot = sum(p * (a - 1) for a, p in dist.items() if a >= min_length)
    return pos / tot if tot else 0.0


# --------------------------------------------------------------------------
# Relationship schedules and orders
# --------------------------------------------------------------------------


def _schedule(rng, game_id, pair, n_seasons, spec) -> list[PlantedFriendship]:
    m, M, h, f = spec.min_friendship, spec.max_friendship, spec.hazard, spec.fade
    # the ending, the retaliation and a fade-length silence must fit in the game
    latest_start = n_seasons - 1 - (M + 1 + COOLDOWN)
    out = []
    s = 0
    while True:
        while s <= latest_start and rng.random() >= spec.start_prob:
            s += 1
        if s > latest_start:
            return out
        a = 1
        while True:
            if a >= m:
                u = rng.random()
                if u < h:
                    outcome = "betrayal"
                    break
                if a == M or u < h + f:
                    outcome = "fade"
                    break
            a += 1
        last = s + a - 1
        betrayer = pair[int(rng.integers(2))] if outcome == "betrayal" else None
        out.append(PlantedFriendship(game_id, pair, s, last, outcome, betrayer))
        last_act = last + 2 if outcome == "betrayal" else last
        s = last_act + COOLDOWN


def _board(powers) -> tuple[dict, dict, dict]:
    """One unit per (owner, partner); returns (unit location, occupancy, centers)."""
    territories = sorted(SUPPLY_CENTERS) + sorted(STANDARD_TERRITORIES - SUPPLY_CENTERS)
    loc = {}
    i = 0
    for p in powers:
        for q in powers:
            if p != q:
                loc[(p, q)] = territories[i]
                i += 1
    occupancy = {t: p for (p, _), t in loc.items()}
    centers = {t: p for t, p in occupancy.items() if t in SUPPLY_CENTERS}
    return loc, occupancy, centers


# --------------------------------------------------------------------------
# Message text
# --------------------------------------------------------------------------


def _phrase_tokens(lexicon: LexiconSet) -> set[str]:
    toks = set()
    for group in (lexicon.connectives, lexicon.planning_markers, lexicon.claim_markers,
                  lexicon.premise_markers, lexicon.subjectivity_phrases, lexicon.sentiment_lexicon):
        for phrase in group:
            toks.update(phrase.split())
    return toks


def filler_vocabulary(lexicon: LexiconSet) -> list[str]:
    banned = _phrase_tokens(lexicon) | set(NEGATORS)
    words = []
    for w in _FILLER_CANDIDATES:
        if w in banned or w in words:
            continue
        if any(cue.regex.search(w) or cue.regex.search(w + " ?") for cue in lexicon.politeness_cues):
            continue
        words.append(w)
    return words


@dataclass
class _Vocab:
    filler: list[str]
    positive: list[str]
    negative: list[str]
    planning: list[str]
    noise: list[list[str]] = field(default_factory=list)  # other cue phrases, no planted effect


def _vocab(lexicon: LexiconSet) -> _Vocab:
    def single(words):
        return sorted(w for w in words if " " not in w)

    pos = single(w for w, c in lexicon.sentiment_lexicon.items() if c == "positive")
    neg = single(w for w, c in lexicon.sentiment_lexicon.items() if c == "negative")
    plan = single(lexicon.planning_markers)
    temporal_other = [p for p, c in lexicon.connectives.items()
                      if c != "temporal" and " " not in p and p not in NEGATORS
                      and p not in _phrase_tokens_of_others(lexicon)]
    noise = [sorted(temporal_other), sorted(lexicon.claim_markers), sorted(lexicon.premise_markers),
             sorted(lexicon.subjectivity_phrases)]
    return _Vocab(filler_vocabulary(lexicon), pos, neg, plan, [n for n in noise if n])


def _phrase_tokens_of_others(lexicon: LexiconSet) -> set[str]:
    toks = set()
    for group in (lexicon.claim_markers, lexicon.premise_markers, lexicon.subjectivity_phrases,
                  lexicon.sentiment_lexicon):
        for phrase in group:
            toks.update(phrase.split())
    return toks


@dataclass(frozen=True)
class _Rates:
    positive: float
    negative: float
    planning: float
    gratitude: float
    rude: float


def _sentence(rng, vocab: _Vocab, rates: _Rates, spec: SynthSpec) -> list[str]:
    n = 3 + int(rng.poisson(spec.words_per_sentence))
    words = [vocab.filler[j] for j in rng.integers(len(vocab.filler), size=n)]
    extras = []
    u = rng.random()
    if u < rates.positive:
        extras.append(vocab.positive[rng.integers(len(vocab.positive))])
    elif u < rates.positive + rates.negative:
        extras.append(vocab.negative[rng.integers(len(vocab.negative))])
    if rng.random() < rates.planning:
        extras.append(vocab.planning[rng.integers(len(vocab.planning))])
    for group in vocab.noise:
        if rng.random() < 0.08:
            extras.append(group[rng.integers(len(group))])
    for w in extras:
        # never first: a sentence-initial connective would trip politeness cues
        words.insert(1 + int(rng.integers(len(words))), w)
    return words


def _message(rng, vocab: _Vocab, rates: _Rates, spec: SynthSpec) -> str:
    sentences = []
    if rng.random() < rates.gratitude:
        sentences.append(["thanks"] + _sentence(rng, vocab, rates, spec))
    if rng.random() < rates.rude:
        sentences.append(["your"] + _sentence(rng, vocab, rates, spec))
    for _ in range(1 + int(rng.poisson(spec.sentences_per_message))):
        sentences.append(_sentence(rng, vocab, rates, spec))
    order = rng.permutation(len(sentences))
    out = []
    for j in order:
        end = "?" if rng.random() < 0.15 else "."
        s = " ".join(sentences[j])
        out.append(s[0].upper() + s[1:] + end)
    return " ".join(out)


def _base_rates(spec: SynthSpec) -> _Rates:
    return _Rates(spec.positive_rate, spec.negative_rate, spec.planning_rate, spec.gratitude_rate, spec.rude_rate)


# --------------------------------------------------------------------------
# Generation
# --------------------------------------------------------------------------


def _season_record(idx, orders, messages, occupancy, centers) -> SeasonRecord:
    return SeasonRecord(idx, FIRST_YEAR + idx // 2, PHASES[idx % 2], tuple(orders), tuple(messages),
                        dict(occupancy), dict(centers))


def generate_game(rng, game_id: str, spec: SynthSpec, vocab: _Vocab) -> tuple[GameLog, list[PlantedFriendship]]:
    powers = STANDARD_POWERS
    lo, hi = spec.seasons
    n_seasons = int(rng.integers(lo, hi + 1))
    loc, occupancy, centers = _board(powers)
    pairs = list(combinations(powers, 2))
    plans = {pair: _schedule(rng, game_id, pair, n_seasons, spec) for pair in pairs}

    # per-season dyad status: ("friend", plan) | ("betray", plan, step)
    status: dict[tuple[int, tuple], tuple] = {}
    for pair, fs in plans.items():
        for fr in fs:
            for s in range(fr.first, fr.last + 1):
                status[(s, pair)] = ("friend", fr)
            if fr.outcome == "betrayal":
                status[(fr.last + 1, pair)] = ("betray", fr, 0)
                status[(fr.last + 2, pair)] = ("betray", fr, 1)

    base = _base_rates(spec)
    seasons = []
    for s in range(n_seasons):
        orders, messages = [], []
        for pair in pairs:
            st = status.get((s, pair))
            a, b = pair
            for p, q in ((a, b), (b, a)):
                unit = loc[(p, q)]
                action = Hold()
                if st and st[0] == "friend":
                    action = SupportHold(q, loc[(q, p)])
                elif st and st[0] == "betray":
                    fr, step = st[1], st[2]
                    attacker = fr.betrayer if step == 0 else fr.victim
                    if p == attacker:
                        action = Move(loc[(q, p)])
                orders.append(Order(p, "army", unit, action))
            for p, q in ((a, b), (b, a)):
                messages.extend(_dyad_messages(rng, s, p, q, st, base, spec, vocab))
        seasons.append(_season_record(s, orders, messages, occupancy, centers))
    game = GameLog(game_id, "standard", powers, tuple(seasons))
    return game, [fr for pair in pairs for fr in plans[pair]]


def _dyad_messages(rng, s, sender, recipient, st, base: _Rates, spec: SynthSpec, vocab: _Vocab) -> list[Message]:
    if st is None:
        if rng.random() < spec.chatter_rate:
            text = " ".join(_CHATTER[j] for j in rng.permutation(len(_CHATTER))).capitalize() + "."
            return [Message(sender, recipient, s, text)]
        return []
    rates = base
    if st[0] == "betray":
        rates = replace(base, positive=base.positive * 0.3, negative=min(1.0, base.negative * 3))
        n = 1
    else:
        fr = st[1]
        n = 1 + int(rng.poisson(spec.messages_per_season))
        if fr.outcome == "betrayal" and s < fr.last:
            if sender == fr.betrayer:
                rates = replace(rates, positive=rates.positive * spec.positive_effect,
                                planning=rates.planning * spec.planning_effect)
            if s == fr.last - 1:
                eff = spec.betrayer_politeness_effect if sender == fr.betrayer else spec.victim_politeness_effect
                rates = replace(rates, gratitude=rates.gratitude * eff)
    return [Message(sender, recipient, s, _message(rng, vocab, rates, spec)) for _ in range(n)]


def generate_corpus(spec: SynthSpec = SynthSpec(), lexicon: LexiconSet | None = None) -> SynthCorpus:
    lexicon = lexicon if lexicon is not None else load_lexicons()
    vocab = _vocab(lexicon)
    if not vocab.filler or not vocab.positive or not vocab.negative or not vocab.planning:
        raise InvalidSpec("lexicons lack the vocabulary the generator needs")
    rng = np.random.default_rng(spec.seed)
    games, friendships = [], []
    width = len(str(spec.n_games))
    for g in range(spec.n_games):
        game, fs = generate_game(rng, f"synth-{g:0{width}d}", spec, vocab)
        games.append(game)
        friendships.extend(fs)
    return SynthCorpus(games, friendships, spec)
