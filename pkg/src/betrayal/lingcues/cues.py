"""Per-message cue extraction and per-season, per-direction aggregation.

Scorers are plain callables so the lexicon heuristics can be swapped for
trained models with the same output contracts:

* sentiment: ``(tokens, lexicon) -> "positive" | "neutral" | "negative"``
* politeness: ``(sentences, lexicon) -> float in [0, 1]``
* request: ``(sentence) -> bool``
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .lexicon import CONNECTIVE_CLASSES, LexiconSet
from .text import segment_sentences, tokenize

SENTIMENT_CLASSES = ("positive", "neutral", "negative")
NEGATORS = frozenset("not no never nothing nobody none neither nor cannot without".split())
NEGATION_WINDOW = 3

_REQUEST_START = re.compile(r"^(please|could you|can you|would you|will you)\b")

SentimentScorer = Callable[[list, LexiconSet], str]
PolitenessScorer = Callable[[list, LexiconSet], float]
RequestDetector = Callable[[str], bool]


def _is_negator(tok: str) -> bool:
    return tok in NEGATORS or tok.endswith("n't")


def sentiment_label(tokens: Sequence[str], lexicon: LexiconSet) -> str:
    """Sign of (positive hits - negative hits).

    A polarity token up to three tokens after a negator counts with the
    opposite sign.
    """
    score = 0
    last_negator = -10
    lex = lexicon.sentiment_lexicon
    for i, tok in enumerate(tokens):
        if _is_negator(tok):
            last_negator = i
            continue
        pol = lex.get(tok)
        if pol is None:
            continue
        s = 1 if pol == "positive" else -1
        if i - last_negator <= NEGATION_WINDOW:
            s = -s
        score += s
    if score > 0:
        return "positive"
    if score < 0:
        return "negative"
    return "neutral"


def is_request(sentence: str) -> bool:
    s = sentence.strip().lower()
    return s.endswith("?") or bool(_REQUEST_START.match(s))


def politeness_hits(sentences: Sequence[str], lexicon: LexiconSet) -> list[int]:
    counts = [0] * len(lexicon.politeness_cues)
    for sent in sentences:
        low = sent.strip().lower()
        for j, cue in enumerate(lexicon.politeness_cues):
            counts[j] += len(cue.regex.findall(low))
    return counts


def politeness_from_counts(counts: Sequence[int], lexicon: LexiconSet) -> float:
    z = sum(c * cue.weight for c, cue in zip(counts, lexicon.politeness_cues))
    # numerically safe logistic
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def politeness_score(sentences: Sequence[str], lexicon: LexiconSet) -> float:
    """Logistic squash of weighted politeness-cue hits.

    A heuristic stand-in for a trained politeness classifier: gratitude,
    deference, greetings, "please", apologies and hedges push the score up;
    direct starts, second-person starts and direct questions push it down.
    A message with no cue hits scores 0.5.
    """
    return politeness_from_counts(politeness_hits(sentences, lexicon), lexicon)


@dataclass(frozen=True)
class MessageCues:
    n_sentences: int
    n_words: int
    sentiment_counts: tuple[int, int, int]  # (positive, neutral, negative)
    connective_counts: tuple[int, int, int, int]  # CONNECTIVE_CLASSES order
    planning_count: int
    claim_count: int
    premise_count: int
    request_count: int
    politeness_score: float
    subjectivity_count: int


def extract_message_cues(
    text: str,
    lexicon: LexiconSet,
    sentiment: SentimentScorer = sentiment_label,
    politeness: PolitenessScorer = politeness_score,
    request: RequestDetector = is_request,
) -> MessageCues:
    sentences = segment_sentences(text)
    sent_counts = [0, 0, 0]
    conn = [0, 0, 0, 0]
    planning = claims = premises = requests = subjective = 0
    n_words = 0
    active = lexicon.active_connectives
    cls_index = {c: i for i, c in enumerate(CONNECTIVE_CLASSES)}
    conn_m = lexicon.connective_matcher
    claim_m = lexicon.claim_matcher
    prem_m = lexicon.premise_matcher
    subj_m = lexicon.subjectivity_matcher
    plan = lexicon.planning_markers
    for sent in sentences:
        toks = tokenize(sent)
        n_words += len(toks)
        sent_counts[SENTIMENT_CLASSES.index(sentiment(toks, lexicon))] += 1
        if conn_m:
            for phrase in conn_m.find(toks):
                # planning markers form their own category, apart from temporal
                if phrase in plan:
                    planning += 1
                else:
                    conn[cls_index[active[phrase]]] += 1
        if claim_m:
            claims += len(claim_m.find(toks))
        if prem_m:
            premises += len(prem_m.find(toks))
        if subj_m:
            subjective += len(subj_m.find(toks))
        if request(sent):
            requests += 1
    return MessageCues(
        n_sentences=len(sentences),
        n_words=n_words,
        sentiment_counts=tuple(sent_counts),
        connective_counts=tuple(conn),
        planning_count=planning,
        claim_count=claims,
        premise_count=premises,
        request_count=requests,
        politeness_score=politeness(sentences, lexicon),
        subjectivity_count=subjective,
    )


# --------------------------------------------------------------------------
# Season aggregation
# --------------------------------------------------------------------------

CUE_NAMES = (
    "n_messages",
    "sentences_per_message",
    "words_per_sentence",
    "positive_sentiment",
    "neutral_sentiment",
    "negative_sentiment",
    "comparison",
    "contingency",
    "expansion",
    "temporal",
    "planning",
    "claims",
    "premises",
    "requests",
    "politeness",
    "subjectivity",
)

CUE_LABELS = {
    "n_messages": "Messages",
    "sentences_per_message": "Sentences",
    "words_per_sentence": "No. Words",
    "positive_sentiment": "Positive sentiment",
    "neutral_sentiment": "Neutral sentiment",
    "negative_sentiment": "Negative sentiment",
    "comparison": "Comparison",
    "contingency": "Contingency",
    "expansion": "Expansion",
    "temporal": "Temporal",
    "planning": "Planning",
    "claims": "Claims",
    "premises": "Premises",
    "requests": "Requests",
    "politeness": "Politeness",
    "subjectivity": "Subjectivity",
}

N_CUES = len(CUE_NAMES)


def direction_block(cues: Iterable[MessageCues]) -> np.ndarray:
    """Normalize summed message cues into one direction's cue vector."""
    cues = list(cues)
    out = np.zeros(N_CUES)
    n_msg = len(cues)
    if n_msg == 0:
        return out
    n_sent = sum(c.n_sentences for c in cues)
    n_words = sum(c.n_words for c in cues)
    pos = sum(c.sentiment_counts[0] for c in cues)
    neg = sum(c.sentiment_counts[2] for c in cues)
    conn = [sum(c.connective_counts[i] for c in cues) for i in range(4)]
    out[0] = n_msg
    out[1] = n_sent / n_msg
    out[13] = sum(c.request_count for c in cues) / n_msg
    out[14] = sum(c.politeness_score for c in cues) / n_msg
    if n_sent:
        out[2] = n_words / n_sent
        out[3] = pos / n_sent
        out[5] = neg / n_sent
        out[4] = 1.0 - out[3] - out[5]
        out[6:10] = np.array(conn) / n_sent
        out[10] = sum(c.planning_count for c in cues) / n_sent
        out[11] = sum(c.claim_count for c in cues) / n_sent
        out[12] = sum(c.premise_count for c in cues) / n_sent
        out[15] = sum(c.subjectivity_count for c in cues) / n_sent
    else:
        # messages without a single sentence carry no sentiment
        out[4] = 1.0
    return out


@dataclass(frozen=True)
class SeasonFeatures:
    betrayer: str
    victim: str
    b: np.ndarray
    v: np.ndarray

    @property
    def imbalance(self) -> np.ndarray:
        return self.b - self.v

    @property
    def n_messages(self) -> tuple[int, int]:
        return int(self.b[0]), int(self.v[0])

    def vector(self, blocks: Sequence[str] = ("B", "V", "imbalance")) -> np.ndarray:
        parts = {"B": self.b, "V": self.v, "imbalance": self.imbalance}
        return np.concatenate([parts[k] for k in blocks])


def feature_names(blocks: Sequence[str] = ("B", "V", "imbalance")) -> list[str]:
    return [f"{blk}:{c}" for blk in blocks for c in CUE_NAMES]


def aggregate_season_features(
    messages: Iterable,
    roles: tuple[str, str],
    lexicon: LexiconSet | None = None,
    cues_of: Callable | None = None,
) -> SeasonFeatures:
    """Aggregate one dyad-season.

    ``messages`` are :class:`~betrayal.gamelog.Message` objects; those not
    between the two roles are ignored. ``cues_of`` maps a message to its
    :class:`MessageCues` (e.g. a cache); by default cues are extracted with
    ``lexicon``.
    """
    b, v = roles
    if cues_of is None:
        if lexicon is None:
            raise ValueError("need a lexicon or a cues_of callable")
        cues_of = lambda m: extract_message_cues(m.text, lexicon)  # noqa: E731
    from_b, from_v = [], []
    for m in messages:
        if m.sender == b and m.recipient == v:
            from_b.append(cues_of(m))
        elif m.sender == v and m.recipient == b:
            from_v.append(cues_of(m))
    return SeasonFeatures(b, v, direction_block(from_b), direction_block(from_v))
