"""Cue lexicons: loading, phrase matching, and frequency pruning."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..errors import EmptyCorpus, InputError
from .text import tokenize

CONNECTIVE_CLASSES = ("comparison", "contingency", "expansion", "temporal")
PRUNE_THRESHOLD = 0.20


@dataclass(frozen=True)
class PolitenessCue:
    name: str
    pattern: str
    weight: float

    @property
    def regex(self) -> re.Pattern:
        return _compile(self.pattern)


_regex_cache: dict[str, re.Pattern] = {}


def _compile(pattern: str) -> re.Pattern:
    rx = _regex_cache.get(pattern)
    if rx is None:
        rx = _regex_cache[pattern] = re.compile(pattern)
    return rx


class PhraseMatcher:
    """Greedy longest-first matching of token phrases."""

    def __init__(self, phrases: Iterable[str]):
        self._by_first: dict[str, list[tuple[str, ...]]] = {}
        self._names: dict[tuple[str, ...], str] = {}
        for p in phrases:
            toks = tuple(tokenize(p))
            if not toks:
                continue
            self._names[toks] = p
            self._by_first.setdefault(toks[0], []).append(toks)
        for cands in self._by_first.values():
            cands.sort(key=len, reverse=True)

    def find(self, tokens: list[str]) -> list[str]:
        out = []
        i, n = 0, len(tokens)
        by_first = self._by_first
        while i < n:
            cands = by_first.get(tokens[i])
            if cands:
                for toks in cands:
                    k = len(toks)
                    if tuple(tokens[i:i + k]) == toks:
                        out.append(self._names[toks])
                        i += k
                        break
                else:
                    i += 1
            else:
                i += 1
        return out

    def __bool__(self) -> bool:
        return bool(self._names)


@dataclass(frozen=True)
class LexiconSet:
    connectives: dict[str, str] = field(default_factory=dict)
    planning_markers: frozenset[str] = frozenset()
    claim_markers: frozenset[str] = frozenset()
    premise_markers: frozenset[str] = frozenset()
    subjectivity_phrases: frozenset[str] = frozenset()
    sentiment_lexicon: dict[str, str] = field(default_factory=dict)
    politeness_cues: tuple[PolitenessCue, ...] = ()
    pruned: frozenset[str] = frozenset()
    version: str = "custom"

    def __post_init__(self):
        temporal = {p for p, c in self.connectives.items() if c == "temporal"}
        stray = set(self.planning_markers) - temporal
        if stray:
            raise InputError(f"planning markers outside the temporal class: {sorted(stray)}")
        for c in self.connectives.values():
            if c not in CONNECTIVE_CLASSES:
                raise InputError(f"unknown connective class {c!r}")
        for cue in self.politeness_cues:
            if not math.isfinite(cue.weight):
                raise InputError(f"politeness cue {cue.name!r} has a non-finite weight")

    @classmethod
    def empty(cls) -> "LexiconSet":
        return cls(version="empty")

    @property
    def active_connectives(self) -> dict[str, str]:
        return {p: c for p, c in self.connectives.items() if p not in self.pruned}

    # matchers are cached per instance; the dataclass is frozen so cache via __dict__
    def _matcher(self, key: str, phrases) -> PhraseMatcher:
        cache = self.__dict__.setdefault("_matchers", {})
        m = cache.get(key)
        if m is None:
            m = cache[key] = PhraseMatcher(phrases)
        return m

    @property
    def connective_matcher(self) -> PhraseMatcher:
        return self._matcher("connectives", self.active_connectives)

    @property
    def claim_matcher(self) -> PhraseMatcher:
        return self._matcher("claims", self.claim_markers)

    @property
    def premise_matcher(self) -> PhraseMatcher:
        return self._matcher("premises", self.premise_markers)

    @property
    def subjectivity_matcher(self) -> PhraseMatcher:
        return self._matcher("subjectivity", self.subjectivity_phrases)


def _lines(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def _read(directory: Path | None, name: str) -> str:
    if directory is None:
        return resources.files("betrayal.lingcues").joinpath("data", name).read_text(encoding="utf-8")
    return (directory / name).read_text(encoding="utf-8")


def load_lexicons(directory: str | Path | None = None) -> LexiconSet:
    """Load lexicon files from ``directory`` (default: the shipped set).

    Files: ``connectives.tsv`` (phrase, class), ``politeness.tsv`` (name,
    regex, weight), and plain one-phrase-per-line lists ``planning.txt``,
    ``claims.txt``, ``premises.txt``, ``subjectivity.txt``, ``positive.txt``,
    ``negative.txt``. Lines starting with ``#`` are comments.
    """
    d = Path(directory) if directory is not None else None
    try:
        connectives = {}
        for line in _lines(_read(d, "connectives.tsv")):
            phrase, cls = line.split("\t")
            connectives[phrase.strip().lower()] = cls.strip()
        sentiment = {}
        for w in _lines(_read(d, "positive.txt")):
            sentiment[w.lower()] = "positive"
        for w in _lines(_read(d, "negative.txt")):
            sentiment[w.lower()] = "negative"
        cues = []
        for line in _lines(_read(d, "politeness.tsv")):
            name, pattern, weight = line.split("\t")
            cues.append(PolitenessCue(name, pattern, float(weight)))
        try:
            version = _read(d, "VERSION.txt").strip()
        except FileNotFoundError:
            version = "unversioned"

        def phrases(name):
            return frozenset(p.lower() for p in _lines(_read(d, name)))

        return LexiconSet(
            connectives=connectives,
            planning_markers=phrases("planning.txt"),
            claim_markers=phrases("claims.txt"),
            premise_markers=phrases("premises.txt"),
            subjectivity_phrases=phrases("subjectivity.txt"),
            sentiment_lexicon=sentiment,
            politeness_cues=tuple(cues),
            version=version,
        )
    except FileNotFoundError as exc:
        raise InputError(f"lexicon file missing: {exc.filename}") from None
    except ValueError as exc:
        raise InputError(f"malformed lexicon file: {exc}") from None


def prune_frequent_connectives(
    messages: Iterable[str], lexicon: LexiconSet, threshold: float = PRUNE_THRESHOLD
) -> LexiconSet:
    """Prune connectives present in more than ``threshold`` of the messages."""
    matcher = PhraseMatcher(lexicon.connectives)
    doc_freq: dict[str, int] = {}
    n = 0
    for text in messages:
        n += 1
        for phrase in set(matcher.find(tokenize(text))):
            doc_freq[phrase] = doc_freq.get(phrase, 0) + 1
    if n == 0:
        raise EmptyCorpus("no messages to compute connective frequencies")
    pruned = frozenset(p for p, k in doc_freq.items() if k / n > threshold)
    return replace(lexicon, pruned=pruned)
