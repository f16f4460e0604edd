"""Sentence segmentation and tokenization."""

from __future__ import annotations

import re
import string

# Tokens that end in a period without ending a sentence.
ABBREVIATIONS = frozenset(
    """e.g. i.e. etc. vs. mr. mrs. ms. dr. st. jr. sr. prof. approx. cf. no.
    a.m. p.m. u.s. u.k.""".split()
)

_BOUNDARY = re.compile(r"[.!?]+(?=\s|$)")
_WORDCHAR = re.compile(r"\w")
_STRIP = string.punctuation + "“”‘’…–—"


def segment_sentences(text: str) -> list[str]:
    """Split on ``.``/``!``/``?`` runs followed by whitespace or end of text.

    A period closing a known abbreviation ("e.g.", "Mr.") does not split.
    Fragments without any word character are dropped.
    """
    sentences = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        end = m.end()
        if m.group() == ".":
            # last whitespace-delimited token up to and including the period
            token = text[start:end].rsplit(None, 1)[-1].lower() if text[start:end].strip() else ""
            if token in ABBREVIATIONS:
                continue
        _emit(text[start:end], sentences)
        start = end
    _emit(text[start:], sentences)
    return sentences


def _emit(chunk: str, out: list[str]) -> None:
    chunk = chunk.strip()
    if chunk and _WORDCHAR.search(chunk):
        out.append(chunk)


def tokenize(text: str) -> list[str]:
    """Whitespace split, edge punctuation stripped, case-folded."""
    out = []
    for raw in text.split():
        tok = raw.replace("\u2019", "'").strip(_STRIP).casefold()
        if tok:
            out.append(tok)
    return out
