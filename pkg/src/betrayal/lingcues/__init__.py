from .cues import (
    CUE_LABELS,
    CUE_NAMES,
    MessageCues,
    SeasonFeatures,
    aggregate_season_features,
    direction_block,
    extract_message_cues,
    feature_names,
    is_request,
    politeness_from_counts,
    politeness_hits,
    politeness_score,
    sentiment_label,
)
from .lexicon import CONNECTIVE_CLASSES, LexiconSet, PhraseMatcher, load_lexicons, prune_frequent_connectives
from .text import segment_sentences, tokenize

__all__ = [
    "CONNECTIVE_CLASSES",
    "CUE_LABELS",
    "CUE_NAMES",
    "LexiconSet",
    "MessageCues",
    "PhraseMatcher",
    "SeasonFeatures",
    "aggregate_season_features",
    "direction_block",
    "extract_message_cues",
    "feature_names",
    "is_request",
    "load_lexicons",
    "politeness_from_counts",
    "politeness_hits",
    "politeness_score",
    "prune_frequent_connectives",
    "segment_sentences",
    "sentiment_label",
    "tokenize",
]
