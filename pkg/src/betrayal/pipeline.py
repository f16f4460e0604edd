"""Corpus to cohort to features to cross-validated model, for one task."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cohort import (
    CSV_BLOCKS,
    BalanceReport,
    TaskInstance,
    build_cohort,
    class_balance,
    design_matrix,
    false_positive_proximity,
    featurize,
    label_imminent_task,
    label_longterm_task,
)
from .errors import DegenerateSample, InsufficientData
from .gamelog import GameLog, is_player_message
from .lingcues import CUE_NAMES, LexiconSet, feature_names, load_lexicons, prune_frequent_connectives
from .model import Grid, GridResult, format_ranking, grid_search, rank_features
from .relations import DEFAULT_CONFIG, RelationConfig
from .stats import TestResult, bootstrap, one_sample_t

TASKS = ("longterm", "imminent")
TASK_OBJECTIVE = {"longterm": "accuracy", "imminent": "f1"}
MIN_PER_CLASS = 10
MIN_GAMES = 5
CURVE_MAX_T = 10


@dataclass
class TaskRun:
    task: str
    instances: list[TaskInstance]
    result: GridResult
    ranking: list[tuple[str, float]]
    imbalance: dict[str, TestResult]
    curves: list[dict]
    balance: BalanceReport | None
    classes: dict
    extras: dict = field(default_factory=dict)

    @property
    def ranking_table(self) -> str:
        return format_ranking(self.ranking)

    def summary(self) -> dict:
        return {
            "task": self.task,
            "best_config": self.result.best.to_dict(),
            "report": self.result.report.to_dict(),
            "classes": self.classes,
            "balance": self.balance.to_dict() if self.balance else None,
            "imbalance_tests": {k: v.to_dict() for k, v in self.imbalance.items()},
            "ranking": [{"feature": n, "coefficient": w} for n, w in self.ranking],
            **self.extras,
        }


def player_texts(corpus: Sequence[GameLog]) -> list[str]:
    return [m.text for g in corpus for s in g.seasons for m in s.messages if is_player_message(m, g.powers)]


def corpus_lexicon(corpus: Sequence[GameLog], lexicon: LexiconSet | None = None, prune: bool = True) -> LexiconSet:
    lexicon = lexicon if lexicon is not None else load_lexicons()
    return prune_frequent_connectives(player_texts(corpus), lexicon) if prune else lexicon


def task_instances(
    corpus: Sequence[GameLog],
    task: str,
    relations: RelationConfig = DEFAULT_CONFIG,
    seed: int = 0,
    strict_balance: bool = False,
) -> tuple[list[TaskInstance], BalanceReport | None]:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    cohort = build_cohort(corpus, relations, seed, strict_balance)
    if task == "longterm":
        return label_longterm_task(cohort.pairs), cohort.balance
    return label_imminent_task(cohort.betrayals), None


def check_sufficient(instances: Sequence[TaskInstance], k_folds: int) -> None:
    pos = sum(i.label for i in instances)
    neg = len(instances) - pos
    games = len({i.group_key for i in instances})
    if min(pos, neg) < MIN_PER_CLASS or games < max(MIN_GAMES, k_folds):
        raise InsufficientData(
            f"{pos} positive / {neg} negative instances from {games} games; "
            f"need {MIN_PER_CLASS} per class and {max(MIN_GAMES, k_folds)} games"
        )


def imbalance_tests(instances: Sequence[TaskInstance], label: int | None = 1) -> dict[str, TestResult]:
    """One-sample t-test of B - V per cue over the seasons with ``label`` (None: all)."""
    names = feature_names(CSV_BLOCKS)
    rows = np.array([i.features for i in instances if label is None or i.label == label])
    out = {}
    if rows.size == 0:
        return out
    for cue in CUE_NAMES:
        col = rows[:, names.index(f"imbalance:{cue}")]
        try:
            out[cue] = one_sample_t(col)
        except DegenerateSample:
            continue
    return out


def cue_curves(
    instances: Sequence[TaskInstance],
    group_of=lambda i: "betrayal" if i.label == 1 else "control",
    max_t: int = CURVE_MAX_T,
    B: int = 200,
    seed: int = 0,
) -> list[dict]:
    """Per relative season: mean of every B and V cue with a bootstrap SE."""
    names = feature_names(CSV_BLOCKS)
    buckets: dict[tuple, list] = defaultdict(list)
    for inst in instances:
        if inst.t <= max_t:
            buckets[(group_of(inst), inst.t)].append(inst.features)
    rows = []
    for (group, t) in sorted(buckets):
        F = np.array(buckets[(group, t)])
        for role in ("B", "V"):
            for cue in CUE_NAMES:
                col = F[:, names.index(f"{role}:{cue}")]
                se = bootstrap(col, B=B, seed=seed).se if col.size > 1 else 0.0
                rows.append({"group": group, "t": t, "role": role, "cue": cue,
                             "mean": float(col.mean()), "se": se, "n": int(col.size)})
    return rows


def run_task(
    corpus: Sequence[GameLog],
    task: str = "longterm",
    lexicon: LexiconSet | None = None,
    seed: int = 0,
    relations: RelationConfig = DEFAULT_CONFIG,
    strict_balance: bool = False,
    grid: Grid | None = None,
    k_folds: int = 5,
    bootstrap_B: int = 1000,
    prune: bool = True,
    nested: bool = True,
    curves: bool = True,
) -> TaskRun:
    corpus = list(corpus)
    lex = corpus_lexicon(corpus, lexicon, prune)
    raw, balance = task_instances(corpus, task, relations, seed, strict_balance)
    instances = featurize(raw, corpus, lex)
    check_sufficient(instances, k_folds)
    X, y, groups, names = design_matrix(instances)
    grid = grid if grid is not None else Grid(objective_metric=TASK_OBJECTIVE[task])
    result = grid_search(X, y, groups, grid, k_folds, seed, names, bootstrap_B, nested)
    extras = {"pruned_connectives": sorted(lex.pruned)}
    group_of = (lambda i: "betrayal") if task == "imminent" else (lambda i: "betrayal" if i.label else "control")
    if task == "imminent":
        extras["false_positive_proximity"] = false_positive_proximity(instances, result.oof_predictions)
    return TaskRun(
        task, instances, result, rank_features(result.model),
        imbalance_tests(instances, None if task == "imminent" else 1),
        cue_curves(instances, group_of, seed=seed) if curves else [], balance, class_balance(instances), extras,
    )
