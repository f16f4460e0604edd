"""Classification metrics and the cross-validation report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import LengthMismatch
from ..stats import BootstrapResult, bootstrap


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def of(cls, predictions, labels) -> "Confusion":
        p = np.asarray(predictions).astype(int).ravel()
        y = np.asarray(labels).astype(int).ravel()
        if p.shape != y.shape:
            raise LengthMismatch(f"{p.size} predictions for {y.size} labels")
        if np.any((y != 0) & (y != 1)) or np.any((p != 0) & (p != 1)):
            raise ValueError("labels and predictions must be binary")
        return cls(
            int(np.sum((p == 1) & (y == 1))),
            int(np.sum((p == 1) & (y == 0))),
            int(np.sum((p == 0) & (y == 1))),
            int(np.sum((p == 0) & (y == 0))),
        )


def accuracy(c: Confusion) -> float:
    return (c.tp + c.tn) / c.n if c.n else 0.0


def f1(c: Confusion) -> float:
    denom = 2 * c.tp + c.fp + c.fn
    return 2 * c.tp / denom if denom else 0.0


def mcc(c: Confusion) -> float:
    factors = (c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn)
    if 0 in factors:
        return 0.0
    num = c.tp * c.tn - c.fp * c.fn
    # integer product first keeps MCC(y, y) exactly 1
    val = num / math.sqrt(math.prod(factors))
    return max(-1.0, min(1.0, val))


METRICS = {"accuracy": accuracy, "f1": f1, "mcc": mcc}


def _metric_of_pairs(name: str):
    fn = METRICS[name]

    def stat(pairs: np.ndarray) -> float:
        return fn(Confusion.of(pairs[:, 0], pairs[:, 1]))

    return stat


@dataclass
class EvalReport:
    accuracy: float
    f1: float
    mcc: float
    confusion: Confusion
    majority_accuracy: float
    per_fold: list[dict] = field(default_factory=list)
    ci: dict[str, BootstrapResult] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.confusion.n

    def to_dict(self) -> dict:
        c = self.confusion
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "mcc": self.mcc,
            "confusion": {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn},
            "n": self.n,
            "baseline": {"majority_accuracy": self.majority_accuracy, "mcc": 0.0, "all_negative_f1": 0.0},
            "per_fold": self.per_fold,
            "ci": {k: v.to_dict() for k, v in self.ci.items()},
        }


def evaluate(
    predictions: Sequence[int],
    labels: Sequence[int],
    bootstrap_metrics: Sequence[str] = (),
    B: int = 1000,
    seed: int = 0,
) -> EvalReport:
    c = Confusion.of(predictions, labels)
    y = np.asarray(labels).astype(int).ravel()
    pos = float(y.mean()) if y.size else 0.0
    report = EvalReport(accuracy(c), f1(c), mcc(c), c, max(pos, 1.0 - pos))
    if bootstrap_metrics and c.n:
        pairs = np.column_stack([np.asarray(predictions).astype(int).ravel(), y])
        for name in bootstrap_metrics:
            report.ci[name] = bootstrap(pairs, _metric_of_pairs(name), B=B, seed=seed)
    return report
