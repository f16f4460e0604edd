"""Flat key=value model files and coefficient rankings."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..lingcues import CUE_LABELS
from .logistic import ModelConfig, TrainedModel

FORMAT = "betrayal-logistic"
VERSION = 1


def dumps_model(model: TrainedModel) -> str:
    lines = [f"format = {FORMAT}", f"version = {VERSION}"]
    for k, v in model.config.to_dict().items():
        lines.append(f"config.{k} = {v!r}" if isinstance(v, float) else f"config.{k} = {v}")
    lines.append(f"intercept = {model.intercept!r}")
    lines.append(f"n_features = {len(model.weights)}")
    for j, idx in enumerate(model.selected_indices):
        lines.append(f"feature.{j}.name = {model.feature_names[j]}")
        lines.append(f"feature.{j}.index = {int(idx)}")
        lines.append(f"feature.{j}.mean = {float(model.means[j])!r}")
        lines.append(f"feature.{j}.sd = {float(model.sds[j])!r}")
        lines.append(f"feature.{j}.weight = {float(model.weights[j])!r}")
    return "\n".join(lines) + "\n"


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def loads_model(text: str) -> TrainedModel:
    kv = parse_kv(text)
    if kv.get("format") != FORMAT:
        raise ValueError("not a model file")
    if int(kv.get("version", -1)) != VERSION:
        raise ValueError(f"unsupported model version {kv.get('version')}")
    cfg = ModelConfig.from_dict({k[7:]: v for k, v in kv.items() if k.startswith("config.")})
    m = int(kv["n_features"])

    def col(field, cast=float):
        return [cast(kv[f"feature.{j}.{field}"]) for j in range(m)]

    return TrainedModel(
        np.array(col("index", int), dtype=int),
        np.array(col("weight")),
        float(kv["intercept"]),
        np.array(col("mean")),
        np.array(col("sd")),
        cfg,
        col("name", str),
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path: str | Path) -> TrainedModel:
    return loads_model(Path(path).read_text())


def rank_features(model: TrainedModel) -> list[tuple[str, float]]:
    """Selected features by decreasing |coefficient|; ties keep column order."""
    order = sorted(range(len(model.weights)), key=lambda j: (-abs(model.weights[j]), j))
    return [(model.feature_names[j], float(model.weights[j])) for j in order]


def _pretty(name: str) -> str:
    block, _, cue = name.partition(":")
    return f"{CUE_LABELS.get(cue, cue)} ({block})" if cue else name


def format_ranking(ranked: list[tuple[str, float]]) -> str:
    """Two-column text table: positive features left, negative right."""
    pos = [f"{_pretty(n)} {w:+.3f}" for n, w in ranked if w > 0]
    neg = [f"{_pretty(n)} {w:+.3f}" for n, w in ranked if w < 0]
    width = max([len("Positive features")] + [len(s) for s in pos]) + 4
    rows = [f"{'Positive features':<{width}}Negative features"]
    for i in range(max(len(pos), len(neg))):
        left = pos[i] if i < len(pos) else ""
        right = neg[i] if i < len(neg) else ""
        rows.append(f"{left:<{width}}{right}".rstrip())
    return "\n".join(rows) + "\n"
