"""Univariate feature scoring and top-k selection."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import NonFinite, SingleClass

SCORERS = ("anova_f", "chi2")


def _check(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, float)
    y = np.asarray(y).astype(int).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n, p) with one label per row")
    if not np.all(np.isfinite(X)):
        raise NonFinite("feature matrix contains non-finite values")
    if np.unique(y).size < 2:
        raise SingleClass("labels contain a single class")
    return X, y


def anova_f(X, y) -> np.ndarray:
    """Between-class over within-class mean square, per column.

    A column constant within each class but not overall scores inf; a
    column constant overall scores 0.
    """
    X, y = _check(X, y)
    n = X.shape[0]
    grand = X.mean(axis=0)
    ssb = np.zeros(X.shape[1])
    ssw = np.zeros(X.shape[1])
    classes = np.unique(y)
    for c in classes:
        Xc = X[y == c]
        mc = Xc.mean(axis=0)
        ssb += Xc.shape[0] * (mc - grand) ** 2
        ssw += ((Xc - mc) ** 2).sum(axis=0)
    dfb, dfw = classes.size - 1, n - classes.size
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (ssb / dfb) / (ssw / dfw) if dfw > 0 else np.full(X.shape[1], np.inf)
    f = np.where(ssb <= 1e-12 * np.maximum(1.0, ssw), 0.0, f)
    return np.where(np.isnan(f), 0.0, f)


def minmax_scale(X) -> np.ndarray:
    X = np.asarray(X, float)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    ok = span > 0
    out[:, ok] = (X[:, ok] - lo[ok]) / span[ok]
    return out


def chi2(X, y) -> np.ndarray:
    """Chi-square of class-conditional feature mass after min-max scaling."""
    X, y = _check(X, y)
    Xs = minmax_scale(X)
    classes = np.unique(y)
    Y = (y[:, None] == classes[None, :]).astype(float)
    observed = Y.T @ Xs
    expected = Y.mean(axis=0)[:, None] * Xs.sum(axis=0)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return terms.sum(axis=0)


def score_features(X, y, scorer: str) -> np.ndarray:
    if scorer == "anova_f":
        return anova_f(X, y)
    if scorer == "chi2":
        return chi2(X, y)
    raise ValueError(f"unknown scorer {scorer!r}")


def rank_by_score(scores: np.ndarray) -> np.ndarray:
    """Column indices by descending score; ties keep the lower index first."""
    return np.lexsort((np.arange(scores.size), -scores))


def resolve_k(k, n_features: int) -> int:
    if k == "all":
        return n_features
    k = int(k)
    if k < 1:
        raise ValueError("k must be positive")
    if k > n_features:
        warnings.warn(f"k={k} exceeds {n_features} features; using all", stacklevel=3)
        return n_features
    return k


def univariate_select(X, y, k, scorer: str = "anova_f") -> np.ndarray:
    scores = score_features(X, y, scorer)
    kk = resolve_k(k, scores.size)
    return np.sort(rank_by_score(scores)[:kk])
