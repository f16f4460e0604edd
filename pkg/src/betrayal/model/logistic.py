"""Penalized logistic regression on internally standardized features.

The objective is the mean (optionally class-weighted) log-loss plus
``penalty / C`` with an unpenalized intercept.  l2 is solved by damped
Newton steps with Armijo backtracking; l1 by proximal Newton, where each
quadratic model is minimized by cyclic coordinate descent.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numba
import numpy as np

from ..errors import NonFinite, SingleClass
from .selection import SCORERS, univariate_select

C_MIN, C_MAX = 1e-12, 1e12
TOL = 1e-8
MAX_ITER = 10_000
_ARMIJO = 1e-4
_STALL = 1e-10
_DAMP = 1e-4


@dataclass(frozen=True)
class ModelConfig:
    k_features: int | str = "all"
    scorer: str = "anova_f"
    class_weight: str = "none"
    regularizer: str = "l2"
    C: float = 1.0
    objective_metric: str = "accuracy"

    def __post_init__(self):
        if self.k_features != "all" and (not isinstance(self.k_features, (int, np.integer)) or self.k_features < 1):
            raise ValueError(f"k_features must be a positive integer or 'all', got {self.k_features!r}")
        if self.scorer not in SCORERS:
            raise ValueError(f"unknown scorer {self.scorer!r}")
        if self.class_weight not in ("none", "balanced"):
            raise ValueError(f"unknown class_weight {self.class_weight!r}")
        if self.regularizer not in ("l1", "l2"):
            raise ValueError(f"unknown regularizer {self.regularizer!r}")
        if not C_MIN * (1 - 1e-9) <= self.C <= C_MAX * (1 + 1e-9):
            raise ValueError(f"C={self.C} outside [{C_MIN}, {C_MAX}]")
        if self.objective_metric not in ("accuracy", "f1"):
            raise ValueError(f"unknown objective metric {self.objective_metric!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        k = d.get("k_features", "all")
        k = k if k == "all" else int(k)
        return cls(k, d.get("scorer", "anova_f"), d.get("class_weight", "none"),
                   d.get("regularizer", "l2"), float(d.get("C", 1.0)), d.get("objective_metric", "accuracy"))


@dataclass
class TrainedModel:
    selected_indices: np.ndarray
    weights: np.ndarray  # on the standardized scale
    intercept: float
    means: np.ndarray
    sds: np.ndarray
    config: ModelConfig
    feature_names: list[str] = field(default_factory=list)
    n_iter: int = 0
    converged: bool = True

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, float)
        if self.selected_indices.size == 0:
            return np.full(X.shape[0], self.intercept)
        Z = (X[:, self.selected_indices] - self.means) / self.sds
        return Z @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)


def sigmoid(x):
    x = np.asarray(x, float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def sample_weights(y: np.ndarray, class_weight: str) -> np.ndarray:
    y = np.asarray(y).astype(int)
    if class_weight == "none":
        return np.ones(y.size)
    n = y.size
    n1 = int(y.sum())
    n0 = n - n1
    return np.where(y == 1, n / (2.0 * n1), n / (2.0 * n0))


def objective(theta, A, y, sw, lam, reg) -> float:
    """Mean weighted log-loss + lam * penalty; theta[0] is the intercept."""
    eta = A @ theta
    loss = float(np.mean(sw * (np.logaddexp(0.0, eta) - y * eta)))
    w = theta[1:]
    pen = 0.5 * float(w @ w) if reg == "l2" else float(np.abs(w).sum())
    return loss + lam * pen


def gradient(theta, A, y, sw, lam) -> np.ndarray:
    """Gradient of the l2-penalized objective."""
    g = A.T @ (sw * (sigmoid(A @ theta) - y)) / y.size
    g[1:] += lam * theta[1:]
    return g


def _hessian(A, sw, p):
    h = sw * p * (1.0 - p)
    return (A.T * h) @ A / A.shape[0]


def _newton_l2(A, y, sw, lam, tol, max_iter, trace):
    d = A.shape[1]
    theta = np.zeros(d)
    ridge = np.full(d, lam)
    ridge[0] = 0.0
    f = objective(theta, A, y, sw, lam, "l2")
    if trace is not None:
        trace.append(f)
    for it in range(1, max_iter + 1):
        g = gradient(theta, A, y, sw, lam)
        if np.max(np.abs(g)) <= tol:
            return theta, it - 1, True
        H = _hessian(A, sw, sigmoid(A @ theta)) + np.diag(ridge)
        H[np.diag_indices(d)] += 1e-12
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = -g
        slope = float(g @ step)
        if slope >= 0:  # numerically indefinite; fall back to steepest descent
            step, slope = -g, -float(g @ g)
        t = 1.0
        while True:
            cand = theta + t * step
            fc = objective(cand, A, y, sw, lam, "l2")
            if fc <= f + _ARMIJO * t * slope:
                break
            t *= 0.5
            if t < 1e-14:
                return theta, it, False
        if fc >= f and np.max(np.abs(t * step)) < 1e-15:
            return theta, it, True
        theta, f = cand, fc
        if trace is not None:
            trace.append(f)
    return theta, max_iter, False


@numba.njit(cache=True)
def _cd_quadratic(H, g, theta, lam, max_sweeps, tol):
    """Minimize g.(u - theta) + 0.5 (u - theta)' H (u - theta) + lam |u[1:]|_1."""
    d = theta.size
    u = theta.copy()
    Hd = np.zeros(d)  # H @ (u - theta)
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(d):
            a = H[j, j]
            c = g[j] + Hd[j] - a * (u[j] - theta[j])
            z = theta[j] - c / a
            if j == 0:
                new = z
            else:
                thr = lam / a
                if z > thr:
                    new = z - thr
                elif z < -thr:
                    new = z + thr
                else:
                    new = 0.0
            delta = new - u[j]
            if delta != 0.0:
                for i in range(d):
                    Hd[i] += H[i, j] * delta
                u[j] = new
                if abs(delta) > biggest:
                    biggest = abs(delta)
        if biggest <= tol:
            break
    return u


def _prox_newton_l1(A, y, sw, lam, tol, max_iter, trace):
    d = A.shape[1]
    theta = np.zeros(d)
    f = objective(theta, A, y, sw, lam, "l1")
    if trace is not None:
        trace.append(f)
    for it in range(1, max_iter + 1):
        p = sigmoid(A @ theta)
        g = A.T @ (sw * (p - y)) / y.size
        H = _hessian(A, sw, p)
        # damping keeps the model strictly convex under collinear columns
        H[np.diag_indices(d)] += _DAMP
        u = _cd_quadratic(H, g, theta, lam, 200, tol * 1e-1)
        step = u - theta
        if np.max(np.abs(step)) <= tol:
            return theta, it - 1, True
        w = theta[1:]
        decrease = float(g @ step) + lam * (np.abs(u[1:]).sum() - np.abs(w).sum())
        t = 1.0
        while True:
            cand = theta + t * step
            fc = objective(cand, A, y, sw, lam, "l1")
            if fc <= f + _ARMIJO * t * min(decrease, 0.0):
                break
            t *= 0.5
            if t < 1e-14:
                return theta, it, False
        # collinear columns leave flat directions where steps never shrink;
        # a stalled objective counts as converged
        done = np.max(np.abs(t * step)) <= tol or f - fc <= _STALL * max(1.0, abs(f))
        theta, f = cand, fc
        if trace is not None:
            trace.append(f)
        if done:
            return theta, it, True
    return theta, max_iter, False


def fit_standardized(
    Z: np.ndarray,
    y: np.ndarray,
    sw: np.ndarray,
    C: float,
    regularizer: str,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    trace: list | None = None,
) -> tuple[np.ndarray, int, bool]:
    """Solve for (intercept, weights) on already standardized columns."""
    y = np.asarray(y, float)
    if Z.shape[1] == 0:
        rate = float(sw @ y / sw.sum())
        return np.array([np.log(rate / (1.0 - rate))]), 0, True
    A = np.column_stack([np.ones(Z.shape[0]), Z])
    lam = 1.0 / C
    if regularizer == "l2":
        return _newton_l2(A, y, sw, lam, tol, max_iter, trace)
    return _prox_newton_l1(A, y, sw, lam, tol, max_iter, trace)


def standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column means, sds and a mask of columns with usable spread."""
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    keep = sd > 1e-12 * np.maximum(1.0, np.abs(mu))
    return mu, sd, keep


def check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, float)
    y = np.asarray(y).astype(int).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n, p) with one label per row")
    if not np.all(np.isfinite(X)):
        raise NonFinite("feature matrix contains non-finite values")
    if np.unique(y).size < 2:
        raise SingleClass("labels contain a single class")
    return X, y


def fit_logistic(
    X,
    y,
    config: ModelConfig = ModelConfig(),
    feature_names: Sequence[str] | None = None,
    trace: list | None = None,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
) -> TrainedModel:
    """Select features, standardize, and fit.  ``trace`` collects objective values."""
    X, y = check_xy(X, y)
    idx = univariate_select(X, y, config.k_features, config.scorer)
    mu, sd, keep = standardize(X[:, idx])
    idx, mu, sd = idx[keep], mu[keep], sd[keep]
    Z = (X[:, idx] - mu) / sd
    sw = sample_weights(y, config.class_weight)
    theta, n_iter, ok = fit_standardized(Z, y, sw, config.C, config.regularizer, tol, max_iter, trace)
    names = [feature_names[i] for i in idx] if feature_names is not None else [f"x{i}" for i in idx]
    return TrainedModel(idx, theta[1:].copy(), float(theta[0]), mu, sd, config, names, n_iter, ok)
