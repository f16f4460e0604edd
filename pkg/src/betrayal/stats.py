"""t-tests, Mann-Whitney U and bootstrap, with no scipy dependency.

Student-t tail probabilities go through the regularized incomplete beta
function, evaluated with the modified Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSample
from .rng import resample_indices

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with ``df`` degrees of freedom."""
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return tail if t >= 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    return 1.0 - t_sf(t, df)


def t_two_sided(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return float(min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t))))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting it
    statistic: float
    p_value: float
    df: float | None
    n: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value, "df": self.df, "n": list(self.n)}


def _clean(sample) -> np.ndarray:
    return np.asarray(sample, dtype=float).ravel()


def one_sample_t(sample: Sequence[float], mu0: float = 0.0) -> TestResult:
    x = _clean(sample)
    n = x.size
    if n < 2:
        raise DegenerateSample("one-sample t-test needs at least 2 observations")
    s = x.std(ddof=1)
    if s == 0:
        raise DegenerateSample("sample variance is zero")
    t = (x.mean() - mu0) / (s / math.sqrt(n))
    df = n - 1
    return TestResult(float(t), t_two_sided(float(t), df), float(df), (n,))


def two_sample_t(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Welch's unequal-variance t-test, two-sided."""
    x, y = _clean(a), _clean(b)
    na, nb = x.size, y.size
    if na < 2 or nb < 2:
        raise DegenerateSample("each sample needs at least 2 observations")
    va, vb = x.var(ddof=1) / na, y.var(ddof=1) / nb
    if va == 0 and vb == 0:
        raise DegenerateSample("both samples have zero variance")
    va, vb = float(va), float(vb)
    t = (x.mean() - y.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va * va / (na - 1) + vb * vb / (nb - 1))
    return TestResult(float(t), t_two_sided(float(t), df), float(df), (na, nb))


def midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    sv = values[order]
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


EXACT_MW_LIMIT = 12


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Mann-Whitney U of ``a`` against ``b``, two-sided.

    Exact (full enumeration of rank assignments) when the pooled size is at
    most 12 and there are no ties; otherwise the normal approximation with
    tie and continuity corrections.  ``df`` is None.
    """
    x, y = _clean(a), _clean(b)
    na, nb = x.size, y.size
    if na < 1 or nb < 1:
        raise DegenerateSample("Mann-Whitney needs non-empty samples")
    pooled = np.concatenate([x, y])
    ranks = midranks(pooled)
    u = float(ranks[:na].sum() - na * (na + 1) / 2.0)
    n = na + nb
    has_ties = len(np.unique(pooled)) < n
    if n <= EXACT_MW_LIMIT and not has_ties:
        base = na * (na + 1) // 2
        dist = [sum(c) - base for c in combinations(range(1, n + 1), na)]
        total = len(dist)
        le = sum(1 for d in dist if d <= u) / total
        ge = sum(1 for d in dist if d >= u) / total
        p = min(1.0, 2.0 * min(le, ge))
        return TestResult(u, p, None, (na, nb))
    mu = na * nb / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts ** 3 - counts))
    var = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return TestResult(u, 1.0, None, (na, nb))
    z = max(0.0, abs(u - mu) - 0.5) / math.sqrt(var)
    return TestResult(u, min(1.0, 2.0 * normal_sf(z)), None, (na, nb))


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    se: float
    ci_low: float
    ci_high: float
    B: int
    seed: int
    level: float = 0.95

    def to_dict(self) -> dict:
        return {
            "point": self.point, "se": self.se, "ci_low": self.ci_low, "ci_high": self.ci_high,
            "B": self.B, "seed": self.seed, "level": self.level,
        }

    def excludes(self, value: float) -> bool:
        return not (self.ci_low <= value <= self.ci_high)


_BATCH = 256


def bootstrap(
    sample,
    statistic_fn: Callable[[np.ndarray], float] = np.mean,
    B: int = 1000,
    seed: int = 0,
    level: float = 0.95,
) -> BootstrapResult:
    """Nonparametric bootstrap over the first axis of ``sample``.

    Replicate ``r`` resamples with xoshiro256** stream ``r`` of ``seed``
    (see :mod:`betrayal.rng`).  ``se`` is the sample standard deviation of
    the replicate statistics; the CI is the percentile interval.
    """
    data = np.asarray(sample)
    n = data.shape[0] if data.ndim else 0
    if n < 1:
        raise DegenerateSample("bootstrap needs at least one observation")
    if B < 100:
        raise ValueError("use at least 100 bootstrap replicates")
    point = float(statistic_fn(data))
    reps = np.empty(B)
    for start in range(0, B, _BATCH):
        block = range(start, min(B, start + _BATCH))
        idx = resample_indices(seed, n, block)
        for k, row in enumerate(idx):
            reps[start + k] = statistic_fn(data[row])
    se = float(reps.std(ddof=1))
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(reps, [alpha, 1.0 - alpha])
    return BootstrapResult(point, se, float(lo), float(hi), B, seed, level)
