"""Feature statistics: Pearson matrix, information gain, t/p values, Spearman.

Everything here is computed directly from the data; the Student-t tail
uses a continued-fraction evaluation of the regularized incomplete beta
function instead of a statistics library.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import DegenerateColumnWarning, FeatureMatrix


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: list[str]
    M: np.ndarray
    constant: list[str] = field(default_factory=list)

    def __getitem__(self, key: tuple[str, str]) -> float:
        a, b = key
        return float(self.M[self.labels.index(a), self.labels.index(b)])

    def with_target(self) -> dict[str, float]:
        """Correlation of each feature with the last (target) column."""
        return {lab: float(self.M[i, -1]) for i, lab in enumerate(self.labels[:-1])}


@dataclass(frozen=True)
class FeatureScore:
    name: str
    pearson_r: float
    info_gain: float
    t_value: float
    p_value: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pearson_r": self.pearson_r,
            "info_gain": self.info_gain,
            "t_value": _json_float(self.t_value),
            "p_value": self.p_value,
        }


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def pearson(x, y) -> float:
    """Sample Pearson correlation; 0.0 if either input is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson_matrix(fm: FeatureMatrix, target_name: str = "Level") -> CorrelationMatrix:
    """Correlation matrix over all features with the encoded target appended last."""
    data = np.column_stack([fm.X, fm.y.astype(float)])
    labels = [*fm.column_names, target_name]
    if data.shape[0] < 3:
        raise ValueError("pearson_matrix needs at least three rows")
    centered = data - data.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    flat = ss == 0.0
    norm = np.sqrt(np.where(flat, 1.0, ss))
    unit = centered / norm
    M = unit.T @ unit
    M = (M + M.T) / 2
    M[flat, :] = 0.0
    M[:, flat] = 0.0
    np.clip(M, -1.0, 1.0, out=M)
    np.fill_diagonal(M, 1.0)
    constant = [labels[i] for i in np.flatnonzero(flat)]
    if constant:
        warnings.warn(f"constant columns {constant} have zero correlation with everything",
                      DegenerateColumnWarning, stacklevel=2)
    return CorrelationMatrix(labels, M, constant)


def entropy(values) -> float:
    """Shannon entropy in bits of a discrete sample."""
    _, counts = np.unique(np.asarray(values), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def information_gain(feature, target) -> float:
    """H(target) - H(target | feature), in bits; the feature is treated as categorical."""
    f = np.asarray(feature)
    t = np.asarray(target)
    if f.shape != t.shape:
        raise ValueError("feature and target have different lengths")
    if f.size == 0:
        raise ValueError("empty input")
    cond = 0.0
    for v in np.unique(f):
        mask = f == v
        cond += mask.mean() * entropy(t[mask])
    return max(0.0, float(entropy(t) - cond))


# Regularized incomplete beta, modified Lentz continued fraction.
_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, df / (df + t * t))))


def t_from_r(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return math.copysign(math.inf, r)
    return r * math.sqrt((n - 2) / (1.0 - r * r))


def t_and_p(feature, target, contrast: str = "regression") -> tuple[float, float]:
    """Signed t statistic and two-sided p value for one feature against the target.

    ``regression`` tests the slope of target on feature (equivalently the
    Pearson r) with n - 2 degrees of freedom.  ``high-vs-low`` runs Welch's
    two-sample test between the High (3) and Low (1) groups.
    """
    x = np.asarray(feature, dtype=float)
    y = np.asarray(target, dtype=float)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    if contrast == "regression":
        n = x.size
        if n < 3:
            raise ValueError("t_and_p needs at least three rows")
        r = pearson(x, y)
        t = t_from_r(r, n)
        return t, t_two_sided_p(t, n - 2)
    if contrast == "high-vs-low":
        return welch_t(x[y == 3], x[y == 1])
    raise ValueError(f"unknown contrast {contrast!r}")


def welch_t(a, b) -> tuple[float, float]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least two observations")
    va = float(a.var(ddof=1)) / a.size
    vb = float(b.var(ddof=1)) / b.size
    diff = float(a.mean() - b.mean())
    se2 = va + vb
    if se2 == 0.0:
        if diff == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0
    t = diff / math.sqrt(se2)
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return t, t_two_sided_p(t, df)


def rankdata(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size, dtype=float)
    sv = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    if x.size < 2:
        raise ValueError("spearman needs at least two points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        warnings.warn("spearman on a constant input is defined as 0", DegenerateColumnWarning,
                      stacklevel=2)
        return 0.0
    return pearson(rankdata(x), rankdata(y))


def rank_features(fm: FeatureMatrix, contrast: str = "regression") -> list[FeatureScore]:
    """Score every feature against the target, highest information gain first."""
    scores = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        for j, name in enumerate(fm.column_names):
            col = fm.X[:, j]
            t, p = t_and_p(col, fm.y, contrast)
            scores.append(FeatureScore(name, pearson(col, fm.y), information_gain(col, fm.y), t, p))
    return sorted(scores, key=lambda s: (-s.info_gain, s.name))


def spearman_pairs(joined, pairs: Sequence[tuple[str, str]]) -> list[dict]:
    """Spearman coefficients for named column pairs of a year-joined series."""
    out = []
    for a, b in pairs:
        rho = spearman(joined.columns[a], joined.columns[b])
        out.append({"x": a, "y": b, "rho": rho, "n": joined.n, "years": list(joined.years)})
    return out
