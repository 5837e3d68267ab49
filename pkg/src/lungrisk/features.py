"""Target encoding, z-score standardization and year-aligned environment series."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .ingest import LEVELS, ForestStatus, PatientTable, TreeCoverLoss, YearlyIncidence

LEVEL_CODES = {lv: i + 1 for i, lv in enumerate(LEVELS)}


class DegenerateColumnWarning(UserWarning):
    """A column is constant, so its standard deviation is zero."""


class EmptyJoinError(ValueError):
    pass


def encode_level(label: str, row: int | None = None) -> int:
    key = str(label).strip().lower()
    for name, code in LEVEL_CODES.items():
        if name.lower() == key:
            return code
    where = f" at row {row}" if row is not None else ""
    raise ValueError(f"unknown level {label!r}{where}; expected one of {LEVELS}")


def decode_level(code: int) -> str:
    c = int(code)
    if not 1 <= c <= len(LEVELS):
        raise ValueError(f"unknown level code {code!r}")
    return LEVELS[c - 1]


@dataclass(frozen=True)
class FeatureMatrix:
    column_names: list[str]
    X: np.ndarray
    y: np.ndarray
    standardized: bool = False
    means: np.ndarray | None = None
    stds: np.ndarray | None = None

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != len(self.column_names):
            raise ValueError("X shape does not match column_names")
        if len(self.y) != self.X.shape[0]:
            raise ValueError("X and y have different row counts")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("feature matrix contains NaN or Inf")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.column_names.index(name)]

    def subset(self, rows: Sequence[int]) -> "FeatureMatrix":
        idx = np.asarray(rows, dtype=int)
        return FeatureMatrix(list(self.column_names), self.X[idx], self.y[idx],
                             self.standardized, self.means, self.stds)

    def standardize(self) -> "FeatureMatrix":
        Z, means, stds = standardize(self.X)
        return FeatureMatrix(list(self.column_names), Z, self.y, True, means, stds)


def feature_matrix(table: PatientTable) -> FeatureMatrix:
    """Raw (unstandardized) design matrix: Age, Gender and every ordinal column."""
    names = table.feature_names
    if table.missing_count():
        raise ValueError("table has missing cells; run impute_missing first")
    cols = [table.column(c) for c in names]
    X = np.array(cols, dtype=float).T.reshape(table.n, len(names))
    y = np.array([encode_level(r.level, i + 2) for i, r in enumerate(table.rows)], dtype=int)
    return FeatureMatrix(names, X, y)


def standardize(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column-wise z-scores with the sample (n - 1) standard deviation.

    Constant columns get std 1 so their z-scores are all zero.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise ValueError("standardize needs at least two rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0, ddof=1)
    flat = ~(stds > 0)
    if flat.any():
        warnings.warn(f"constant columns {np.flatnonzero(flat).tolist()} left at z = 0",
                      DegenerateColumnWarning, stacklevel=2)
        stds = np.where(flat, 1.0, stds)
    return apply_standardization(X, means, stds), means, stds


def apply_standardization(X, means, stds) -> np.ndarray:
    return (np.asarray(X, dtype=float) - means) / stds


@dataclass(frozen=True)
class YearJoinedSeries:
    years: list[int]
    columns: dict[str, list[float]]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.years, self.years[1:])):
            raise ValueError("years must be strictly increasing")
        for name, col in self.columns.items():
            if len(col) != len(self.years):
                raise ValueError(f"series {name!r} not aligned to years")

    @property
    def n(self) -> int:
        return len(self.years)

    def to_rows(self) -> list[list]:
        names = list(self.columns)
        return [["year", *names]] + [
            [y, *(self.columns[c][i] for c in names)] for i, y in enumerate(self.years)
        ]


def _interp(series: Mapping[int, float], year: int) -> float:
    if year in series:
        return float(series[year])
    ys = sorted(series)
    lo = max(y for y in ys if y < year)
    hi = min(y for y in ys if y > year)
    w = (year - lo) / (hi - lo)
    return float(series[lo]) * (1 - w) + float(series[hi]) * w


def join_by_year(series: Mapping[str, Mapping[int, float]], interpolate: bool = False) -> YearJoinedSeries:
    """Align named yearly series.

    By default only years present in every series survive.  With
    ``interpolate=True`` the union of years inside the common span is kept
    and gaps are filled by linear interpolation.
    """
    if len(series) < 2:
        raise ValueError("join_by_year needs at least two series")
    year_sets = [set(s) for s in series.values()]
    if interpolate:
        lo = max(min(s) for s in year_sets if s) if all(year_sets) else 1
        hi = min(max(s) for s in year_sets if s) if all(year_sets) else 0
        years = sorted(y for y in set().union(*year_sets) if lo <= y <= hi)
    else:
        years = sorted(set.intersection(*year_sets))
    if not years:
        raise EmptyJoinError(
            "no common years across series"
            + ("" if interpolate else "; consider --interpolate-years")
        )
    cols = {name: [_interp(s, y) if interpolate else float(s[y]) for y in years]
            for name, s in series.items()}
    return YearJoinedSeries(years, cols)


def environment_series(
    incidence: Sequence[YearlyIncidence] = (),
    forest: Sequence[ForestStatus] = (),
    loss: Sequence[TreeCoverLoss] = (),
) -> dict[str, dict[int, float]]:
    """Flatten the environment tables into year-keyed named series."""
    out: dict[str, dict[int, float]] = {}
    if incidence:
        out["cases"] = {r.year: r.cases for r in incidence}
        out["rate"] = {r.year: r.rate for r in incidence}
    if forest:
        out["total_kha"] = {r.year: r.total_kha for r in forest}
        out["natural_kha"] = {r.year: r.natural_kha for r in forest}
        out["planted_kha"] = {r.year: r.planted_kha for r in forest}
    if loss:
        out["loss_ha"] = {r.year: r.loss_ha for r in loss}
        out["co2e_mg"] = {r.year: r.co2e_mg for r in loss}
    return out
