"""Parsers for the four input CSV layouts.

The patient file is header driven: besides ``Patient Id``, ``Age``,
``Gender`` and ``Level``, every named column is taken to be an ordinal
risk score.  Environmental files (yearly incidence, forest status, tree
cover loss) are matched on a small set of header aliases.

Cells that cannot be parsed are not fatal for the patient table; they are
left as ``None`` and filled later by :func:`impute_missing`.
"""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

LEVELS = ("Low", "Medium", "High")

#: Ordinal columns of the canonical patient file, in file order.
FEATURE_COLUMNS = (
    "Air Pollution",
    "Alcohol use",
    "Dust Allergy",
    "Occupational Hazards",
    "Genetic Risk",
    "chronic Lung Disease",
    "Balanced Diet",
    "Obesity",
    "Smoking",
    "Passive Smoker",
    "Chest Pain",
    "Coughing of Blood",
    "Fatigue",
    "Weight Loss",
    "Shortness of Breath",
    "Wheezing",
    "Swallowing Difficulty",
    "Clubbing of Finger Nails",
    "Frequent Cold",
    "Dry Cough",
    "Snoring",
)

Source = Union[str, os.PathLike, bytes, IO[str], IO[bytes]]

# Leftover pandas index columns; dropped on load.
_INDEX_HEADERS = {"", "index", "unnamed: 0"}


class IngestError(ValueError):
    """Base class for input problems that stop a load."""


class SchemaError(IngestError):
    pass


class ParseError(IngestError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyTableError(IngestError):
    pass


@dataclass
class FileReport:
    name: str
    rows: int = 0
    imputations: int = 0
    dropped_rows: int = 0
    dropped_columns: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": self.rows,
            "imputations": self.imputations,
            "dropped_rows": self.dropped_rows,
            "dropped_columns": list(self.dropped_columns),
            "warnings": list(self.warnings),
        }


@dataclass
class LoadReport:
    files: list[FileReport] = field(default_factory=list)

    def add(self, report: FileReport) -> FileReport:
        self.files.append(report)
        return report

    def to_dict(self) -> dict:
        return {"tables": [f.to_dict() for f in self.files]}


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    age: int | None
    gender: int | None
    features: dict[str, int | None]
    level: str

    def missing_columns(self) -> list[str]:
        out = []
        if self.age is None:
            out.append("Age")
        if self.gender is None:
            out.append("Gender")
        out.extend(k for k, v in self.features.items() if v is None)
        return out


@dataclass
class PatientTable:
    column_names: list[str]
    rows: list[PatientRecord]
    report: FileReport = field(default_factory=lambda: FileReport("patients"))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def feature_names(self) -> list[str]:
        return [c for c in self.column_names if _norm(c) not in ("patient id", "level")]

    def missing_count(self) -> int:
        return sum(len(r.missing_columns()) for r in self.rows)

    def level_counts(self) -> dict[str, int]:
        counts = {lv: 0 for lv in LEVELS}
        for r in self.rows:
            counts[r.level] += 1
        return counts

    def column(self, name: str) -> list[int | None]:
        key = _norm(name)
        if key == "age":
            return [r.age for r in self.rows]
        if key == "gender":
            return [r.gender for r in self.rows]
        for col in self.rows[0].features if self.rows else ():
            if _norm(col) == key:
                return [r.features[col] for r in self.rows]
        raise KeyError(name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatientTable):
            return NotImplemented
        return self.column_names == other.column_names and self.rows == other.rows


@dataclass(frozen=True)
class YearlyIncidence:
    year: int
    cases: int
    total: int
    rate: float


@dataclass(frozen=True)
class ForestStatus:
    year: int
    total_kha: float
    natural_kha: float
    planted_kha: float


@dataclass(frozen=True)
class TreeCoverLoss:
    iso: str
    year: int
    loss_ha: float
    co2e_mg: float


def _norm(header: str) -> str:
    h = " ".join(header.strip().lower().split())
    return re.sub(r"_+", "_", h)


_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


def clean_numeric(token: str, row: int | None = None, column: str | None = None) -> int | float:
    """Parse a numeric cell, dropping comma thousands separators.

    Integer-looking tokens come back as ``int``; anything with a decimal
    point or exponent comes back as ``float``.

    >>> clean_numeric("23,667")
    23667
    >>> clean_numeric("11,784.59")
    11784.59
    """
    text = token.strip() if token is not None else ""
    if not text:
        raise ParseError("empty numeric cell", row, column)
    text = text.replace(",", "")
    if not _NUMBER.fullmatch(text):
        raise ParseError(f"not a number: {token!r}", row, column)
    if any(c in text for c in ".eE"):
        return float(text)
    return int(text)


def format_numeric(value: int | float) -> str:
    """Inverse of :func:`clean_numeric` that uses thousands separators."""
    return f"{value:,}"


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, (str, os.PathLike)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    elif data.startswith("﻿"):
        data = data[1:]
    return data


def _records(source: Source) -> tuple[list[str], list[tuple[int, list[str]]]]:
    reader = csv.reader(io.StringIO(_read_text(source)))
    header: list[str] | None = None
    body = []
    for line_no, rec in enumerate(reader, start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        if header is None:
            header = rec
            continue
        body.append((line_no, rec))
    if header is None:
        raise SchemaError("missing header row")
    return header, body


def _locate(header: Sequence[str], aliases: Iterable[str]) -> int | None:
    wanted = {_norm(a) for a in aliases}
    for i, h in enumerate(header):
        if _norm(h) in wanted:
            return i
    return None


def _require(header: Sequence[str], name: str, aliases: Iterable[str], file: str) -> int:
    idx = _locate(header, aliases)
    if idx is None:
        raise SchemaError(f"{file}: required column {name!r} not found in header {list(header)}")
    return idx


def _cell(rec: list[str], idx: int) -> str:
    return rec[idx] if idx < len(rec) else ""


def _ordinal(token: str, minimum: int = 1) -> int | None:
    try:
        value = clean_numeric(token)
    except ParseError:
        return None
    if isinstance(value, float):
        if not value.is_integer():
            return None
        value = int(value)
    return value if value >= minimum else None


def parse_level(label: str, row: int | None = None) -> str:
    key = label.strip().lower()
    for lv in LEVELS:
        if lv.lower() == key:
            return lv
    raise ParseError(f"unknown level {label!r}; expected one of {LEVELS}", row, "Level")


def parse_patient_csv(source: Source, name: str = "patients") -> PatientTable:
    """Parse the patient-level file into a :class:`PatientTable`.

    Unparseable or out-of-domain ordinal cells (including age and gender)
    are stored as ``None`` and counted as missing.
    """
    header, body = _records(source)
    report = FileReport(name)
    level_i = _require(header, "Level", ["level"], name)
    pid_i = _require(header, "Patient Id", ["patient id", "patient_id", "patientid"], name)
    age_i = _require(header, "Age", ["age"], name)
    gender_i = _require(header, "Gender", ["gender"], name)
    fixed = {level_i, pid_i, age_i, gender_i}

    feature_idx: list[int] = []
    for i, h in enumerate(header):
        if i in fixed:
            continue
        if _norm(h) in _INDEX_HEADERS:
            report.dropped_columns.append(h)
            continue
        feature_idx.append(i)
    features = [header[i].strip() for i in feature_idx]
    if len({_norm(f) for f in features}) != len(features):
        raise SchemaError(f"{name}: duplicate feature columns in header")

    rows = []
    for line_no, rec in body:
        level = parse_level(_cell(rec, level_i), line_no)
        rows.append(
            PatientRecord(
                patient_id=_cell(rec, pid_i).strip(),
                age=_ordinal(_cell(rec, age_i)),
                gender=_ordinal(_cell(rec, gender_i)),
                features={f: _ordinal(_cell(rec, i)) for f, i in zip(features, feature_idx)},
                level=level,
            )
        )
    if not rows:
        raise EmptyTableError(f"{name}: no data rows")
    column_names = ["Patient Id", "Age", "Gender", *features, "Level"]
    table = PatientTable(column_names, rows, report)
    report.rows = table.n
    missing = table.missing_count()
    if missing:
        report.warnings.append(f"{missing} missing or unparseable cells queued for imputation")
    return table


def patient_table_to_csv(table: PatientTable) -> str:
    """Canonical CSV form; missing cells are written empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.column_names)
    feats = table.column_names[3:-1]

    def fmt(v: int | None) -> str:
        return "" if v is None else str(v)

    for r in table.rows:
        w.writerow([r.patient_id, fmt(r.age), fmt(r.gender), *(fmt(r.features[f]) for f in feats), r.level])
    return buf.getvalue()


def _median_half_up(values: list[int]) -> int:
    s = sorted(values)
    m = len(s)
    mid = s[m // 2] if m % 2 else (s[m // 2 - 1] + s[m // 2]) / 2
    # floor(x + 0.5), not round(): Python rounds half to even
    return int(mid + 0.5) if mid >= 0 else -int(-mid + 0.5)


def _mode(values: list[int]) -> int:
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def impute_missing(table: PatientTable, strategy: str = "median") -> PatientTable:
    """Fill missing ordinal cells by column median/mode, or drop defective rows.

    The median is rounded half up so imputed cells stay on the integer
    scale: median 2.5 becomes 3.
    """
    if strategy not in ("median", "mode", "drop_row"):
        raise ValueError(f"unknown imputation strategy {strategy!r}")
    report = replace(table.report, warnings=list(table.report.warnings),
                     dropped_columns=list(table.report.dropped_columns))
    missing = table.missing_count()
    if missing == 0:
        return PatientTable(list(table.column_names), list(table.rows), report)

    if strategy == "drop_row":
        kept = [r for r in table.rows if not r.missing_columns()]
        if not kept:
            raise EmptyTableError(f"{report.name}: every row has a missing cell")
        report.dropped_rows += table.n - len(kept)
        report.rows = len(kept)
        return PatientTable(list(table.column_names), kept, report)

    stat = _median_half_up if strategy == "median" else _mode
    fills: dict[str, int] = {}
    for col in table.feature_names:
        values = table.column(col)
        if any(v is None for v in values):
            observed = [v for v in values if v is not None]
            if not observed:
                raise IngestError(f"{report.name}: column {col!r} is entirely missing")
            fills[_norm(col)] = stat(observed)

    rows = []
    for r in table.rows:
        if not r.missing_columns():
            rows.append(r)
            continue
        rows.append(
            PatientRecord(
                patient_id=r.patient_id,
                age=r.age if r.age is not None else fills["age"],
                gender=r.gender if r.gender is not None else fills["gender"],
                features={k: v if v is not None else fills[_norm(k)] for k, v in r.features.items()},
                level=r.level,
            )
        )
    report.imputations += missing
    return PatientTable(list(table.column_names), rows, report)


def parse_yearly_incidence(source: Source, report: FileReport | None = None) -> list[YearlyIncidence]:
    """Parse yearly lung-cancer incidence (year, cases, all-cancer total, rate)."""
    report = report if report is not None else FileReport("incidence")
    header, body = _records(source)
    yi = _require(header, "Year", ["year"], report.name)
    ci = _require(header, "Number", ["number", "cases"], report.name)
    ti = _require(header, "Total", ["total"], report.name)
    ri = _locate(header, ["rate"])
    out = []
    for line_no, rec in body:
        year = _year(_cell(rec, yi), line_no, header[yi])
        cases = _count(_cell(rec, ci), line_no, header[ci])
        total = _count(_cell(rec, ti), line_no, header[ti])
        if cases > total:
            raise ParseError(f"cases {cases} exceed total {total}", line_no)
        expected = cases / total if total else 0.0
        rate = expected
        if ri is not None and _cell(rec, ri).strip():
            given = float(clean_numeric(_cell(rec, ri), line_no, header[ri]))
            if abs(given - expected) > 1e-4:
                report.warnings.append(
                    f"row {line_no}: rate {given} disagrees with cases/total {expected:.6f}; replaced"
                )
            else:
                rate = given
        out.append(YearlyIncidence(year, cases, total, rate))
    report.rows = len(out)
    return out


def parse_forest_status(source: Source, report: FileReport | None = None) -> list[ForestStatus]:
    """Parse forest area by year, in thousands of hectares."""
    report = report if report is not None else FileReport("forest")
    header, body = _records(source)
    yi = _require(header, "Year", ["year"], report.name)
    ti = _require(header, "Total area of forested land",
                  ["total area of forested land", "total", "total_kha"], report.name)
    ni = _require(header, "Natural forest", ["natural forest", "natural", "natural_kha"], report.name)
    pi = _require(header, "Planted forest", ["planted forest", "planted", "planted_kha"], report.name)
    out = []
    for line_no, rec in body:
        year = _year(_cell(rec, yi), line_no, header[yi])
        vals = []
        for i in (ti, ni, pi):
            v = float(clean_numeric(_cell(rec, i), line_no, header[i]))
            if v < 0:
                raise ParseError(f"negative area {v}", line_no, header[i])
            vals.append(v)
        total, natural, planted = vals
        if abs(total - (natural + planted)) > 0.5:
            report.warnings.append(
                f"row {line_no}: total {total} != natural {natural} + planted {planted}"
            )
        out.append(ForestStatus(year, total, natural, planted))
    report.rows = len(out)
    return out


def parse_tree_cover_loss(source: Source, iso: str = "VNM",
                          report: FileReport | None = None) -> list[TreeCoverLoss]:
    """Parse annual tree cover loss and gross CO2e emissions for one country."""
    report = report if report is not None else FileReport("tree_cover_loss")
    header, body = _records(source)
    ii = _require(header, "iso", ["iso"], report.name)
    yi = _require(header, "umd_tree_cover_loss__year", ["umd_tree_cover_loss_year", "year"], report.name)
    li = _require(header, "umd_tree_cover_loss__ha", ["umd_tree_cover_loss_ha", "loss_ha"], report.name)
    ei = _require(header, "gfw_gross_emissions_co2e_all_gases__Mg",
                  ["gfw_gross_emissions_co2e_all_gases_mg", "co2e_mg"], report.name)
    out = []
    for line_no, rec in body:
        if _cell(rec, ii).strip().upper() != iso.upper():
            continue
        loss = float(clean_numeric(_cell(rec, li), line_no, header[li]))
        co2 = float(clean_numeric(_cell(rec, ei), line_no, header[ei]))
        if loss < 0 or co2 < 0:
            raise ParseError("negative loss or emissions", line_no)
        out.append(TreeCoverLoss(iso.upper(), _year(_cell(rec, yi), line_no, header[yi]), loss, co2))
    years = [r.year for r in out]
    dupes = sorted({y for y in years if years.count(y) > 1})
    if dupes:
        raise ParseError(f"duplicate years for {iso}: {dupes}")
    out.sort(key=lambda r: r.year)
    report.rows = len(out)
    return out


def _year(token: str, row: int, column: str) -> int:
    value = clean_numeric(token, row, column)
    if isinstance(value, float):
        if not value.is_integer():
            raise ParseError(f"fractional year {token!r}", row, column)
        value = int(value)
    if not 1900 <= value <= 2100:
        raise ParseError(f"year {value} out of range", row, column)
    return value


def _count(token: str, row: int, column: str) -> int:
    value = clean_numeric(token, row, column)
    if isinstance(value, float):
        if not value.is_integer():
            raise ParseError(f"count {token!r} is not an integer", row, column)
        value = int(value)
    if value < 0:
        raise ParseError(f"negative count {value}", row, column)
    return value


def incidence_to_csv(rows: Sequence[YearlyIncidence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Year", "Number", "Total", "Rate"])
    for r in rows:
        w.writerow([r.year, r.cases, r.total, repr(r.rate)])
    return buf.getvalue()


def forest_to_csv(rows: Sequence[ForestStatus]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Year", "Total area of forested land", "Natural forest", "Planted forest"])
    for r in rows:
        w.writerow([r.year, repr(r.total_kha), repr(r.natural_kha), repr(r.planted_kha)])
    return buf.getvalue()


def tree_cover_loss_to_csv(rows: Sequence[TreeCoverLoss]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iso", "umd_tree_cover_loss__year", "umd_tree_cover_loss__ha",
                "gfw_gross_emissions_co2e_all_gases__Mg"])
    for r in rows:
        w.writerow([r.iso, r.year, repr(r.loss_ha), repr(r.co2e_mg)])
    return buf.getvalue()
