"""Confusion matrices and precision / recall / F1."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ingest import LEVELS


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted, in ``class_labels`` order."""

    class_labels: list[str]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["actual\\predicted", *self.class_labels])
        for lab, row in zip(self.class_labels, self.counts):
            w.writerow([lab, *(int(v) for v in row)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"class_labels": list(self.class_labels), "counts": self.counts.astype(int).tolist()}


@dataclass(frozen=True)
class MetricsReport:
    precision: dict[str, float]
    recall: dict[str, float]
    f1: dict[str, float]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    evaluated_on: str
    support: dict[str, int]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "evaluated_on": self.evaluated_on,
            "accuracy": self.accuracy,
            "precision": dict(self.precision),
            "recall": dict(self.recall),
            "f1": dict(self.f1),
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall,
                      "f1": self.macro_f1},
            "support": dict(self.support),
            "warnings": list(self.warnings),
        }


def _label(value, labels: Sequence[str]) -> str:
    if isinstance(value, str):
        for lab in labels:
            if lab.lower() == value.strip().lower():
                return lab
    else:
        # integer class codes 1..c index the label list
        code = int(value)
        if code == value and 1 <= code <= len(labels):
            return labels[code - 1]
    raise ValueError(f"unknown class label {value!r}; expected one of {list(labels)}")


def confusion(actual, predicted, labels: Sequence[str] = LEVELS) -> ConfusionMatrix:
    """Count (actual, predicted) pairs; labels may be names or 1-based codes."""
    actual = list(actual)
    predicted = list(predicted)
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted differ in length")
    if not actual:
        raise ValueError("nothing to evaluate")
    labels = list(labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=int)
    for a, p in zip(actual, predicted):
        counts[pos[_label(a, labels)], pos[_label(p, labels)]] += 1
    return ConfusionMatrix(labels, counts)


def metrics(cm: ConfusionMatrix, evaluated_on: str = "test split") -> MetricsReport:
    """Per-class and macro precision/recall/F1; a zero denominator yields 0 and a warning."""
    c = cm.counts.astype(float)
    tp = np.diag(c)
    pred_tot = c.sum(axis=0)
    act_tot = c.sum(axis=1)
    warn = []
    prec, rec, f1 = {}, {}, {}
    for i, lab in enumerate(cm.class_labels):
        if pred_tot[i] == 0:
            warn.append(f"precision of {lab} undefined (never predicted); set to 0")
            prec[lab] = 0.0
        else:
            prec[lab] = float(tp[i] / pred_tot[i])
        if act_tot[i] == 0:
            warn.append(f"recall of {lab} undefined (no actual samples); set to 0")
            rec[lab] = 0.0
        else:
            rec[lab] = float(tp[i] / act_tot[i])
        s = prec[lab] + rec[lab]
        f1[lab] = 2 * prec[lab] * rec[lab] / s if s > 0 else 0.0
    k = len(cm.class_labels)
    return MetricsReport(
        precision=prec,
        recall=rec,
        f1=f1,
        macro_precision=sum(prec.values()) / k,
        macro_recall=sum(rec.values()) / k,
        macro_f1=sum(f1.values()) / k,
        accuracy=float(tp.sum() / c.sum()) if c.sum() else 0.0,
        evaluated_on=evaluated_on,
        support={lab: int(v) for lab, v in zip(cm.class_labels, act_tot)},
        warnings=warn,
    )
