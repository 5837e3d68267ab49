"""Versioned JSON documents for fitted models."""

from __future__ import annotations

import json

from .forest import ForestModel
from .kmeans import KMeansModel
from .pca import PcaModel
from .svm import SvmModel
from .tree import TreeModel

FORMAT = "lungrisk-model"
VERSION = 1

_KINDS = {
    "tree": TreeModel,
    "forest": ForestModel,
    "pca": PcaModel,
    "svm": SvmModel,
    "kmeans": KMeansModel,
}


def _kind_of(model) -> str:
    for kind, cls in _KINDS.items():
        if isinstance(model, cls):
            return kind
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_to_dict(model, **extra) -> dict:
    doc = {"format": FORMAT, "version": VERSION, "kind": _kind_of(model), "model": model.to_dict()}
    # e.g. the PCA that feeds an SVM travels with it
    for key, value in extra.items():
        doc[key] = model_to_dict(value) if type(value) in _KINDS.values() else value
    return doc


def dumps(model, **extra) -> str:
    return json.dumps(model_to_dict(model, **extra), sort_keys=True, separators=(",", ":")) + "\n"


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT:
        raise ValueError("not a lungrisk model document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    return _KINDS[doc["kind"]].from_dict(doc["model"])


def loads(text: str):
    return model_from_dict(json.loads(text))
