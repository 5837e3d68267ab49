"""Pipeline configuration: one JSON file, overridable per flag."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class ModelParams:
    max_depth: int | None = None
    min_samples_split: int = 2
    n_trees: int = 100
    max_features: str | int = "sqrt"
    bootstrap: bool = True
    svm_c: float = 1.0
    svm_epochs: int = 100
    svm_lr: float = 0.1
    svm_batch_size: int = 16
    kmeans_k: int = 3
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    kmeans_space: str = "standardized"


@dataclass
class PipelineConfig:
    patients: str | None = None
    incidence: str | None = None
    forest: str | None = None
    tree_cover_loss: str | None = None
    iso: str = "VNM"
    out: str = "lungrisk-out"
    seed: int | None = None
    ratio: float = 0.7
    impute: str = "median"
    stratified: bool = False
    pca_on_all: bool = False
    interpolate_years: bool = False
    contrast: str = "regression"
    n_jobs: int = 1
    model: ModelParams = field(default_factory=ModelParams)

    INPUTS = ("patients", "incidence", "forest", "tree_cover_loss")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        model = ModelParams(**d.pop("model", {}))
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(model=model, **d)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def override(self, values: dict) -> "PipelineConfig":
        """Apply non-None values; keys matching ModelParams fields go to ``model``."""
        model_keys = {f.name for f in fields(ModelParams)}
        top_keys = {f.name for f in fields(PipelineConfig)} - {"model"}
        for k, v in values.items():
            if v is None:
                continue
            if k in model_keys:
                setattr(self.model, k, v)
            elif k in top_keys:
                setattr(self, k, v)
        return self

    def validate(self) -> None:
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must be in (0, 1)")
        if self.impute not in ("median", "mode", "drop_row"):
            raise ValueError(f"unknown imputation strategy {self.impute!r}")
        if self.contrast not in ("regression", "high-vs-low"):
            raise ValueError(f"unknown contrast {self.contrast!r}")
        if self.model.kmeans_space not in ("standardized", "pca"):
            raise ValueError(f"unknown kmeans space {self.model.kmeans_space!r}")

    def to_dict(self) -> dict:
        return asdict(self)
