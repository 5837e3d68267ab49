"""Random forest: bootstrapped CART trees with per-node feature sampling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tree import TreeModel, fit_tree


@dataclass
class ForestModel:
    trees: list[TreeModel]
    classes: list[int]
    feature_names: list[str]
    n_trees: int
    max_features: int
    bootstrap: bool
    seed: int

    def tree_seed(self, index: int) -> list[int]:
        return [self.seed, index]

    def votes(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        counts = np.zeros((X.shape[0] if X.ndim == 2 else 1, len(self.classes)), dtype=int)
        pos = {c: i for i, c in enumerate(self.classes)}
        for tree in self.trees:
            pred = tree.predict(X)
            for c, i in pos.items():
                counts[:, i] += pred == c
        return counts

    def predict(self, X) -> np.ndarray:
        # argmax takes the first maximum: ties go to the lowest class code
        return np.array(self.classes)[np.argmax(self.votes(X), axis=1)]

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "tree_seeds": [self.tree_seed(i) for i in range(self.n_trees)],
            "classes": list(self.classes),
            "feature_names": list(self.feature_names),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            trees=[TreeModel.from_dict(t) for t in d["trees"]],
            classes=[int(c) for c in d["classes"]],
            feature_names=list(d["feature_names"]),
            n_trees=int(d["n_trees"]),
            max_features=int(d["max_features"]),
            bootstrap=bool(d["bootstrap"]),
            seed=int(d["seed"]),
        )


def resolve_max_features(rule, d: int) -> int:
    if rule is None or rule == "all":
        return d
    if rule == "sqrt":
        return max(1, math.isqrt(d))
    if rule == "log2":
        return max(1, int(math.log2(d)))
    m = int(rule)
    if not 1 <= m <= d:
        raise ValueError(f"max_features must be in [1, {d}], got {m}")
    return m


def fit_forest(
    X,
    y,
    feature_names: Sequence[str] | None = None,
    n_trees: int = 100,
    max_features="sqrt",
    bootstrap: bool = True,
    seed: int = 0,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    n_jobs: int = 1,
) -> ForestModel:
    """Train ``n_trees`` trees, tree ``i`` drawing from ``default_rng([seed, i])``.

    Each tree owns its PCG64 stream, so ``n_jobs > 1`` yields exactly the
    same forest as serial training.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    n, d = X.shape
    m = resolve_max_features(max_features, d)
    classes = sorted(int(c) for c in np.unique(y))
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(d)]

    def grow(i: int) -> TreeModel:
        rng = np.random.default_rng([seed, i])
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        return fit_tree(X[idx], y[idx], names, max_depth=max_depth,
                        min_samples_split=min_samples_split,
                        max_features=m, rng=rng, classes=classes)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(grow, range(n_trees)))
    else:
        trees = [grow(i) for i in range(n_trees)]
    return ForestModel(trees, classes, names, n_trees, m, bootstrap, seed)
