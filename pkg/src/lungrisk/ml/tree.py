"""CART classification tree with Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

# Relative slack when comparing split scores, so that mathematically equal
# candidates resolve by the index/threshold tie-break instead of rounding noise.
_TIE = 1e-12


@dataclass
class Node:
    n_samples: int
    histogram: list[int]
    gini: float
    prediction: int
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self, names: Sequence[str]) -> dict:
        d = {
            "n_samples": self.n_samples,
            "histogram": list(self.histogram),
            "gini": self.gini,
            "prediction": self.prediction,
        }
        if not self.is_leaf:
            d["feature"] = self.feature
            d["feature_name"] = names[self.feature]
            d["threshold"] = self.threshold
            d["left"] = self.left.to_dict(names)
            d["right"] = self.right.to_dict(names)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        node = cls(d["n_samples"], list(d["histogram"]), float(d["gini"]), int(d["prediction"]))
        if "feature" in d:
            node.feature = int(d["feature"])
            node.threshold = float(d["threshold"])
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


@dataclass
class TreeModel:
    feature_names: list[str]
    classes: list[int]
    root: Node
    params: dict = field(default_factory=dict)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise ValueError(f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        return np.array([_descend(self.root, row) for row in X], dtype=int)

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend((node.right, node.left))

    def depth(self) -> int:
        def walk(node: Node) -> int:
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "classes": list(self.classes),
            "params": dict(self.params),
            "root": self.root.to_dict(self.feature_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        return cls(list(d["feature_names"]), [int(c) for c in d["classes"]],
                   Node.from_dict(d["root"]), dict(d.get("params", {})))


def _descend(node: Node, row: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.prediction


def predict_tree(model: TreeModel, row: Mapping[str, float] | Sequence[float]) -> int:
    """Classify one row given as a sequence or a name -> value mapping."""
    if isinstance(row, Mapping):
        missing = [f for f in model.feature_names if f not in row or row[f] is None]
        if missing:
            raise ValueError(f"row is missing features {missing}")
        values = np.array([float(row[f]) for f in model.feature_names])
    else:
        values = np.asarray(row, dtype=float)
        if values.shape != (len(model.feature_names),) or np.isnan(values).any():
            raise ValueError("row is missing feature values")
    return _descend(model.root, values)


def gini(histogram) -> float:
    h = np.asarray(histogram, dtype=float)
    n = h.sum()
    if n == 0:
        return 0.0
    p = h / n
    return float(1.0 - p @ p)


def _best_split(X: np.ndarray, Y: np.ndarray, features: Sequence[int]):
    """Best (score, feature, threshold) over ``features``; higher score is better.

    score = sum_c L_c^2 / n_L + sum_c R_c^2 / n_R, which is n * (1 - weighted child gini).
    """
    n = X.shape[0]
    total = Y.sum(axis=0)
    best = None
    for j in sorted(int(f) for f in features):
        col = X[:, j]
        order = np.argsort(col, kind="mergesort")
        xs = col[order]
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if valid.size == 0:
            continue
        left = np.cumsum(Y[order], axis=0)[valid]
        n_left = (valid + 1).astype(float)
        right = total - left
        score = (left * left).sum(axis=1) / n_left + (right * right).sum(axis=1) / (n - n_left)
        top = score.max()
        k = int(np.flatnonzero(score >= top - _TIE * abs(top))[0])
        if best is None or score[k] > best[0] + _TIE * abs(best[0]):
            i = valid[k]
            best = (float(score[k]), j, float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow(X, Y, classes, depth, params, rng) -> Node:
    hist = Y.sum(axis=0).astype(int)
    n = X.shape[0]
    node = Node(n, hist.tolist(), gini(hist), classes[int(np.argmax(hist))])
    max_depth = params.get("max_depth")
    if (
        node.gini == 0.0
        or n < params.get("min_samples_split", 2)
        or (max_depth is not None and depth >= max_depth)
    ):
        return node

    d = X.shape[1]
    m = params.get("max_features")
    if rng is None or m is None or m >= d:
        found = _best_split(X, Y, range(d))
    else:
        perm = rng.permutation(d)
        found = _best_split(X, Y, perm[:m])
        if found is None:
            # every sampled feature is constant here; fall back to the rest
            found = _best_split(X, Y, perm[m:])
    if found is None:
        return node

    _, j, thr = found
    mask = X[:, j] <= thr
    node.feature = j
    node.threshold = thr
    node.left = _grow(X[mask], Y[mask], classes, depth + 1, params, rng)
    node.right = _grow(X[~mask], Y[~mask], classes, depth + 1, params, rng)
    return node


def fit_tree(
    X,
    y,
    feature_names: Sequence[str] | None = None,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    classes: Sequence[int] | None = None,
) -> TreeModel:
    """Grow a CART tree.

    Splits minimize weighted child Gini over midpoints of adjacent distinct
    values.  Ties go to the lowest feature index, then the lowest threshold.
    ``max_features`` and ``rng`` enable the per-node feature sampling used by
    random forests.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data must be a non-empty 2-D array")
    if X.shape[0] != y.size:
        raise ValueError("X and y have different row counts")
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(X.shape[1])]
    cls = sorted(int(c) for c in (classes if classes is not None else np.unique(y)))
    Y = (y[:, None] == np.array(cls)[None, :]).astype(float)
    params = {"max_depth": max_depth, "min_samples_split": min_samples_split,
              "max_features": max_features}
    root = _grow(X, Y, cls, 0, params, rng)
    return TreeModel(names, cls, root, params)
