"""One-vs-rest linear soft-margin SVM trained by mini-batch subgradient descent."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np


@dataclass
class SvmModel:
    classes: list[int]
    W: np.ndarray
    b: np.ndarray
    params: dict = field(default_factory=dict)
    objective_history: list[list[float]] = field(default_factory=list)

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.W.T + self.b

    def predict(self, X) -> np.ndarray:
        # first maximum wins, i.e. the lowest class code on ties
        return np.array(self.classes)[np.argmax(self.decision_function(X), axis=1)]

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "W": self.W.tolist(),
            "b": self.b.tolist(),
            "params": dict(self.params),
            "objective_history": [list(h) for h in self.objective_history],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls([int(c) for c in d["classes"]], np.array(d["W"], dtype=float),
                   np.array(d["b"], dtype=float), dict(d.get("params", {})),
                   [list(h) for h in d.get("objective_history", [])])


def hinge_objective(w: np.ndarray, b: float, X: np.ndarray, t: np.ndarray, lam: float) -> float:
    """lam/2 ||w||^2 + mean hinge loss, i.e. (1/2||w||^2 + C sum hinge) / (C n)."""
    margins = 1.0 - t * (X @ w + b)
    return float(0.5 * lam * (w @ w) + np.maximum(margins, 0.0).mean())


def _fit_binary(X, t, lam, epochs, lr, batch_size, rng):
    n, p = X.shape
    w = np.zeros(p)
    b = 0.0
    best = hinge_objective(w, b, X, t, lam)
    history = [best]
    scale = 1.0
    for epoch in range(epochs):
        eta = scale * lr / (1.0 + epoch)
        cand_w, cand_b = w.copy(), b
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            B = perm[start:start + batch_size]
            xb, tb = X[B], t[B]
            active = tb * (xb @ cand_w + cand_b) < 1.0
            gw = lam * cand_w - (tb[active] @ xb[active]) / B.size
            gb = -tb[active].sum() / B.size
            cand_w -= eta * gw
            cand_b -= eta * gb
        obj = hinge_objective(cand_w, cand_b, X, t, lam)
        if obj <= best:
            w, b, best = cand_w, cand_b, obj
        else:
            # reject the epoch and shrink future steps
            scale *= 0.5
        history.append(best)
    return w, b, history


def fit_svm(
    X,
    y,
    C: float = 1.0,
    epochs: int = 100,
    lr: float = 0.1,
    batch_size: int = 16,
    seed: int = 0,
    n_jobs: int = 1,
) -> SvmModel:
    """Train one linear SVM per class against the rest.

    Each epoch visits the rows in a fresh seeded order with step
    ``lr / (1 + epoch)``.  An epoch whose end point raises the regularized
    hinge objective is discarded and later steps are halved, so the
    objective recorded at epoch boundaries never increases.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be 2-D with one row per label")
    classes = sorted(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise ValueError("SVM needs at least two classes")
    if C <= 0 or epochs < 1 or batch_size < 1:
        raise ValueError("C, epochs and batch_size must be positive")
    lam = 1.0 / (C * X.shape[0])

    def train(i: int):
        t = np.where(y == classes[i], 1.0, -1.0)
        return _fit_binary(X, t, lam, epochs, lr, batch_size, np.random.default_rng([seed, i]))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(train, range(len(classes))))
    else:
        parts = [train(i) for i in range(len(classes))]
    W = np.array([p[0] for p in parts])
    b = np.array([p[1] for p in parts])
    params = {"C": C, "epochs": epochs, "lr": lr, "batch_size": batch_size, "seed": seed}
    return SvmModel(classes, W, b, params, [p[2] for p in parts])
