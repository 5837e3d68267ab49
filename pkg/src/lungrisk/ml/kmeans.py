"""K-means (k-means++ seeding, Lloyd iterations) and cluster-to-class mapping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class KMeansModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)
    n_iter: int = 0
    seed: int | None = None

    def predict(self, X) -> np.ndarray:
        return _assign(np.asarray(X, dtype=float), self.centroids)[0]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "centroids": self.centroids.tolist(),
            "assignments": self.assignments.tolist(),
            "inertia": self.inertia,
            "inertia_history": list(self.inertia_history),
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KMeansModel":
        return cls(int(d["k"]), np.array(d["centroids"], dtype=float),
                   np.array(d["assignments"], dtype=int), float(d["inertia"]),
                   [float(v) for v in d.get("inertia_history", [])], int(d.get("n_iter", 0)),
                   d.get("seed"))


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _assign(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    D = _sq_dists(X, C)
    labels = np.argmin(D, axis=1)
    return labels, D[np.arange(X.shape[0]), labels]


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[int(rng.integers(n))]]
    closest = _sq_dists(X, np.array(centers))[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            cdf = np.cumsum(closest / total)
            idx = min(int(np.searchsorted(cdf, rng.random(), side="right")), n - 1)
        centers.append(X[idx])
        closest = np.minimum(closest, _sq_dists(X, X[idx][None, :])[:, 0])
    return np.array(centers, dtype=float)


def fit_kmeans(X, k: int = 3, seed: int = 0, max_iter: int = 300, tol: float = 1e-6,
               init: np.ndarray | None = None) -> KMeansModel:
    """Lloyd's algorithm from k-means++ (or explicit ``init``) centroids.

    ``inertia_history[i]`` is the inertia of the i-th assignment step.  An
    emptied cluster is moved onto the point farthest from its own centroid.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if n < k:
        raise ValueError(f"need at least k={k} points, got {n}")
    C = np.array(init, dtype=float) if init is not None else kmeans_plusplus(X, k, np.random.default_rng(seed))
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        labels, d2 = _assign(X, C)
        history.append(float(d2.sum()))
        new = C.copy()
        taken: set[int] = set()
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = X[members].mean(axis=0)
        for j in range(k):
            if not (labels == j).any():
                order = np.argsort(-d2, kind="mergesort")
                idx = next(int(i) for i in order if int(i) not in taken)
                taken.add(idx)
                new[j] = X[idx]
        shift = float(np.sqrt(((new - C) ** 2).sum(axis=1)).max())
        C = new
        if shift < tol:
            break
    labels, d2 = _assign(X, C)
    inertia = float(d2.sum())
    history.append(inertia)
    return KMeansModel(k, C, labels, inertia, history, it, seed if init is None else None)


def map_clusters(model: KMeansModel, y, mode: str = "raw", classes=(1, 2, 3)) -> dict[int, int]:
    """Cluster index -> class code.

    ``raw`` maps cluster i to ``classes[i]`` with no relabeling; ``majority``
    maps each cluster to its most frequent true class (lowest code on ties).
    """
    y = np.asarray(y, dtype=int)
    if y.size != model.assignments.size:
        raise ValueError("labels and assignments differ in length")
    if mode == "raw":
        if model.k != len(classes):
            raise ValueError(f"raw mapping needs k == {len(classes)} classes, got k={model.k}")
        return {i: int(c) for i, c in enumerate(classes)}
    if mode == "majority":
        out = {}
        for j in range(model.k):
            members = y[model.assignments == j]
            counts = [int(np.sum(members == c)) for c in classes]
            out[j] = int(classes[int(np.argmax(counts))])
        return out
    raise ValueError(f"unknown mapping mode {mode!r}")


def apply_mapping(assignments, mapping: dict[int, int]) -> np.ndarray:
    return np.array([mapping[int(a)] for a in assignments], dtype=int)
