"""Principal components via cyclic Jacobi diagonalization of the covariance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..features import apply_standardization, standardize


class ConvergenceError(ArithmeticError):
    pass


def jacobi_eigh(A, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and column eigenvectors of a symmetric matrix.

    Cyclic Jacobi: sweep over all (p, q) pairs, rotating each off-diagonal
    entry to zero, until the off-diagonal Frobenius norm is at most ``tol``
    (or at the level of rounding noise for badly scaled input).
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    A = (A + A.T) / 2
    d = A.shape[0]
    V = np.eye(d)
    floor = max(tol, 4 * np.finfo(float).eps * np.linalg.norm(A))

    upper = np.triu_indices(d, 1)

    def off(M):
        # summed directly; |M|^2 - |diag|^2 cancels down to sqrt(eps) accuracy
        return math.sqrt(2.0) * float(np.linalg.norm(M[upper]))

    for _ in range(max_sweeps):
        if off(A) <= floor:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff  # theta would overflow; small-angle limit
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if off(A) > floor:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="mergesort")
    return vals[order], V[:, order]


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for i, row in enumerate(out):
        if row[int(np.argmax(np.abs(row)))] < 0:
            out[i] = -row
    return out


@dataclass
class PcaModel:
    means: np.ndarray
    stds: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    eigenvalues: np.ndarray

    def transform(self, X) -> np.ndarray:
        return apply_standardization(X, self.means, self.stds) @ self.components.T

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        return cls(*(np.array(d[k], dtype=float) for k in
                     ("means", "stds", "components", "explained_variance", "eigenvalues")))


def fit_pca(X, k: int = 2, standardize_input: bool = True) -> PcaModel:
    """Top-``k`` principal axes of the (optionally z-scored) data."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    if not 1 <= k <= d:
        raise ValueError(f"k={k} must be between 1 and the number of features ({d})")
    if standardize_input:
        Z, means, stds = standardize(X)
    else:
        Z, means, stds = X - X.mean(axis=0), X.mean(axis=0), np.ones(d)
    cov = Z.T @ Z / (n - 1)
    vals, vecs = jacobi_eigh(cov)
    comps = _orient(vecs[:, :k].T)
    return PcaModel(means, stds, comps, np.clip(vals[:k], 0.0, None), vals)
