"""Seeded train/test partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SplitResult:
    train_indices: list[int]
    test_indices: list[int]
    seed: int
    ratio: float
    stratified: bool
    train_counts: dict[int, int]
    test_counts: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "ratio": self.ratio,
            "stratified": self.stratified,
            "n_train": len(self.train_indices),
            "n_test": len(self.test_indices),
            "train_counts": {str(k): v for k, v in self.train_counts.items()},
            "test_counts": {str(k): v for k, v in self.test_counts.items()},
        }


def _half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _counts(y: np.ndarray, idx: list[int]) -> dict[int, int]:
    classes = np.unique(y)
    sub = y[idx] if idx else np.array([], dtype=y.dtype)
    return {int(c): int(np.sum(sub == c)) for c in classes}


def split(y, ratio: float = 0.7, seed: int = 0, stratified: bool = False) -> SplitResult:
    """Shuffle row indices with a PCG64 stream and cut at round(ratio * n).

    The default is a plain (unstratified) shuffle.  With ``stratified`` each
    class is shuffled separately and receives a largest-remainder share of
    the round(ratio * n) training slots.
    """
    y = np.asarray(y)
    n = y.size
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    if n < 2:
        raise ValueError("need at least two rows to split")
    n_train = _half_up(ratio * n)
    if n_train == 0 or n_train == n:
        raise ValueError(f"ratio {ratio} leaves one side of the split empty for n={n}")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        train = sorted(int(i) for i in perm[:n_train])
        test = sorted(int(i) for i in perm[n_train:])
    else:
        classes = np.unique(y)
        members = [np.flatnonzero(y == c) for c in classes]
        exact = [ratio * m.size for m in members]
        quota = [int(np.floor(e)) for e in exact]
        order = sorted(range(len(classes)), key=lambda i: (-(exact[i] - quota[i]), i))
        for i in order[: n_train - sum(quota)]:
            quota[i] += 1
        train, test = [], []
        for m, q in zip(members, quota):
            perm = rng.permutation(m)
            train.extend(int(i) for i in perm[:q])
            test.extend(int(i) for i in perm[q:])
        train.sort()
        test.sort()
    return SplitResult(train, test, seed, ratio, stratified, _counts(y, train), _counts(y, test))
