import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lungrisk.ml import split


def test_sizes_round_half_up():
    r = split(np.ones(1000, dtype=int), 0.7, seed=1)
    assert (len(r.train_indices), len(r.test_indices)) == (700, 300)
    # 0.7 * 5 = 3.5 -> 4
    assert len(split([1, 2, 3, 1, 2], 0.7).train_indices) == 4


def test_same_seed_same_split():
    y = np.arange(50) % 3 + 1
    assert split(y, seed=9) == split(y, seed=9)
    assert split(y, seed=9).train_indices != split(y, seed=10).train_indices


def test_stratified_keeps_class_shares():
    y = np.array([1] * 303 + [2] * 332 + [3] * 365)
    r = split(y, 0.7, seed=3, stratified=True)
    assert len(r.train_indices) == 700
    for c, total in ((1, 303), (2, 332), (3, 365)):
        assert abs(r.train_counts[c] - 0.7 * total) < 1
        assert r.train_counts[c] + r.test_counts[c] == total


def test_degenerate_ratio_rejected():
    with pytest.raises(ValueError):
        split([1, 2, 3], 0.1)
    with pytest.raises(ValueError):
        split([1, 2, 3], 1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=4, max_size=80), st.floats(0.2, 0.8),
       st.integers(0, 2**32 - 1), st.booleans())
def test_partition(y, ratio, seed, stratified):
    try:
        r = split(y, ratio, seed, stratified)
    except ValueError:
        return
    train, test = set(r.train_indices), set(r.test_indices)
    assert not train & test
    assert train | test == set(range(len(y)))
    assert len(train) == int(np.floor(ratio * len(y) + 0.5))
    d = r.to_dict()
    assert d["n_train"] + d["n_test"] == len(y)
