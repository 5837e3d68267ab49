import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lungrisk.ml import apply_mapping, fit_kmeans, map_clusters


def _blobs(seed, n=50):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    y = np.repeat([1, 2, 3], n)
    return centers[y - 1] + rng.normal(size=(3 * n, 2)), y


def test_single_cluster_is_the_mean():
    X = np.random.default_rng(0).normal(size=(40, 3))
    m = fit_kmeans(X, k=1)
    np.testing.assert_allclose(m.centroids[0], X.mean(axis=0), atol=1e-12)
    assert m.inertia == pytest.approx(X.shape[0] * X.var(axis=0).sum())


def test_blobs_recovered_up_to_relabeling():
    X, y = _blobs(1)
    m = fit_kmeans(X, k=3, seed=0)
    mapping = map_clusters(m, y, "majority")
    assert sorted(mapping.values()) == [1, 2, 3]
    assert (apply_mapping(m.assignments, mapping) == y).all()


def test_converged_centroids_are_a_fixed_point():
    X, _ = _blobs(2)
    m = fit_kmeans(X, k=3, seed=4)
    again = fit_kmeans(X, k=3, init=m.centroids)
    assert again.n_iter == 1
    np.testing.assert_allclose(again.centroids, m.centroids, atol=1e-12)
    assert np.array_equal(again.assignments, m.assignments)


def test_same_seed_same_clustering():
    X, _ = _blobs(3)
    assert fit_kmeans(X, seed=9).to_dict() == fit_kmeans(X, seed=9).to_dict()


def test_empty_cluster_is_reseeded():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    # the third centroid starts far from every point and loses them all
    m = fit_kmeans(X, k=3, init=np.array([[0.5], [10.5], [1000.0]]))
    assert set(m.assignments.tolist()) == {0, 1, 2}


def test_raw_and_majority_mapping():
    X, y = _blobs(5)
    m = fit_kmeans(X, k=3, seed=2)
    raw = apply_mapping(m.assignments, map_clusters(m, y, "raw"))
    maj = apply_mapping(m.assignments, map_clusters(m, y, "majority"))
    assert map_clusters(m, y, "raw") == {0: 1, 1: 2, 2: 3}
    assert (maj == y).mean() >= (raw == y).mean()
    with pytest.raises(ValueError):
        map_clusters(m, y, "hungarian")


def test_too_few_points():
    with pytest.raises(ValueError):
        fit_kmeans(np.zeros((2, 2)), k=3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(6, 40))
def test_inertia_is_monotone(seed, k, n):
    X = np.random.default_rng(seed).integers(0, 6, (n, 2)).astype(float)
    m = fit_kmeans(X, k=k, seed=seed)
    h = m.inertia_history
    assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(h, h[1:]))
    assert m.inertia == pytest.approx(h[-1])
    y = np.random.default_rng(seed).integers(1, 4, n)
    maj = apply_mapping(m.assignments, map_clusters(m, y, "majority"))
    if k == 3:
        raw = apply_mapping(m.assignments, map_clusters(m, y, "raw"))
        assert (maj == y).mean() >= (raw == y).mean()
