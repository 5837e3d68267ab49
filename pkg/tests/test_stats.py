import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

import oracles
from lungrisk.features import DegenerateColumnWarning, FeatureMatrix
from lungrisk.stats import (
    betainc,
    entropy,
    information_gain,
    pearson,
    pearson_matrix,
    rank_features,
    rankdata,
    spearman,
    spearman_pairs,
    t_and_p,
    t_from_r,
    t_two_sided_p,
    welch_t,
)
from lungrisk.features import join_by_year

ordinals = st.integers(1, 8)


def small_table(min_size=3, max_size=40):
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(st.lists(ordinals, min_size=n, max_size=n),
                            st.lists(st.integers(1, 3), min_size=n, max_size=n)))


# ---- frozen reference values

def test_spearman_with_ties_reference():
    assert spearman([1, 1, 2], [1, 2, 3]) == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert spearman([1, 1, 2], [1, 2, 3]) == pytest.approx(0.866, abs=1e-3)


def test_information_gain_one_bit():
    assert information_gain([1, 1, 2, 2], ["A", "A", "B", "B"]) == pytest.approx(1.0, abs=1e-12)


def test_t_and_p_reference():
    t = t_from_r(0.6325, 10)
    assert t == pytest.approx(2.3094, abs=1e-3)
    assert t_two_sided_p(t, 8) == pytest.approx(0.0496, abs=5e-4)


def test_entropy_uniform():
    assert entropy([1, 2, 3, 4]) == pytest.approx(2.0)
    assert entropy([7, 7, 7]) == 0.0


# ---- oracle equivalence

@settings(max_examples=150, deadline=None)
@given(small_table())
def test_pearson_matches_exact_arithmetic(data):
    x, y = data
    assert abs(pearson(x, y) - oracles.pearson_exact(x, y)) <= 1e-10


@settings(max_examples=150, deadline=None)
@given(small_table())
def test_information_gain_matches_mutual_information(data):
    x, y = data
    assert abs(information_gain(x, y) - oracles.mutual_information(x, y)) <= 1e-10


@settings(max_examples=150, deadline=None)
@given(small_table(min_size=2))
def test_spearman_matches_counting_ranks(data):
    x, y = data
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        got = spearman(x, y)
    assert abs(got - oracles.spearman_oracle(x, y)) <= 1e-10


@given(st.permutations(range(12)), st.permutations(range(12)))
def test_spearman_without_ties_matches_classical_formula(x, y):
    assert spearman(x, y) == pytest.approx(oracles.spearman_no_ties(x, y), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(small_table(min_size=4))
def test_t_matches_regression_slope(data):
    x, y = data
    if len(set(x)) < 2 or len(set(y)) < 2:
        return
    t, _ = t_and_p(x, y)
    ref = oracles.t_by_regression([float(v) for v in x], [float(v) for v in y])
    if math.isinf(ref) or abs(ref) > 1e6:
        assert abs(t) > 1e6 or math.isinf(t)
    else:
        assert t == pytest.approx(ref, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("t, df", [(0.1, 1), (1.0, 3), (2.3094, 8), (4.0, 30), (-2.5, 12.7), (8.0, 998)])
def test_p_value_against_quadrature(t, df):
    assert t_two_sided_p(t, df) == pytest.approx(oracles.t_tail_quadrature(t, df), rel=1e-9, abs=1e-14)


@settings(max_examples=80)
@given(st.floats(0.05, 50), st.floats(0.05, 50), st.floats(0, 1))
def test_betainc_against_scipy(a, b, x):
    from scipy.special import betainc as ref
    assert betainc(a, b, x) == pytest.approx(float(ref(a, b, x)), rel=1e-9, abs=1e-13)


def test_welch_against_scipy():
    rng = np.random.default_rng(5)
    a = rng.integers(1, 9, 40)
    b = rng.integers(1, 9, 25) + 1
    t, p = welch_t(a, b)
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert t == pytest.approx(ref.statistic, rel=1e-10)
    assert p == pytest.approx(ref.pvalue, rel=1e-8)


def test_welch_contrast_uses_high_and_low_groups():
    x = np.array([1, 2, 1, 2, 5, 5, 6, 7, 9, 9], dtype=float)
    y = np.array([1, 1, 1, 1, 2, 2, 3, 3, 3, 3])
    assert t_and_p(x, y, "high-vs-low") == welch_t(x[y == 3], x[y == 1])
    with pytest.raises(ValueError):
        t_and_p(x, y, "anova")


# ---- invariants

def test_information_gain_bounds_exhaustive():
    """All 3^4 feature columns against a few fixed targets."""
    targets = [[1, 1, 2, 2], [1, 2, 3, 3], [1, 1, 1, 2], [2, 2, 2, 2]]
    for t in targets:
        ht = entropy(t)
        for f in itertools.product([1, 2, 3], repeat=4):
            ig = information_gain(list(f), t)
            assert -1e-12 <= ig <= ht + 1e-12
            if len(set(f)) == 1:
                assert ig == 0.0
        # a feature identical to the target recovers all of its entropy
        assert information_gain(t, t) == pytest.approx(ht)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(1, 200))
def test_p_monotone_in_abs_t(a, b, df):
    lo, hi = sorted((a, b))
    assert t_two_sided_p(hi, df) <= t_two_sided_p(lo, df) + 1e-15
    assert 0.0 <= t_two_sided_p(hi, df) <= 1.0
    assert t_two_sided_p(-a, df) == t_two_sided_p(a, df)


def test_p_at_zero_and_infinity():
    assert t_two_sided_p(0.0, 5) == 1.0
    assert t_two_sided_p(math.inf, 5) == 0.0
    assert t_from_r(1.0, 10) == math.inf


@settings(max_examples=80, deadline=None)
@given(small_table(min_size=3))
def test_spearman_symmetry_and_monotone_invariance(data):
    x, y = data
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        rho = spearman(x, y)
        assert spearman(y, x) == pytest.approx(rho, abs=1e-12)
        assert spearman([v ** 3 + 7 for v in x], y) == pytest.approx(rho, abs=1e-12)
        assert spearman([-v for v in x], y) == pytest.approx(-rho, abs=1e-12)
    assert -1.0 <= rho <= 1.0


def test_spearman_constant_input_warns():
    with pytest.warns(DegenerateColumnWarning):
        assert spearman([3, 3, 3], [1, 2, 3]) == 0.0


def test_rankdata_averages_ties():
    assert rankdata([10, 20, 10, 30]).tolist() == [1.5, 3.0, 1.5, 4.0]


def _fm(X, y):
    X = np.asarray(X, dtype=float)
    return FeatureMatrix([f"f{j}" for j in range(X.shape[1])], X, np.asarray(y))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 30).flatmap(lambda n: st.tuples(
    st.lists(st.lists(ordinals, min_size=4, max_size=4), min_size=n, max_size=n),
    st.lists(st.integers(1, 3), min_size=n, max_size=n))))
def test_pearson_matrix_properties(data):
    X, y = data
    fm = _fm(X, y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        cm = pearson_matrix(fm)
    M = cm.M
    assert M.shape == (5, 5)
    assert np.array_equal(M, M.T)
    assert np.all(np.diag(M) == 1.0)
    assert np.all(np.abs(M) <= 1.0)
    assert cm.labels[-1] == "Level"
    full = np.column_stack([fm.X, fm.y])
    for i, j in itertools.combinations(range(5), 2):
        assert abs(M[i, j] - oracles.pearson_exact(full[:, i], full[:, j])) <= 1e-10


def test_pearson_matrix_flags_constant_columns():
    fm = _fm([[1, 2], [1, 3], [1, 5]], [1, 2, 3])
    with pytest.warns(DegenerateColumnWarning):
        cm = pearson_matrix(fm)
    assert cm.constant == ["f0"]
    assert cm["f0", "Level"] == 0.0
    assert cm.with_target()["f1"] == pytest.approx(oracles.pearson_exact([2, 3, 5], [1, 2, 3]))


def test_rank_features_orders_by_information_gain():
    y = [1, 1, 2, 2, 3, 3, 1, 2]
    X = np.column_stack([[1, 1, 1, 2, 2, 2, 1, 2], y, [5, 5, 5, 5, 5, 5, 5, 6]])
    scores = rank_features(_fm(X, y))
    assert [s.name for s in scores][0] == "f1"
    gains = [s.info_gain for s in scores]
    assert gains == sorted(gains, reverse=True)
    assert scores[0].to_dict()["t_value"] == "inf"


def test_spearman_pairs_reports_years_and_n():
    j = join_by_year({"a": {2001: 1.0, 2002: 3.0, 2003: 2.0}, "b": {2001: 10.0, 2002: 30.0, 2003: 20.0}})
    [row] = spearman_pairs(j, [("a", "b")])
    assert row["rho"] == pytest.approx(1.0)
    assert row["n"] == 3 and row["years"] == [2001, 2002, 2003]
