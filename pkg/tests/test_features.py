import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lungrisk.features import (
    DegenerateColumnWarning,
    EmptyJoinError,
    apply_standardization,
    decode_level,
    encode_level,
    environment_series,
    feature_matrix,
    join_by_year,
    standardize,
)
from lungrisk.ingest import (
    impute_missing,
    parse_patient_csv,
    parse_tree_cover_loss,
    parse_yearly_incidence,
)


@pytest.mark.parametrize("label, code", [("Low", 1), ("Medium", 2), ("High", 3), ("medium", 2), (" HIGH ", 3)])
def test_encode_level(label, code):
    assert encode_level(label) == code


def test_encode_unknown_names_value_and_row():
    with pytest.raises(ValueError, match=r"'Severe' at row 12"):
        encode_level("Severe", row=12)


def test_encoding_is_a_bijection():
    for lv in ("Low", "Medium", "High"):
        assert decode_level(encode_level(lv)) == lv
    assert sorted(encode_level(lv) for lv in ("Low", "Medium", "High")) == [1, 2, 3]
    with pytest.raises(ValueError):
        decode_level(4)


def test_standardize_hand_example():
    Z, means, stds = standardize(np.array([[1.0], [2.0], [3.0]]))
    assert means[0] == 2.0 and stds[0] == 1.0
    np.testing.assert_allclose(Z[:, 0], [-1.0, 0.0, 1.0])


def test_constant_column_warns_and_zeroes():
    with pytest.warns(DegenerateColumnWarning):
        Z, _, stds = standardize(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]))
    assert stds[0] == 1.0
    assert np.all(Z[:, 0] == 0.0)


def test_standardize_needs_two_rows():
    with pytest.raises(ValueError):
        standardize(np.ones((1, 3)))


_matrices = arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 5)),
                   elements=st.floats(-1e3, 1e3, allow_nan=False).map(lambda v: round(v, 3)))


@settings(max_examples=60, deadline=None)
@given(_matrices)
def test_standardize_properties(X):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        Z, means, stds = standardize(X)
        Z2, _, _ = standardize(Z)
    keep = X.std(axis=0, ddof=1) > 1e-6 * (1 + np.abs(X).max())
    assert np.all(np.abs(Z.mean(axis=0)) <= 1e-9)
    assert np.all(np.abs(Z.std(axis=0, ddof=1)[keep] - 1) <= 1e-9)
    # idempotence
    assert np.max(np.abs(Z2 - Z), initial=0.0) <= 1e-9
    # stored parameters reproduce the transform exactly
    assert np.array_equal(apply_standardization(X, means, stds), Z)


def test_feature_matrix_from_table(fixtures):
    fm = feature_matrix(parse_patient_csv(fixtures / "patients_head.csv"))
    assert fm.X.shape == (5, 23)
    assert fm.column_names[0] == "Age"
    assert list(fm.y) == [1, 2, 3, 3, 3]
    assert fm.column("Age")[0] == 33


def test_feature_matrix_refuses_missing_cells():
    t = parse_patient_csv(b"Patient Id,Age,Gender,Smoking,Level\nP1,30,1,,Low\nP2,31,2,3,High\n")
    with pytest.raises(ValueError, match="impute"):
        feature_matrix(t)
    assert feature_matrix(impute_missing(t)).X.shape == (2, 3)


def test_join_keeps_shared_years(fixtures):
    inc = parse_yearly_incidence(fixtures / "incidence.csv")
    loss_years = {y: float(y) for y in range(2001, 2024)}
    joined = join_by_year({"cases": {r.year: r.cases for r in inc}, "loss_ha": loss_years})
    assert joined.years == [2012, 2018, 2020, 2022]
    assert joined.columns["cases"] == [21865.0, 23667.0, 26262.0, 24426.0]


def test_join_identical_years_keeps_all():
    a = {2001: 1.0, 2002: 2.0, 2003: 3.0}
    assert join_by_year({"a": a, "b": dict(a)}).n == 3


def test_join_disjoint_errors_with_advice():
    with pytest.raises(EmptyJoinError, match="interpolate"):
        join_by_year({"a": {2000: 1.0}, "b": {2001: 2.0}})


def test_join_needs_two_series():
    with pytest.raises(ValueError):
        join_by_year({"a": {2000: 1.0}})


def test_join_interpolation(fixtures):
    inc = parse_yearly_incidence(fixtures / "incidence.csv")
    loss = parse_tree_cover_loss(fixtures / "tree_cover_loss.csv")
    series = environment_series(incidence=inc, loss=loss)
    with pytest.raises(EmptyJoinError):
        join_by_year({"cases": series["cases"], "loss_ha": series["loss_ha"]})
    joined = join_by_year({"cases": series["cases"], "loss_ha": series["loss_ha"]}, interpolate=True)
    assert joined.years == [2001, 2002, 2003, 2004, 2005]
    # 2001 lies 1/12 of the way from 2000 (8096) to 2012 (21865)
    assert joined.columns["cases"][0] == pytest.approx(8096 + (21865 - 8096) / 12)


year_maps = st.dictionaries(st.integers(1990, 2030), st.floats(-1e6, 1e6, allow_nan=False),
                            min_size=1, max_size=15)


@given(year_maps, year_maps)
def test_join_properties(a, b):
    try:
        ab = join_by_year({"a": a, "b": b})
    except EmptyJoinError:
        assert not set(a) & set(b)
        return
    ba = join_by_year({"b": b, "a": a})
    assert set(ab.years) <= set(a) and set(ab.years) <= set(b)
    assert ab.years == sorted(set(ab.years))
    assert ab.years == ba.years
    assert ab.columns["a"] == ba.columns["a"] and ab.columns["b"] == ba.columns["b"]
