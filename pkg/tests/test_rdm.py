import numpy as np
import pytest

import oracles
from taskrsa.core import RDM, FeatureMatrix
from taskrsa.errors import DegenerateVector, ValidationError
from taskrsa.rdm import DegeneratePolicy, compute_rdm, lower_triangle


def features(data, task="t"):
    data = np.asarray(data, dtype=float)
    return FeatureMatrix(task, [f"c{i}" for i in range(len(data))], data)


def test_identical_rows_give_zero_rdm():
    rdm = compute_rdm(features([[1, 2, 3]] * 3))
    assert np.all(rdm.values == 0.0)


def test_forced_correlations():
    rdm = compute_rdm(features([[1, 2, 3], [3, 2, 1], [1, 2, 3]]))
    v = rdm.values
    assert (v[0, 1], v[0, 2], v[1, 2]) == (2.0, 0.0, 2.0)


def test_random_matrix_matches_pairwise_oracle(rng):
    data = rng.normal(size=(6, 10))
    rdm = compute_rdm(features(data))
    expected = oracles.rdm(data.tolist())
    np.testing.assert_allclose(rdm.values, expected, atol=1e-12, rtol=0)


def test_constant_row_errors_with_condition_name():
    data = [[1, 2, 3], [4, 4, 4], [0, 1, 5]]
    with pytest.raises(DegenerateVector) as info:
        compute_rdm(features(data))
    assert info.value.condition == "c1"
    assert "c1" in str(info.value)


def test_constant_row_max_dissimilarity():
    data = [[1, 2, 3], [4, 4, 4], [0, 1, 5], [5, 5, 5]]
    rdm = compute_rdm(features(data), DegeneratePolicy.MAX_DISSIMILARITY)
    assert rdm.degenerate_conditions == ("c1", "c3")
    v = rdm.values
    for j in range(4):
        if j != 1:
            assert v[1, j] == 1.0
    assert v[1, 3] == 1.0
    assert v[0, 2] == pytest.approx(1 - oracles.pearson([1, 2, 3], [0, 1, 5]), abs=1e-12)
    # string form of the policy works too
    assert np.array_equal(compute_rdm(features(data), "max").values, v)


def test_invariants_hold(rng):
    rdm = compute_rdm(features(rng.normal(size=(12, 5))))
    v = rdm.values
    assert np.array_equal(v, v.T)
    assert np.all(np.diag(v) == 0.0)
    assert v.min() >= 0.0 and v.max() <= 2.0


def test_affine_invariance(rng):
    data = rng.normal(size=(15, 20))
    base = compute_rdm(features(data)).values
    for a, b in [(3.0, -2.0), (0.01, 100.0), (250.0, 0.5)]:
        np.testing.assert_allclose(compute_rdm(features(a * data + b)).values, base, atol=1e-10, rtol=0)


def test_permutation_equivariance(rng):
    data = rng.normal(size=(9, 7))
    perm = rng.permutation(9)
    base = compute_rdm(features(data)).values
    permuted = compute_rdm(features(data[perm])).values
    np.testing.assert_allclose(permuted, base[np.ix_(perm, perm)], atol=1e-12, rtol=0)


def test_lower_triangle_order():
    a, b, c = 0.1, 0.2, 0.3
    values = np.array([[0, a, b], [a, 0, c], [b, c, 0]])
    rdm = RDM("t", ["x", "y", "z"], values)
    assert list(lower_triangle(rdm)) == [a, b, c]


def test_lower_triangle_length_and_transpose(rng):
    data = rng.normal(size=(5, 4))
    rdm = compute_rdm(features(data))
    tri = lower_triangle(rdm)
    assert len(tri) == 10
    # the transpose's upper triangle, traversed column-major, lists the same entries
    vt = rdm.values.T
    upper = [vt[j][i] for i in range(5) for j in range(i)]
    assert list(tri) == upper
    assert list(tri) == oracles.lower_triangle(rdm.values.tolist())


@pytest.mark.parametrize(
    "data",
    [
        [[1, 2], [3, 4]],  # too few conditions
        [[1], [2], [3]],  # too few features
        [[1, 2], [3, np.nan], [5, 6]],
    ],
)
def test_feature_matrix_validation(data):
    with pytest.raises(ValidationError):
        features(data)


def test_duplicate_conditions_rejected():
    with pytest.raises(ValidationError):
        FeatureMatrix("t", ["a", "a", "b"], np.ones((3, 2)))


def test_rdm_type_rejects_bad_values():
    good = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    RDM("t", ["a", "b", "c"], good)
    bad = good.copy()
    bad[0, 1] = 0.5
    with pytest.raises(ValidationError):
        RDM("t", ["a", "b", "c"], bad)
    bad = good.copy()
    bad[0, 0] = 0.1
    with pytest.raises(ValidationError):
        RDM("t", ["a", "b", "c"], bad)
    with pytest.raises(ValidationError):
        RDM("t", ["a", "b", "c"], good * 3)


def test_rdm_values_are_read_only(rng):
    rdm = compute_rdm(features(rng.normal(size=(4, 3))))
    with pytest.raises(ValueError):
        rdm.values[0, 1] = 5.0
