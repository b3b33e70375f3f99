import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sparsetik.errors import DimensionError, PreconditionError
from sparsetik.seqspace import (
    WeightSequence,
    multivalued_sign_contains,
    support_count,
    weighted_p_norm_power,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_weighted_p_norm_power_examples():
    assert weighted_p_norm_power([1, -2], [1, 1], 1) == 3
    assert weighted_p_norm_power([0, 0, 0], [2, 3, 4], 1.5) == 0
    assert weighted_p_norm_power([3, 4], [2, 1], 2) == 34


def test_weighted_p_norm_power_length_mismatch():
    with pytest.raises(DimensionError):
        weighted_p_norm_power([1, 2], [1, 1, 1], 1)


def test_uniform_weight_scalar():
    assert weighted_p_norm_power([1, -1, 2], 2.0, 1) == 8


@pytest.mark.parametrize("u, w, expected", [
    ([0, 5, 0, -1], [1, 1, 1, 1], 2),
    ([0, 0], [1, 1], 0),
    ([1, 1], [2, 3], 5),
])
def test_support_count(u, w, expected):
    assert support_count(u, w) == expected


def test_support_count_is_exact():
    assert support_count([1e-300, 0.0], [1, 1]) == 1


@pytest.mark.parametrize("x, s, expected", [
    (0, 0.3, True), (2, 1, True), (-1, 0.5, False),
    (0, -1, True), (0, 1.01, False), (-3, -1, True), (1, 0.999, False),
])
def test_multivalued_sign(x, s, expected):
    assert multivalued_sign_contains(x, s) is expected


def test_weights_must_be_positive():
    with pytest.raises(PreconditionError):
        WeightSequence(np.array([1.0, 0.0]))
    assert WeightSequence(np.array([3.0, 0.5, 2.0])).w0 == 0.5


@given(arrays(float, 6, elements=finite), st.floats(-10, 10), st.sampled_from([0.5, 1.0, 1.5, 2.0]))
def test_homogeneity(u, c, p):
    w = np.linspace(1, 2, 6)
    lhs = weighted_p_norm_power(c * u, w, p)
    rhs = abs(c) ** p * weighted_p_norm_power(u, w, p)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@given(arrays(float, 8, elements=finite))
def test_two_norm_below_one_norm(u):
    assert np.linalg.norm(u) <= np.sum(np.abs(u)) * (1 + 1e-12)


@given(arrays(float, 5, elements=finite), arrays(bool, 5))
def test_support_count_bounds_and_sign_flips(u, flips):
    w = np.array([1.0, 2.0, 0.5, 3.0, 1.5])
    v = np.where(flips, -u, u)
    assert support_count(u, w) == support_count(v, w)
    assert support_count(u, w) <= 5 * w.max()
