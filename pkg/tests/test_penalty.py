import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsetik.errors import FBIViolationError, PreconditionError
from sparsetik.operators import DenseOperator, DiagonalOperator
from sparsetik.penalty import (
    WeightedPenalty,
    bregman_distance,
    bregman_R,
    bregman_taylor_lambda,
    check_p_inequality,
    kappa,
    p_inequality_slack,
    subgradient_element,
    taylor_T,
)

L1 = WeightedPenalty.uniform(1, 2)


def test_kappa_examples():
    assert kappa(2, 0.3, 7) == 1
    assert kappa(1.5, 1, 1) == pytest.approx(0.26516504294495532, rel=1e-14)
    assert kappa(1.01, 1, 1) == pytest.approx(0.0025425627638932151, rel=1e-12)
    with pytest.raises(PreconditionError):
        kappa(1, 1, 1)


def test_inverse_kappa_grows_towards_one():
    inv = [1 / kappa(p, 1, 1) for p in (1.1, 1.5, 2)]
    assert inv[0] > inv[1] > inv[2]


def test_p_inequality_examples():
    assert check_p_inequality(1.5, 1, 1, 0.7, 0.7)
    # p = 2: |2|^2 - |1|^2 = 3 = 2*1*1 + 1*1, tight
    assert check_p_inequality(2, 1, 1, 1, 2)
    assert p_inequality_slack(2, 1, 1, 1, 2) == pytest.approx(0, abs=1e-15)
    rng = np.random.default_rng(0)
    s = rng.uniform(-1, 1, 1000)
    t = s + rng.uniform(-1, 1, 1000)
    assert check_p_inequality(1.5, 1, 1, s, t)


def test_p_inequality_domain():
    with pytest.raises(PreconditionError):
        check_p_inequality(1.5, 1, 1, 2, 2)
    with pytest.raises(PreconditionError):
        check_p_inequality(1.5, 1, 1, 0, 3)


def test_bregman_R_examples():
    assert bregman_R(L1, [1, 0], [1, 0]) == 0
    assert bregman_R(L1, [2, 0], [1, 0]) == 0
    assert bregman_R(L1, [1, 3], [1, 0]) == 3
    with pytest.raises(PreconditionError):
        bregman_R(WeightedPenalty.uniform(1.5, 2), [1, 0], [1, 0])


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_bregman_R_bounds(u, up):
    u, up = np.array(u), np.array(up)
    w = np.array([1.0, 2.0, 0.5, 1.5])
    pen = WeightedPenalty(1, w)
    R = bregman_R(pen, u, up)
    assert R >= -1e-12
    # only components whose sign disagrees with u+ contribute, each at most 2 w|u|
    mismatch = np.sign(u) != np.sign(up)
    assert R <= 2 * np.sum((w * np.abs(u))[mismatch]) + 1e-9


def test_taylor_T_examples():
    assert taylor_T(DenseOperator(np.eye(2)), [3, 4], [0, 0]) == 25
    assert taylor_T(DiagonalOperator([2, 1]), [1, 1], [0, 0]) == 5
    assert taylor_T(DiagonalOperator([2, 1]), [1, 1], [1, 1]) == 0


def test_taylor_identity(rng):
    K = DenseOperator(rng.standard_normal((6, 4)))
    for _ in range(20):
        u, up, g = rng.standard_normal(4), rng.standard_normal(4), rng.standard_normal(6)
        F = lambda v: float(np.sum((K.apply(v) - g) ** 2))
        grad = 2 * K.adjoint(K.apply(up) - g)
        assert taylor_T(K, u, up) == pytest.approx(F(u) - F(up) - grad @ (u - up), abs=1e-9)


def test_subgradient_examples():
    np.testing.assert_array_equal(subgradient_element(WeightedPenalty.uniform(2, 2), [1, -2]), [2, -4])
    np.testing.assert_array_equal(subgradient_element(WeightedPenalty(1, [3, 2]), [0, 5]), [0, 2])
    np.testing.assert_allclose(subgradient_element(WeightedPenalty.uniform(1.5, 2), [4, 0]), [3, 0])
    with pytest.raises(PreconditionError):
        subgradient_element(WeightedPenalty.uniform(0.5, 2), [1, 1])


def test_subgradient_is_gradient(rng):
    pen = WeightedPenalty(1.5, rng.uniform(1, 2, 5))
    u = rng.standard_normal(5)
    h = 1e-6
    fd = [(pen.value(u + h * e) - pen.value(u - h * e)) / (2 * h) for e in np.eye(5)]
    np.testing.assert_allclose(subgradient_element(pen, u), fd, rtol=1e-6)


@pytest.mark.parametrize("p", [1.1, 1.5, 2.0])
def test_bregman_lower_bound_kappa(p):
    rng = np.random.default_rng(11)
    C, L = 2.0, 1.0
    w = rng.uniform(1, 3, 8)
    pen = WeightedPenalty(p, w)
    k = kappa(p, C, L)
    for _ in range(500):
        up = rng.uniform(-C, C, 8)
        u = up + rng.uniform(-L, L, 8)
        assert np.sum(w * k * (u - up) ** 2) <= bregman_distance(pen, u, up) + 1e-12


def test_lambda_examples():
    c = bregman_taylor_lambda(DenseOperator(np.eye(4)), [1, 0, 0, 0], 1.0, 1.0)
    assert c.c_tilde == pytest.approx(1)
    assert c.lam == pytest.approx(1 / 3)
    # diagonal (2, 1, 1): c~ = 4, ||K|| = 2 -> 1 / max(0.5, 1 * (2*4/4 + 1)) = 1/3
    c = bregman_taylor_lambda(DiagonalOperator([2, 1, 1]), [1, 0, 0], 1.0, 1.0)
    assert c.c_tilde == pytest.approx(4)
    assert c.K_norm == 2
    assert c.lam == pytest.approx(1 / 3)


def test_lambda_preconditions():
    with pytest.raises(PreconditionError):
        bregman_taylor_lambda(DenseOperator(np.eye(2)), [0, 0], 1.0, 1.0)
    with pytest.raises(FBIViolationError):
        bregman_taylor_lambda(DenseOperator([[1, 1], [1, 1]]), [1, 1], 1.0, 1.0)


def test_lambda_bound_on_ball():
    rng = np.random.default_rng(5)
    K = DenseOperator(rng.standard_normal((5, 8)) / np.sqrt(5))
    up = np.zeros(8)
    up[[1, 4]] = [1.5, -0.5]
    w = rng.uniform(1, 2, 8)
    M = 2 * np.sum(np.abs(up)) + 1
    c = bregman_taylor_lambda(K, up, w, M)
    pen = WeightedPenalty(1, w)
    for _ in range(500):
        v = rng.standard_normal(8) * (rng.random(8) < 0.6)
        if not v.any():
            continue
        v *= rng.uniform(0, M) / np.sum(np.abs(v))
        u = up + v
        assert bregman_R(pen, u, up) + taylor_T(K, u, up) >= c.lam * np.sum(np.abs(v)) ** 2
