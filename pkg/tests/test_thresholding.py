import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsetik.errors import MultivaluedPointError, PreconditionError
from sparsetik.thresholding import (
    ThresholdSpec,
    effective_threshold,
    g_map,
    oracle_spacing,
    oracle_threshold,
    scalar_objective,
    threshold,
    threshold_array,
)

# reference roots from 30-digit mpmath findroot on G(y) = x
H_HALF_1_AT_2 = 1.8144020185805389
H_THREEHALVES_2_AT_3 = 1.2938120867734689
AEFF_HALF_1 = 0.94494078742115487

ps = st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0, 1.3, 1.7, 2.0])
alphas = st.floats(0.01, 10)
xs = st.floats(-20, 20, allow_nan=False)


def test_g_map_examples():
    assert g_map(ThresholdSpec(2, 1), 3) == 6
    assert g_map(ThresholdSpec(1, 2), -5) == -6
    assert g_map(ThresholdSpec(1.5, 2), 1) == 2.5


def test_g_map_multivalued():
    with pytest.raises(MultivaluedPointError):
        g_map(ThresholdSpec(0.5, 1), 0)
    with pytest.raises(PreconditionError):
        g_map(ThresholdSpec(0, 1), 1)


def test_spec_validation():
    with pytest.raises(PreconditionError):
        ThresholdSpec(1, 0)
    with pytest.raises(PreconditionError):
        ThresholdSpec(2.5, 1)


def test_threshold_closed_forms():
    assert threshold(ThresholdSpec(1, 2), 3) == 2
    assert threshold(ThresholdSpec(1, 2), -0.5) == 0
    assert threshold(ThresholdSpec(0, 4), 1.9) == 0
    assert threshold(ThresholdSpec(0, 4), 2.1) == 2.1
    assert threshold(ThresholdSpec(0, 4), 2.0) == 0


def test_threshold_root_cases():
    assert threshold(ThresholdSpec(2, 1), 6) == pytest.approx(3, rel=1e-14)
    assert threshold(ThresholdSpec(1.5, 2), 3) == pytest.approx(H_THREEHALVES_2_AT_3, rel=1e-12)
    assert threshold(ThresholdSpec(0.5, 1), 2) == pytest.approx(H_HALF_1_AT_2, rel=1e-12)


def test_threshold_zero_at_jump():
    spec = ThresholdSpec(0.5, 1)
    a = effective_threshold(spec)
    assert a == pytest.approx(AEFF_HALF_1, rel=1e-14)
    assert threshold(spec, a) == 0
    assert threshold(spec, -a) == 0
    assert threshold(spec, np.nextafter(a, 1)) > 0.6


def test_effective_threshold_examples():
    assert effective_threshold(ThresholdSpec(0, 9)) == 3
    assert effective_threshold(ThresholdSpec(1e-6, 1)) == pytest.approx(1, abs=1e-5)
    with pytest.raises(PreconditionError):
        effective_threshold(ThresholdSpec(1, 1))


@pytest.mark.parametrize("p, alpha", [(0.25, 1.0), (0.5, 1.0), (0.75, 3.0), (0.5, 0.1)])
def test_effective_threshold_locates_oracle_jump(p, alpha):
    spec = ThresholdSpec(p, alpha)
    a = effective_threshold(spec)
    h = oracle_spacing(a * 1.01)
    assert oracle_threshold(spec, a * (1 - 1e-3)) == 0
    assert abs(oracle_threshold(spec, a * (1 + 1e-3))) > 10 * h


def test_jump_is_objective_tie():
    spec = ThresholdSpec(0.5, 1)
    a = effective_threshold(spec)
    y = threshold(spec, np.nextafter(a, 2))
    assert scalar_objective(spec, y, a) == pytest.approx(a**2, rel=1e-10)


def test_oracle_examples():
    assert abs(oracle_threshold(ThresholdSpec(1, 2), 3) - 2) <= oracle_spacing(3)
    assert abs(oracle_threshold(ThresholdSpec(0, 4), 5) - 5) <= oracle_spacing(5)
    for p in (0, 0.5, 1, 1.5, 2):
        assert oracle_threshold(ThresholdSpec(p, 1.3), 0.0) == 0


def test_oracle_preconditions():
    with pytest.raises(PreconditionError):
        oracle_threshold(ThresholdSpec(1, 1), 3, grid_points=1000)
    with pytest.raises(PreconditionError):
        oracle_threshold(ThresholdSpec(1, 1), 3, grid_halfwidth=5)


@settings(max_examples=60, deadline=None)
@given(ps, alphas, st.floats(-8, 8, allow_nan=False))
def test_matches_oracle(p, alpha, x):
    spec = ThresholdSpec(p, alpha)
    h = threshold(spec, x)
    o = oracle_threshold(spec, x)
    d = oracle_spacing(x)
    if p < 1 and abs(abs(x) - effective_threshold(spec)) <= d:
        assert o == 0 or abs(o - h) <= 2 * d or h == 0
    else:
        assert abs(h - o) <= 2 * d


@given(ps, alphas, xs)
def test_odd_symmetry(p, alpha, x):
    spec = ThresholdSpec(p, alpha)
    assert threshold(spec, -x) == -threshold(spec, x)


@given(ps, alphas, xs)
def test_shrinkage(p, alpha, x):
    spec = ThresholdSpec(p, alpha)
    assert abs(threshold(spec, x)) <= abs(x)


@given(ps, alphas)
def test_monotone_on_positive_axis(p, alpha):
    x = np.linspace(0, 15, 3001)
    y = threshold_array(p, alpha, x)
    assert np.all(np.diff(y) >= -1e-12 * (1 + x[1:]))


# roots of inputs near the underflow range are not representable
representable_xs = xs.filter(lambda x: x == 0 or abs(x) >= 1e-6)


@given(st.floats(1.01, 2.0), alphas, representable_xs)
def test_inverts_g_map(p, alpha, x):
    spec = ThresholdSpec(p, alpha)
    y = threshold(spec, x)
    if y == 0:
        assert x == 0
    else:
        assert g_map(spec, y) == pytest.approx(x, abs=1e-10 * (1 + abs(x)))


@given(alphas, xs)
def test_quadratic_shrinkage(alpha, x):
    assert threshold(ThresholdSpec(2, alpha), x) == pytest.approx(x / (1 + alpha), abs=1e-12 * (1 + abs(x)))


def test_threshold_array_matches_scalar(rng):
    x = rng.uniform(-5, 5, 200)
    a = rng.uniform(0.1, 3, 200)
    for p in (0, 0.3, 1, 1.4, 2):
        vec = threshold_array(p, a, x)
        scal = [threshold(ThresholdSpec(p, ai), xi) for ai, xi in zip(a, x)]
        np.testing.assert_array_equal(vec, scal)


def test_small_alpha_large_x_converges():
    # steep G near 0 and huge inputs must not stall the root finder
    for p in (1.001, 1.05, 1.999, 0.01, 0.999):
        for x in (1e-8, 1e-3, 1e3, 1e8):
            for alpha in (1e-12, 1e-3, 1e3):
                y = threshold(ThresholdSpec(p, alpha), x)
                assert np.isfinite(y) and 0 <= y <= x
                if y > 1e-300:
                    assert g_map(ThresholdSpec(p, alpha), y) == pytest.approx(x, rel=1e-10, abs=1e-10)
