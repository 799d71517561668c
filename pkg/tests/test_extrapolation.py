import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from identity_zne.extrapolation import (
    RIIMCoefficientSet,
    combined_error,
    linear_fit,
    poly_fit_extrapolate,
    poly_weights,
    rescaled_stat_error,
    richardson_weights,
    riim_coefficients,
    stat_error,
)
from identity_zne.insertion import OperatorSet, operator_sets

from oracles import depolarizing_series, lagrange_at_zero

F = Fraction


# Richardson ----------------------------------------------------------------


def test_richardson_examples():
    assert richardson_weights(0) == (1,)
    assert richardson_weights(1) == (F(3, 2), F(-1, 2))
    assert richardson_weights(2) == (F(15, 8), F(-5, 4), F(3, 8))


@pytest.mark.parametrize("n_max", range(9))
def test_richardson_matches_lagrange_oracle(n_max):
    w = richardson_weights(n_max)
    assert list(w) == lagrange_at_zero([1 + 2 * i for i in range(n_max + 1)])
    assert sum(w) == 1
    # moments 1..n_max of the noise scale vanish
    for k in range(1, n_max + 1):
        assert sum(a * (1 + 2 * i) ** k for i, a in enumerate(w)) == 0


def test_richardson_rejects_negative():
    with pytest.raises(ValueError):
        richardson_weights(-1)


# polynomial fits -----------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_square_fit_is_richardson(n):
    assert np.allclose([float(v) for v in poly_weights(n, n)], [float(v) for v in richardson_weights(n)], atol=1e-10)


@pytest.mark.parametrize("n_max", [0, 2, 5])
def test_constant_fit_is_mean(n_max):
    assert poly_weights(n_max, 0) == tuple(F(1, n_max + 1) for _ in range(n_max + 1))


@pytest.mark.parametrize("n_max,n_fit", [(2, 1), (3, 1), (4, 2), (5, 3)])
def test_poly_weights_match_sympy_least_squares(n_max, n_fit):
    x = sympy.Matrix([[sympy.Integer(n) ** i for i in range(n_fit + 1)] for n in range(n_max + 1)])
    pinv = (x.T * x).inv() * x.T
    row = sympy.Matrix([[sympy.Rational(-1, 2) ** i for i in range(n_fit + 1)]]) * pinv
    assert list(poly_weights(n_max, n_fit)) == [F(int(v.p), int(v.q)) for v in row]


def test_poly_weights_reject_underdetermined():
    with pytest.raises(ValueError):
        poly_weights(1, 2)


def test_linear_points_give_exact_intercept():
    pts = [(n, 0.25 - 0.1 * n) for n in range(4)]
    assert poly_fit_extrapolate(pts, 1) == pytest.approx(0.25 + 0.05, abs=1e-14)


def test_duplicate_points_raise():
    with pytest.raises(np.linalg.LinAlgError):
        poly_fit_extrapolate([(0, 1.0), (0, 1.1)], 1)
    with pytest.raises(ValueError):
        poly_fit_extrapolate([(0, 1.0), (1, 1.1)], 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5).flatmap(lambda m: st.tuples(st.just(m), st.integers(0, m), st.lists(st.floats(-5, 5), min_size=m + 1, max_size=m + 1))))
def test_fit_equals_weighted_sum(args):
    n_max, n_fit, ys = args
    weights = poly_weights(n_max, n_fit)
    direct = sum(float(w) * y for w, y in zip(weights, ys))
    assert poly_fit_extrapolate(list(enumerate(ys)), n_fit) == pytest.approx(direct, abs=1e-9)


def _double_cnot_points(eps, n_max):
    return [(n, 1 - (1 - eps) ** (2 * (1 + 2 * n))) for n in range(n_max + 1)]


def test_linear_fit_residual_two_points():
    eps = 0.01
    assert poly_fit_extrapolate(_double_cnot_points(eps, 1), 1) == pytest.approx(6.0e-4, rel=0.03)


@pytest.mark.parametrize("n_max", [1, 2, 3])
def test_linear_fit_residual_grows_with_points(n_max):
    eps = 1e-4
    ratio = poly_fit_extrapolate(_double_cnot_points(eps, n_max), 1) / (2 * eps) ** 2
    assert ratio == pytest.approx((2 * n_max**2 + 4 * n_max + 3) / 6, rel=1e-3)


# RIIM coefficients ---------------------------------------------------------


def test_riim_order_one():
    for n in (1, 4, 9):
        c = riim_coefficients(1, n)
        assert c[(3,)] == F(-1, 2)
        assert c[()] == 1 + F(n, 2)


def test_riim_order_two_four_cnots():
    c = riim_coefficients(2, 4)
    assert (c[()], c[(3,)], c[(5,)], c[(3, 3)]) == (6, -2, F(3, 8), F(1, 4))


def test_riim_order_four_entries():
    for n in (4, 7):
        c = riim_coefficients(4, n)
        assert c[(7, 3)] == 0
        assert c[(9,)] == F(35, 128)


def test_riim_sets_cover_all_orders():
    for order in range(1, 5):
        sets = {s for s, _ in riim_coefficients(order, 6)}
        expected = {OperatorSet(())} | {s for k in range(1, order + 1) for s in operator_sets(k)}
        assert sets == expected


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("n_cnots", [1, 2, 3, 4, 5, 6, 10, 14, 24])
def test_riim_cancels_through_order(order, n_cnots):
    series = depolarizing_series(riim_coefficients(order, n_cnots), n_cnots, order + 1)
    assert series[0] == 1
    assert all(c == 0 for c in series[1 : order + 1])
    assert series[order + 1] != 0


def test_order_four_constant_58_not_59():
    n = 6
    good = riim_coefficients(4, n)
    coefs = list(good.coefficients)
    bumped = [(s, a + F(1, 32) if s == OperatorSet((3, 3)) else a) for s, a in coefs[1:]]
    empty = 1 - sum(a * s.placement_count(n) for s, a in bumped)
    bad = RIIMCoefficientSet(4, n, tuple([(OperatorSet(()), empty)] + bumped))
    assert depolarizing_series(bad, n, 4)[1:] != [0, 0, 0, 0]


def test_riim_rejects_bad_orders():
    with pytest.raises(ValueError):
        riim_coefficients(5, 10)
    with pytest.raises(ValueError):
        riim_coefficients(3, 0)


@pytest.mark.parametrize("n_cnots", [2, 4, 14])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_gate_budget_riim(n_cnots, order):
    assert riim_coefficients(order, n_cnots).gate_budget == n_cnots + 2 * order


def test_per_circuit_weights_sum_to_one():
    c = riim_coefficients(3, 5)
    w = c.per_circuit_weights()
    assert sum(w) == 1
    assert len(w) == sum(c.placement_counts().values())


# errors --------------------------------------------------------------------


def test_stat_error_examples():
    assert stat_error(richardson_weights(1), 10**4) == pytest.approx(math.sqrt(2.5) / 100, rel=1e-12)
    assert stat_error([1], 400) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        stat_error([1], 0)


def test_stat_error_growth():
    values = [stat_error(richardson_weights(n), 1) for n in range(1, 16)]
    scale = [v / (2**n / n) for n, v in zip(range(1, 16), values)]
    assert all(0.5 < s < 2 for s in scale)
    growth = [b / a for a, b in zip(values, values[1:])]
    assert all(g < 2 for g in growth)
    assert growth[-1] > 1.85


def test_rescaled_stat_error():
    w = richardson_weights(1)
    assert rescaled_stat_error(w, 100, [2.0, 2.0]) == pytest.approx(2 * stat_error(w, 100))
    with pytest.raises(ValueError):
        rescaled_stat_error(w, 100, [1.0])


def test_combined_error():
    w = richardson_weights(3)
    assert combined_error(0.01, 0.0, 3, w, 10**30) == pytest.approx(1e-8)
    assert combined_error(0.01, 0.0, 3, w, 10**7) == stat_error(w, 10**7)
    assert combined_error(0.01, 0.1, 1, w, 10**7) == 0.1
    assert combined_error(0.01, 0.1, 4, w, 10**7) == 0.1


def test_linear_fit_matches_polyfit():
    xs, ys = [1, 1.5, 2, 3], [0.1, 0.16, 0.19, 0.31]
    value, value_err, slope, slope_err = linear_fit(xs, ys, [0.01] * 4, at=0.0)
    b, a = np.polyfit(xs, ys, 1)
    assert (value, slope) == pytest.approx((a, b), abs=1e-14)
    # independent errors of equal size: var(slope) = s^2 / Sxx
    sxx = np.sum((np.array(xs) - np.mean(xs)) ** 2)
    assert slope_err == pytest.approx(0.01 / math.sqrt(sxx))
    assert value_err > 0
