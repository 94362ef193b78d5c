import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from warpfield import duals
from warpfield.duals import Dual

from oracles import fd_directional

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def deriv(f):
    return lambda x: duals.tangent(f(Dual(x, 1.0)))


def test_first_derivative_chain_rule():
    f = lambda x: duals.sin(x * x + 3.0 * x)
    x = 0.7
    expected = math.cos(x * x + 3.0 * x) * (2.0 * x + 3.0)
    assert math.isclose(deriv(f)(x), expected, rel_tol=1e-14)


def test_fourth_derivative_by_nesting():
    d4_sin = deriv(deriv(deriv(deriv(duals.sin))))
    for x in (0.0, 0.3, 1.1, -2.0):
        assert math.isclose(d4_sin(x), math.sin(x), abs_tol=1e-12)

    g = lambda x: duals.exp(2.0 * x)
    d4_g = deriv(deriv(deriv(deriv(g))))
    assert math.isclose(d4_g(0.4), 16.0 * math.exp(0.8), rel_tol=1e-13)


def test_fourth_derivative_of_product_rule_expression():
    # by Leibniz: d^4 (x^2 sin x) = x^2 sin x - 8x cos x - 12 sin x
    f = lambda x: x * x * duals.sin(x)
    d4 = deriv(deriv(deriv(deriv(f))))
    x = 0.9
    expected = x * x * math.sin(x) - 8.0 * x * math.cos(x) - 12.0 * math.sin(x)
    assert math.isclose(d4(x), expected, abs_tol=1e-11)


@given(finite, finite)
def test_directional_matches_finite_difference(a, b):
    p = (a, b)
    f = lambda q: duals.exp(0.3 * q[0]) * duals.cos(q[1]) + q[0] * q[1]
    v = (0.6, -1.2)
    ad = duals.directional(f, p, v)
    fd = fd_directional(f, p, v)
    assert math.isclose(ad, fd, rel_tol=1e-6, abs_tol=1e-6)


@given(finite, finite, finite, finite)
def test_product_and_quotient_rules(a, b, c, d):
    x, y = Dual(a, b), Dual(c, d)
    prod = x * y
    assert math.isclose(prod.b, a * d + b * c, rel_tol=1e-12, abs_tol=1e-12)
    if abs(c) > 1e-3:
        quot = x / y
        assert math.isclose(quot.b, (b * c - a * d) / (c * c), rel_tol=1e-9, abs_tol=1e-9)


def test_pow_integer_and_real():
    x = Dual(1.7, 1.0)
    assert math.isclose((x ** 5).b, 5.0 * 1.7 ** 4, rel_tol=1e-14)
    assert math.isclose((x ** 0).b, 0.0, abs_tol=0.0)
    assert math.isclose((x ** 1.01).b, 1.01 * 1.7 ** 0.01, rel_tol=1e-13)
    assert math.isclose((x ** -2).b, -2.0 * 1.7 ** -3, rel_tol=1e-13)


def test_atan2_derivative():
    f = lambda q: duals.atan2(q[1], q[0])
    p = (0.8, -0.5)
    ad = duals.directional(f, p, (1.0, 0.7))
    fd = fd_directional(f, p, (1.0, 0.7))
    assert math.isclose(ad, fd, rel_tol=1e-7)


def test_value_strips_all_levels():
    x = Dual(Dual(2.0, 1.0), Dual(1.0, 0.0))
    assert duals.value(x) == 2.0
    assert duals.value(3.5) == 3.5


def test_float_coercion_is_refused():
    with pytest.raises(TypeError):
        float(Dual(1.0, 0.0))


def test_log_of_nonpositive_raises():
    with pytest.raises(ValueError):
        duals.log(Dual(-1.0, 1.0))


def test_mat_inv_against_numpy():
    rng = np.random.default_rng(7)
    for _ in range(20):
        A = rng.uniform(-2, 2, size=(3, 3))
        A = A @ A.T + 0.5 * np.eye(3)
        inv = duals.mat_inv([list(r) for r in A])
        assert np.allclose(np.array(inv), np.linalg.inv(A), atol=1e-10)


def test_mat_inv_singular_raises():
    with pytest.raises(ZeroDivisionError):
        duals.mat_inv([[1.0, 1.0], [1.0, 1.0]])


def test_cholesky_against_numpy():
    rng = np.random.default_rng(11)
    A = rng.uniform(-1, 1, size=(4, 4))
    A = A @ A.T + 2.0 * np.eye(4)
    L = duals.cholesky([list(r) for r in A])
    assert np.allclose(np.array(L), np.linalg.cholesky(A), atol=1e-10)


def test_cholesky_rejects_indefinite():
    with pytest.raises(ValueError):
        duals.cholesky([[1.0, 0.0], [0.0, -2.0]])


def test_cholesky_differentiates():
    # derivative of sqrt entries flows through: chol([[x]]) = [[sqrt(x)]]
    out = duals.cholesky([[Dual(4.0, 1.0)]])
    assert math.isclose(out[0][0].b, 0.25, rel_tol=1e-14)
