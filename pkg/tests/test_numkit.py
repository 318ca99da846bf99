import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexact.numkit import UNIFORM_EPS, DimensionError, OracleError, Rng, finite_diff_grad, matvec

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_matvec_identity_and_zero():
    np.testing.assert_array_equal(matvec(np.eye(2), [3, 4]), [3, 4])
    np.testing.assert_array_equal(matvec(np.zeros((3, 2)), [5, -1]), [0, 0, 0])


def test_matvec_hand_computed():
    np.testing.assert_array_equal(matvec([[1, 2], [3, 4]], [1, 1]), [3, 7])


def test_matvec_dimension_mismatch():
    with pytest.raises(DimensionError):
        matvec(np.eye(3), [1, 2])


@given(st.lists(finite, min_size=6, max_size=6), st.lists(finite, min_size=3, max_size=3),
       st.lists(finite, min_size=3, max_size=3), finite, finite)
def test_matvec_linear(m, u, v, a, b):
    m = np.reshape(m, (2, 3))
    u, v = np.array(u), np.array(v)
    lhs = matvec(m, a * u + b * v)
    rhs = a * matvec(m, u) + b * matvec(m, v)
    scale = 1 + np.abs(m).sum() * (abs(a) * np.abs(u).max() + abs(b) * np.abs(v).max())
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale)


def test_uniform_open_range_and_determinism():
    a = Rng(7).uniform_open(10_000)
    b = Rng(7).uniform_open(10_000)
    assert np.all((a > 0) & (a < 1))
    assert np.all(a >= UNIFORM_EPS) and np.all(a <= 1 - UNIFORM_EPS)
    np.testing.assert_array_equal(a, b)


def test_different_seeds_differ_early():
    a = Rng(1).uniform_open(16)
    b = Rng(2).uniform_open(16)
    assert np.any(a != b)


def test_streams_are_independent():
    assert np.any(Rng(3, stream=0).uniform_open(16) != Rng(3, stream=1).uniform_open(16))


def test_uniform_mean():
    assert abs(Rng(11).uniform_open(1_000_000).mean() - 0.5) < 0.01


def test_normal_moments():
    z = Rng(5).normal((200_000,))
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1) < 0.01


def test_normal_odd_shape():
    assert Rng(0).normal((3, 3)).shape == (3, 3)


def test_finite_diff_square():
    g = finite_diff_grad(lambda x: x[0] ** 2, [3.0], h=1e-5)
    assert abs(g[0] - 6) < 1e-6


def test_finite_diff_constant():
    np.testing.assert_array_equal(finite_diff_grad(lambda x: 4.0, np.ones(3)), np.zeros(3))


def test_finite_diff_tanh():
    g = finite_diff_grad(lambda x: math.tanh(x[0]), [0.5], h=1e-5)
    assert abs(g[0] - (1 - math.tanh(0.5) ** 2)) < 1e-7


@settings(max_examples=50)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_finite_diff_exact_on_quadratics(x, c):
    A = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, -0.3], [0.0, -0.3, 3.0]])
    c = np.array(c)
    x = np.array(x)
    g = finite_diff_grad(lambda v: 0.5 * v @ A @ v + c @ v, x, h=1e-5)
    exact = A @ x + c
    assert np.all(np.abs(g - exact) <= 1e-6 * np.maximum(1, np.abs(exact)))


def test_finite_diff_reports_nonfinite():
    with pytest.raises(OracleError):
        finite_diff_grad(lambda x: math.inf, [0.0])
    with pytest.raises(ValueError):
        finite_diff_grad(lambda x: 0.0, [0.0], h=0)
