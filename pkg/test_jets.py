"""
Tests for truncated Taylor arithmetic
"""

import numpy as np
import pytest

from jets import Jet, taylor_coefficient


@pytest.fixture
def batch():
    # x + t*v at four points
    return Jet.variable(np.array([0.5, 1.0, 1.5, 2.0]), np.array([1.0, -1.0, 2.0, 0.5]), 3)


def test_scalar_minus_batched_jet(batch):
    w = 1 - batch
    np.testing.assert_allclose(w.c[0], [0.5, 0.0, -0.5, -1.0])
    np.testing.assert_allclose(w.c[1], [-1.0, 1.0, -2.0, -0.5])
    assert w.c.shape == (4, 4)


def test_constant_arithmetic_on_batched_jet(batch):
    for value in (2 + batch, batch + 2, batch - 2, 2 * batch, batch / 2, 2 / batch):
        assert value.c.shape == (4, 4)


def test_scalar_jet_against_array_constant():
    x = Jet.variable(1.0, 1.0, 2)
    y = x * np.array([1.0, 2.0, 3.0])
    assert y.c.shape == (3, 3)
    np.testing.assert_allclose(y.c[1], [1.0, 2.0, 3.0])
    z = np.array([1.0, 2.0, 3.0]) - x
    np.testing.assert_allclose(z.c[0], [0.0, 1.0, 2.0])
    np.testing.assert_allclose(z.c[1], [-1.0, -1.0, -1.0])


def test_square_matches_taylor_series(batch):
    # (x + t v)^3 - 2(x + t v) + 1
    g = batch ** 3 - 2 * batch + 1
    x = np.array([0.5, 1.0, 1.5, 2.0])
    v = np.array([1.0, -1.0, 2.0, 0.5])
    np.testing.assert_allclose(g.c[0], x ** 3 - 2 * x + 1)
    np.testing.assert_allclose(g.c[1], (3 * x ** 2 - 2) * v)
    np.testing.assert_allclose(g.c[2], 3 * x * v ** 2)
    np.testing.assert_allclose(g.c[3], v ** 3)


def test_reciprocal_series():
    x = Jet.variable(2.0, 1.0, 3)
    r = 1 / x
    np.testing.assert_allclose(r.c, [0.5, -0.25, 0.125, -0.0625])


def test_negative_power_is_rejected(batch):
    with pytest.raises(TypeError):
        batch ** -1


def test_taylor_coefficient_of_constant():
    np.testing.assert_array_equal(taylor_coefficient(3.0, 0, (2,)), [3.0, 3.0])
    np.testing.assert_array_equal(taylor_coefficient(3.0, 1, (2,)), [0.0, 0.0])
