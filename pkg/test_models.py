"""
Tests for the model registry and multilinear forms
"""

import itertools

import numpy as np
import pytest

from errors import InvalidInput
from models import available_models, eval_mlf, eval_rhs, fd_mlf, get_model, register


@pytest.fixture
def laser():
    return get_model('laser')


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_hopfcircle_rhs_on_cycle():
    system = get_model('hopfcircle')
    f = system.rhs([1.0, 0.0], system.param_vector({'omega': 2.0}))
    np.testing.assert_allclose(f, [0.0, 2.0], atol=1e-15)
    np.testing.assert_array_equal(eval_rhs(system, [1.0, 0.0], system.param_vector({'omega': 2.0})), f)


def test_rhs_broadcasts_over_points(laser, rng):
    p = laser.param_vector()
    x = rng.normal(size=(5, laser.dim))
    batch = laser.rhs(x, p)
    assert batch.shape == (5, laser.dim)
    np.testing.assert_allclose(batch[3], laser.rhs(x[3], p), rtol=1e-14)


def test_jacobian_at_a_batch_of_points():
    system = get_model('hopfcircle')
    p = system.param_vector({'omega': 1.5})
    x = np.array([[1.0, 0.0], [0.0, 0.5], [0.3, -0.2]])
    J = system.jacobian(x, p)
    assert J.shape == (3, 2, 2)
    for (v1, v2), Jk in zip(x, J):
        w = 1 - v1 * v1 - v2 * v2
        expected = [[w - 2 * v1 * v1, -1.5 - 2 * v1 * v2], [1.5 - 2 * v1 * v2, w - 2 * v2 * v2]]
        np.testing.assert_allclose(Jk, expected, atol=1e-14)


def test_jacobian_matches_finite_differences(laser, rng):
    p = laser.param_vector()
    x = rng.normal(size=laser.dim) * 0.3
    J = laser.jacobian(x, p)
    h = 1e-6
    for j in range(laser.dim):
        e = np.zeros(laser.dim)
        e[j] = h
        col = (laser.rhs(x + e, p) - laser.rhs(x - e, p)) / (2 * h)
        np.testing.assert_allclose(J[:, j], col, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize('k', [2, 3])
def test_multilinear_forms_are_symmetric(laser, rng, k):
    p = laser.param_vector()
    x = rng.normal(size=laser.dim)
    dirs = [rng.normal(size=laser.dim) for _ in range(k)]
    ref = laser.mlf(k, x, p, *dirs)
    for perm in itertools.permutations(dirs):
        np.testing.assert_allclose(laser.mlf(k, x, p, *perm), ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('name,k', [('laser', 2), ('laser', 3), ('preypredator', 2), ('vibration', 3)])
def test_exact_forms_match_finite_difference_polarization(name, k, rng):
    system = get_model(name)
    p = system.param_vector()
    x = np.abs(rng.normal(size=system.dim)) + 0.2
    dirs = [rng.normal(size=system.dim) for _ in range(k)]
    exact = eval_mlf(system, k, x, p, dirs)
    approx = fd_mlf(system, k, x, p, *dirs)
    np.testing.assert_allclose(exact, approx, rtol=1e-4, atol=1e-5)


def test_forms_above_polynomial_degree_vanish(rng):
    system = get_model('hopfcircle')
    dirs = [rng.normal(size=2) for _ in range(4)]
    assert np.all(system.mlf(4, [0.3, 0.1], system.param_vector(), *dirs) == 0)


def test_cubic_form_of_hopfcircle():
    # -v1^3 in the first component
    system = get_model('hopfcircle')
    e1 = np.array([1.0, 0.0])
    C = system.mlf(3, [0.0, 0.0], system.param_vector(), e1, e1, e1)
    np.testing.assert_allclose(C, [-6.0, 0.0], atol=1e-12)


def test_unknown_parameter_is_rejected(laser):
    with pytest.raises(InvalidInput, match="unknown parameter"):
        laser.param_vector({'Omega': 1.0})


def test_dimension_mismatch_is_rejected(laser):
    with pytest.raises(InvalidInput):
        laser.rhs(np.zeros(3), laser.param_vector())


def test_form_order_is_bounded(laser):
    x = np.zeros(laser.dim)
    with pytest.raises(InvalidInput):
        laser.mlf(6, x, laser.param_vector(), *([x] * 6))


def test_registry_lists_embeddings():
    names = available_models()
    for name in ('hopfcircle', 'laser', 'preypredator', 'vibration',
                 'nf_embed_lpns', 'nf_embed_pdns', 'nf_embed_nsns'):
        assert name in names
    assert get_model('nf_embed_lpns').dim == 6
    assert get_model('nf_embed_nsns').dim == 7


def test_unknown_model():
    with pytest.raises(InvalidInput, match="unknown model"):
        get_model('duffing')


def test_register_custom_model():
    register('hopfcircle_copy', lambda: get_model('hopfcircle'))
    assert get_model('hopfcircle_copy').name == 'hopfcircle'
