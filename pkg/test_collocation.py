"""
Tests for meshes, mesh functions, quadrature and the collocation operator
"""

import math

import numpy as np
import pytest

from collocation import (Mesh, MeshFunction, adapted_mesh, assemble_operator, gauss_legendre, inner_product,
                         interpolate, quad_integral)
from errors import InvalidInput


@pytest.fixture
def mesh():
    return Mesh(ntst=8, ncol=4)


@pytest.mark.parametrize('ncol', [2, 3, 4, 5])
def test_quadrature_is_exact_to_its_degree(ncol):
    mesh = Mesh(ntst=3, ncol=ncol)
    points, weights, _, _ = mesh.quad
    for k in range(2 * (ncol + 1)):
        assert np.sum(weights * points ** k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_gauss_legendre_interval():
    x, w = gauss_legendre(3, 1.0, 3.0)
    assert np.all((x > 1.0) & (x < 3.0))
    assert np.sum(w) == pytest.approx(2.0)


def test_piecewise_polynomials_are_reproduced(mesh):
    T = 3.0
    poly = np.polynomial.Polynomial([0.5, -1.0, 2.0, 0.25, -0.1])
    f = MeshFunction.from_callable(mesh, T, lambda t: [poly(t)])
    taus = np.linspace(0.0, T, 37)
    np.testing.assert_allclose(interpolate(f, taus)[:, 0], poly(taus), rtol=1e-12, atol=1e-12)
    points = mesh.colloc[0] * T
    np.testing.assert_allclose(f.deriv_colloc()[:, 0], poly.deriv()(points), rtol=1e-10, atol=1e-10)
    qpoints = mesh.quad[0] * T
    np.testing.assert_allclose(f.at_quad()[:, 0], poly(qpoints), rtol=1e-12, atol=1e-12)


def test_interpolation_outside_period(mesh):
    f = MeshFunction.from_callable(mesh, 1.0, lambda t: [t])
    with pytest.raises(InvalidInput):
        interpolate(f, 1.5)


def test_inner_product_conjugates_first_argument():
    T = 2 * math.pi
    f = MeshFunction.from_callable(Mesh(ntst=40, ncol=4), T, lambda t: [math.sin(t), math.cos(t)])
    g = f * 1j
    assert inner_product(f, f) == pytest.approx(2 * math.pi, rel=1e-8)
    assert inner_product(g, f) == pytest.approx(-2j * math.pi, rel=1e-8)
    assert inner_product(f, g) == pytest.approx(2j * math.pi, rel=1e-8)


def test_quad_integral(mesh):
    T = 2.0
    values = (mesh.quad[0] * T) ** 3
    assert quad_integral(values, mesh, T) == pytest.approx(T ** 4 / 4, rel=1e-13)


def test_refined_mesh_keeps_breakpoints():
    mesh = Mesh(ntst=5, ncol=3, breakpoints=(0.0, 0.1, 0.3, 0.6, 0.8, 1.0))
    fine = mesh.refined()
    assert fine.ntst == 10
    assert set(mesh.breakpoints) <= set(fine.breakpoints)
    assert fine.breakpoints[1] == pytest.approx(0.05)


def test_mesh_round_trip():
    mesh = Mesh(ntst=4, ncol=3, breakpoints=(0.0, 0.2, 0.5, 0.7, 1.0))
    assert Mesh.from_dict(mesh.to_dict()) == mesh


@pytest.mark.parametrize('breakpoints', [(0.0, 0.6, 0.4, 1.0), (0.1, 0.4, 0.6, 1.0), (0.0, 0.5, 1.0)])
def test_invalid_breakpoints(breakpoints):
    with pytest.raises(InvalidInput):
        Mesh(ntst=3, ncol=3, breakpoints=breakpoints)


def test_mesh_function_needs_node_values(mesh):
    with pytest.raises(InvalidInput):
        MeshFunction(mesh, np.zeros((mesh.n_nodes - 1, 2)), 1.0)


def test_operator_annihilates_exact_solutions():
    # h = (cos t, sin t) solves h' = [[0, -1], [1, 0]] h
    T = 2 * math.pi
    A = np.array([[0.0, -1.0], [1.0, 0.0]])

    def residual(ntst):
        mesh = Mesh(ntst=ntst, ncol=4)
        h = MeshFunction.from_callable(mesh, T, lambda t: [math.cos(t), math.sin(t)])
        return np.max(np.abs(assemble_operator(mesh, T, lambda t: A).apply(h)))

    coarse, fine = residual(20), residual(40)
    assert fine < 1e-5
    # interpolation error of degree-4 pieces falls like ntst**-4
    assert coarse / fine > 8


def test_operator_shift(mesh):
    T = 1.0
    h = MeshFunction.from_callable(mesh, T, lambda t: [math.exp(0.5 * t)])
    op = assemble_operator(mesh, T, np.zeros((mesh.colloc[0].size, 1, 1)), shift=-0.5)
    assert np.max(np.abs(op.apply(h))) < 1e-8


def test_remesh_preserves_smooth_functions(mesh):
    T = 2 * math.pi
    f = MeshFunction.from_callable(mesh, T, lambda t: [math.sin(t)])
    g = f.remesh(mesh.refined())
    taus = g.mesh.nodes * T
    np.testing.assert_allclose(g.values[:, 0], np.sin(taus), atol=1e-5)


def test_adapted_mesh_concentrates_intervals():
    mesh = Mesh(ntst=20, ncol=4)
    T = 1.0
    f = MeshFunction.from_callable(mesh, T, lambda t: [math.tanh(40 * (t - 0.5))])
    adapted = adapted_mesh(f)
    widths = np.diff(adapted.breakpoints)
    assert adapted.ntst == 20
    assert widths.min() < 0.05 < widths.max()
