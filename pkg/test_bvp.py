"""
Tests for bordered periodic BVP solves and kernel functions
"""

import math

import numpy as np
import pytest

from bvp import (BorderedSystem, BvpSpec, kernel_function, normalize_pair, normalize_self, solve_adjoint_bvp,
                 solve_linear_bvp)
from collocation import Mesh, MeshFunction, assemble_operator, inner_product
from errors import InvalidInput, KernelDimensionMismatch, NormalizationDegenerate, NumericallySingular
from models import get_model

T = 2 * math.pi


@pytest.fixture
def mesh():
    return Mesh(ntst=20, ncol=4)


def scalar_operator(mesh, a=0.0, shift=0.0):
    return assemble_operator(mesh, T, np.full((mesh.colloc[0].size, 1, 1), a), shift)


def test_bordered_solve_recovers_mean_free_solution(mesh):
    # h' - beta = cos + 1/2 with zero mean: h = sin, beta = -1/2
    op = scalar_operator(mesh)
    one = MeshFunction.from_callable(mesh, T, lambda t: [1.0])
    rhs = MeshFunction.from_callable(mesh, T, lambda t: [math.cos(t) + 0.5])
    solution = solve_linear_bvp(BvpSpec(op, rhs, constraints=[(one, 0.0)], border=one))
    assert solution.border_multiplier == pytest.approx(-0.5, abs=1e-10)
    taus = mesh.nodes * T
    np.testing.assert_allclose(solution.h.values[:, 0], np.sin(taus), atol=1e-7)
    assert solution.residual_norm < 1e-12


def test_constraint_targets(mesh):
    op = scalar_operator(mesh)
    one = MeshFunction.from_callable(mesh, T, lambda t: [1.0])
    system = BorderedSystem(op, 'periodic', [one], [one])
    rhs = np.zeros((mesh.colloc[0].size, 1))
    solution = system.solve(rhs, [T])
    np.testing.assert_allclose(solution.h.values[:, 0], 1.0, atol=1e-10)


def test_complex_right_hand_side_on_real_matrix(mesh):
    op = scalar_operator(mesh, a=-1.0)
    rhs = MeshFunction.from_callable(mesh, T, lambda t: [(1 + 1j) * math.cos(t)])
    solution = BorderedSystem(op).solve(rhs)
    # h' + h = (1+i) cos t has the periodic solution (1+i)(cos t + sin t)/2
    taus = mesh.nodes * T
    np.testing.assert_allclose(solution.h.values[:, 0], (1 + 1j) * (np.cos(taus) + np.sin(taus)) / 2,
                               atol=1e-7)


def test_singular_operator_without_border(mesh):
    with pytest.raises(NumericallySingular):
        BorderedSystem(scalar_operator(mesh))


def test_constraint_and_border_counts_must_agree(mesh):
    one = MeshFunction.from_callable(mesh, T, lambda t: [1.0])
    with pytest.raises(InvalidInput):
        BorderedSystem(scalar_operator(mesh), 'periodic', [one, one], [one])


def test_unknown_boundary(mesh):
    with pytest.raises(InvalidInput):
        BorderedSystem(scalar_operator(mesh, a=-1.0), 'dirichlet')


def test_periodic_kernel_with_imaginary_shift(mesh):
    # h' + i h = 0 has the periodic kernel exp(-i t)
    h, sigma = kernel_function(scalar_operator(mesh, shift=1j))
    h = normalize_self(h)
    taus = mesh.nodes * T
    expected = np.exp(-1j * taus) / math.sqrt(T)
    np.testing.assert_allclose(h.values[:, 0], expected, atol=1e-6)
    assert sigma[0] < 1e-4 * sigma[1]


def test_antiperiodic_kernel(mesh):
    h, _ = kernel_function(scalar_operator(mesh, shift=0.5j), 'antiperiodic')
    assert h.parity == -1
    assert h.values[-1, 0] == pytest.approx(-h.values[0, 0], abs=1e-12)


def test_regular_operator_has_no_kernel(mesh):
    with pytest.raises(KernelDimensionMismatch):
        kernel_function(scalar_operator(mesh, shift=0.3))


def test_two_dimensional_kernel_is_rejected(mesh):
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    # constant rotation: cos/sin and sin/-cos both periodic
    op = assemble_operator(mesh, T, lambda t: A)
    with pytest.raises(KernelDimensionMismatch):
        kernel_function(op)


def test_normalize_pair(mesh):
    h = MeshFunction.from_callable(mesh, T, lambda t: [math.cos(t), 1j])
    w = MeshFunction.from_callable(mesh, T, lambda t: [math.cos(t), 0.5])
    scaled = normalize_pair(h, w)
    assert inner_product(scaled, w) == pytest.approx(1.0, abs=1e-12)


def test_normalize_pair_degenerate(mesh):
    h = MeshFunction.from_callable(mesh, T, lambda t: [math.cos(t)])
    w = MeshFunction.from_callable(mesh, T, lambda t: [math.sin(t)])
    with pytest.raises(NormalizationDegenerate):
        normalize_pair(h, w)


def test_normalize_self_phase_gauge(mesh):
    h = MeshFunction.from_callable(mesh, T, lambda t: [0.3j * np.exp(1j * t), 0.1])
    g = normalize_self(h * np.exp(0.7j))
    assert inner_product(g, g).real == pytest.approx(1.0, rel=1e-12)
    assert abs(g.values[0, 0].imag) < 1e-14
    assert g.values[0, 0].real > 0


def test_adjoint_kernel_of_trivial_operator(mesh):
    one = MeshFunction.from_callable(mesh, T, lambda t: [1.0])
    phi = solve_adjoint_bvp(np.zeros((mesh.colloc[0].size, 1, 1)), mesh, T, 0.0, 'periodic', pair=one)
    np.testing.assert_allclose(phi.values[:, 0], 1.0 / T, rtol=1e-8)


def test_adjoint_eigenfunction_of_the_circle(mesh):
    # on the unit circle with omega = 1 the phase response is (-sin t, cos t) / 2pi
    system = get_model('hopfcircle')
    p = system.param_vector({'omega': 1.0})
    u0 = MeshFunction.from_callable(mesh, T, lambda t: [math.cos(t), math.sin(t)])
    f0 = MeshFunction(mesh, system.rhs(u0.values, p), T)
    A = system.jacobian(u0.at_colloc(), p)
    phi = solve_adjoint_bvp(A, mesh, T, 0.0, 'periodic', pair=f0)
    assert inner_product(phi, f0) == pytest.approx(1.0, abs=1e-10)
    taus = mesh.nodes * T
    np.testing.assert_allclose(phi.values, np.stack([-np.sin(taus), np.cos(taus)], axis=1) / T, atol=1e-6)
