"""
Tests for eigenfunctions, centre-manifold terms and normal-form coefficients

The synthetic embeddings realize a critical normal form exactly, so the
computed coefficients must reproduce the planted ones.
"""

from dataclasses import replace

import numpy as np
import pytest

from collocation import Mesh, inner_product
from errors import DependencyMissing, InvalidInput
from locator import Codim2Point
from normalform import (NormalFormReport, build_eigenbundle, label, lpns_coefficients, normal_form,
                        nsns_coefficients, pdns_coefficients, required_terms, solve_center_manifold_terms)
from oracles import PLANTED, build_embedding, embedding_orbit

MESH = Mesh(ntst=40, ncol=4)


def embedded_point(kind, coefficients=None):
    system = build_embedding(kind, coefficients)
    orbit = embedding_orbit(system, mesh=MESH)
    point = Codim2Point(kind.upper(), orbit, tuple(system.meta['omegas']), (0.0, 0.0), ('beta1', 'beta2'))
    return system, point


def assert_recovered(report, planted, tol=1e-3):
    for name, value in planted.items():
        assert name in report.coefficients, name
        assert abs(report[name] - value) < tol, (name, report[name], value)


@pytest.fixture(scope='module')
def lpns():
    system, point = embedded_point('lpns')
    report, bundle, terms = normal_form(system, point, order='high')
    return system, point, report, bundle, terms


@pytest.fixture(scope='module')
def pdns():
    system, point = embedded_point('pdns')
    report, bundle, terms = normal_form(system, point, order='high')
    return system, point, report, bundle, terms


@pytest.fixture(scope='module')
def nsns():
    system, point = embedded_point('nsns')
    report, bundle, terms = normal_form(system, point, order='high')
    return system, point, report, bundle, terms


@pytest.mark.parametrize('name', ['lpns', 'pdns', 'nsns'])
def test_planted_coefficients_are_recovered(name, request):
    _, _, report, _, _ = request.getfixturevalue(name)
    assert_recovered(report, PLANTED[name])


@pytest.mark.parametrize('name', ['lpns', 'pdns', 'nsns'])
def test_border_multipliers_vanish(name, request):
    _, _, report, _, _ = request.getfixturevalue(name)
    assert report.diagnostics['max_border_multiplier'] < 1e-8


@pytest.mark.parametrize('name,resonant', [
    ('lpns', ['h200', 'h011']),
    ('pdns', ['h300', 'h210']),
    ('nsns', ['h0021', 'h2100']),
])
def test_resonant_terms_are_solvable(name, resonant, request):
    _, _, report, _, _ = request.getfixturevalue(name)
    terms = report.diagnostics['terms']
    for term in resonant:
        assert terms[term]['mode'] != 'None', term
        assert terms[term]['border_multiplier'] < 1e-8, (term, terms[term])


def test_lpns_tau_coefficients_are_free(lpns):
    _, _, report, _, _ = lpns
    assert report['alpha200'] == 0
    assert report['alpha011'] == 0


def test_lpns_eigenfunctions(lpns):
    _, _, _, bundle, _ = lpns
    # generalized eigenfunction is the unit vector along the fold coordinate
    np.testing.assert_allclose(bundle.v1.values[:, 2], 1.0, atol=1e-6)
    np.testing.assert_allclose(np.delete(bundle.v1.values, 2, axis=1), 0.0, atol=1e-6)
    assert inner_product(bundle.phi_star, bundle.v1) == pytest.approx(1.0, abs=1e-10)
    assert inner_product(bundle.v2_star, bundle.v2) == pytest.approx(1.0, abs=1e-10)
    assert inner_product(bundle.v2, bundle.v2).real == pytest.approx(1.0, abs=1e-10)
    assert max(bundle.diagnostics['residuals'].values()) < 1e-7


def test_pdns_first_eigenfunction_is_antiperiodic(pdns):
    _, _, _, bundle, _ = pdns
    assert bundle.v1.parity == -1
    np.testing.assert_allclose(bundle.v1.values[-1], -bundle.v1.values[0], atol=1e-10)


def test_nsns_conjugate_pair_coefficients(nsns):
    _, _, report, _, _ = nsns
    assert report['b1101'] == pytest.approx(np.conj(report['b1110']), abs=1e-12)
    assert report['a0111'] == pytest.approx(np.conj(report['a1011']), abs=1e-12)


def test_flat_embedding_has_vanishing_manifold_terms(pdns):
    _, _, _, _, terms = pdns
    assert len(terms) > 0
    for m in terms.indices():
        assert np.max(np.abs(terms[m].values)) < 1e-6, label(m)


def test_low_order_reports_fewer_coefficients():
    system, point = embedded_point('pdns')
    report = pdns_coefficients(system, point, build_eigenbundle(system, point))
    assert report.order_computed == 3
    assert 'a300' in report.coefficients
    assert 'a500' not in report.coefficients


def test_phase_of_v2_does_not_change_coefficients(nsns):
    system, point, report, bundle, _ = nsns
    phase = np.exp(0.9j)
    rotated = replace(bundle, v2=bundle.v2 * phase, v2_star=bundle.v2_star * phase)
    again = nsns_coefficients(system, point, rotated, order=3)
    for name, value in again.coefficients.items():
        assert abs(value - report[name]) < 1e-9, name


def test_lpns_second_order_only():
    system, point = embedded_point('lpns')
    report = lpns_coefficients(system, point, build_eigenbundle(system, point))
    assert report.order_computed == 2
    assert report['a200'] == pytest.approx(PLANTED['lpns']['a200'], abs=1e-3)
    assert 'a300' not in report.coefficients


def test_required_terms_follow_degree():
    terms = required_terms('NSNS', 5)
    degrees = [sum(m) for m in terms]
    assert degrees == sorted(degrees)
    assert max(degrees) == 4
    assert (1, 1, 0, 0) in terms and (0, 0, 1, 1) in terms
    # conjugate pairs are solved once
    assert not ((1, 0, 2, 0) in terms and (0, 1, 0, 2) in terms)


def test_missing_dependency_is_reported():
    system, point = embedded_point('lpns')
    bundle = build_eigenbundle(system, point)
    with pytest.raises(DependencyMissing):
        solve_center_manifold_terms(system, point, bundle, [(2, 1, 0)])


def test_wrong_order_is_rejected():
    system, point = embedded_point('lpns')
    with pytest.raises(InvalidInput):
        normal_form(system, point, order=4)


def test_report_round_trip(pdns):
    _, _, report, _, _ = pdns
    restored = NormalFormReport.from_dict(report.to_dict())
    assert restored.coefficients == report.coefficients
    assert restored.order_computed == report.order_computed


@pytest.mark.slow
@pytest.mark.parametrize('kind', ['lpns', 'pdns', 'nsns'])
@pytest.mark.parametrize('seed', range(5))
def test_random_planted_sets(kind, seed):
    rng = np.random.default_rng(seed)
    planted = {}
    for name, value in PLANTED[kind].items():
        if isinstance(value, complex):
            planted[name] = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        else:
            planted[name] = float(rng.uniform(-1, 1))
    system, point = embedded_point(kind, planted)
    report, _, _ = normal_form(system, point, order='high')
    assert_recovered(report, planted)

