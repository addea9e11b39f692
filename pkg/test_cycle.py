"""
Tests for periodic orbits and Floquet multipliers
"""

import math

import numpy as np
import pytest

from collocation import Mesh, MeshFunction
from cycle import PeriodicOrbit, floquet, monodromy, newton_cycle, orbit_from_simulation, spectrum_from_multipliers
from errors import InvalidInput
from models import get_model
from oracles import build_embedding, embedding_orbit, monodromy_by_integration


@pytest.fixture(scope='module')
def hopfcircle():
    return get_model('hopfcircle')


@pytest.fixture(scope='module')
def circle_orbit(hopfcircle):
    p = hopfcircle.param_vector({'omega': 1.5})
    return orbit_from_simulation(hopfcircle, p, [0.5, 0.0], mesh=Mesh(ntst=30, ncol=4))


def test_cycle_from_simulation(circle_orbit):
    assert circle_orbit.period == pytest.approx(2 * math.pi / 1.5, rel=1e-8)
    radius = np.linalg.norm(circle_orbit.profile.values, axis=1)
    np.testing.assert_allclose(radius, 1.0, atol=1e-7)
    assert circle_orbit.converged_residual < 1e-10


def test_newton_from_perturbed_guess(hopfcircle):
    mesh = Mesh(ntst=25, ncol=4)
    guess = PeriodicOrbit('hopfcircle', MeshFunction.from_callable(
        mesh, 6.0, lambda t: [1.1 * math.cos(t * 2 * math.pi / 6.0), 0.9 * math.sin(t * 2 * math.pi / 6.0)]),
        hopfcircle.param_vector())
    orbit = newton_cycle(hopfcircle, hopfcircle.param_vector(), guess)
    assert orbit.period == pytest.approx(2 * math.pi, rel=1e-8)


def test_guess_dimension_is_checked(hopfcircle):
    laser = get_model('laser')
    mesh = Mesh(ntst=5, ncol=3)
    guess = PeriodicOrbit('hopfcircle', MeshFunction.from_callable(mesh, 1.0, lambda t: [1.0, 0.0]),
                          hopfcircle.param_vector())
    with pytest.raises(InvalidInput):
        newton_cycle(laser, laser.param_vector(), guess)


def test_multipliers_of_the_circle(hopfcircle, circle_orbit):
    spectrum = floquet(hopfcircle, circle_orbit)
    mu = spectrum.multipliers
    assert mu[spectrum.trivial_index] == pytest.approx(1.0, abs=1e-8)
    radial = mu[1 - spectrum.trivial_index]
    assert radial.real == pytest.approx(math.exp(-2 * circle_orbit.period), rel=1e-5)


def test_collocation_monodromy_matches_variational_integration(hopfcircle, circle_orbit):
    ours = np.sort_complex(np.linalg.eigvals(monodromy(hopfcircle, circle_orbit)))
    reference = np.sort_complex(np.linalg.eigvals(monodromy_by_integration(hopfcircle, circle_orbit)))
    np.testing.assert_allclose(ours, reference, rtol=1e-5, atol=1e-9)


@pytest.mark.parametrize('kind', ['lpns', 'pdns', 'nsns'])
def test_embedding_cycle_is_a_solution(kind):
    system = build_embedding(kind)
    orbit = embedding_orbit(system, mesh=Mesh(ntst=30, ncol=4))
    converged = newton_cycle(system, orbit.params, orbit)
    assert converged.period == pytest.approx(2 * math.pi, rel=1e-9)


def test_pdns_embedding_multipliers():
    system = build_embedding('pdns')
    orbit = embedding_orbit(system, mesh=Mesh(ntst=30, ncol=4))
    spectrum = floquet(system, orbit)
    mu = spectrum.multipliers
    assert np.min(np.abs(mu + 1.0)) < 1e-7
    omega = system.meta['omegas'][0]
    assert np.min(np.abs(mu - np.exp(2j * math.pi * omega))) < 1e-7


def test_spectrum_ordering():
    spectrum = spectrum_from_multipliers([0.2, 1.0, -1.0, 0.5 + 0.5j, 0.5 - 0.5j])
    assert spectrum.multipliers[spectrum.trivial_index] == 1.0
    moduli = np.abs(spectrum.multipliers)
    assert np.all(np.diff(moduli) <= 1e-15)
    assert len(spectrum.critical) == 2


def test_orbit_round_trip(hopfcircle, circle_orbit):
    restored = PeriodicOrbit.from_dict(circle_orbit.to_dict(hopfcircle), hopfcircle)
    np.testing.assert_array_equal(restored.profile.values, circle_orbit.profile.values)
    assert restored.period == circle_orbit.period
    np.testing.assert_array_equal(restored.params, circle_orbit.params)
