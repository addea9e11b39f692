"""
Tests for Lyapunov spectra and parameter sweeps
"""

import csv

import numpy as np
import pytest

from errors import Divergence, InvalidInput
from lyapunov import LyapunovSweep, _tangent, lyapunov_spectrum, sweep, transitions, write_sweep_csv, zero_count
from models import get_model

SHORT = dict(t_transient=20.0, t_total=120.0, renorm_dt=0.5, step=0.05)


@pytest.fixture(scope='module')
def hopfcircle():
    return get_model('hopfcircle')


def short_sweep(spec, **kwargs):
    return LyapunovSweep.parse('hopfcircle', {}, spec, **SHORT, **kwargs)


def test_parse_sweep_string():
    spec = LyapunovSweep.parse('laser', {'Omega_p': 3.45}, 'Delta_cav:-1.8:-1.6:21', direction='down')
    assert (spec.name, spec.low, spec.high, spec.count) == ('Delta_cav', -1.8, -1.6, 21)
    values = spec.values()
    assert values[0] == pytest.approx(-1.6)
    assert values[-1] == pytest.approx(-1.8)
    assert len(values) == 21


@pytest.mark.parametrize('text', ['omega:1:2', 'omega:a:2:3', 'omega:1:2:0', 'omega:1:1:5'])
def test_parse_rejects_bad_sweeps(text):
    with pytest.raises(InvalidInput):
        LyapunovSweep.parse('hopfcircle', {}, text)


def test_tangent_matches_jacobian(hopfcircle):
    p = hopfcircle.param_vector({'omega': 1.3})
    x = np.array([0.7, -0.4])
    Y = np.array([[1.0, 0.2], [-0.5, 2.0]])
    f, AY = _tangent(hopfcircle, hopfcircle.param_dict(p), x, Y)
    np.testing.assert_allclose(f, hopfcircle.rhs(x, p), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(AY, hopfcircle.jacobian(x, p) @ Y, rtol=1e-12, atol=1e-14)


def test_spectrum_of_the_circle(hopfcircle):
    exponents = lyapunov_spectrum(hopfcircle, hopfcircle.param_vector({'omega': 1.5}), [0.3, 0.1], **SHORT)
    assert exponents[0] == pytest.approx(0.0, abs=2e-2)
    assert exponents[1] == pytest.approx(-2.0, abs=2e-2)
    assert zero_count(exponents) == 1


@pytest.mark.parametrize('offset', [1e-3, 0.3, 1.0])
def test_zero_exponent_from_any_phase_on_the_cycle(hopfcircle, offset):
    # after the transient the state sits at angle `offset`, where the first
    # tangent vector is nearly normal to the cycle
    phase = offset - 1.5 * SHORT['t_transient']
    exponents = lyapunov_spectrum(hopfcircle, hopfcircle.param_vector({'omega': 1.5}),
                                  [np.cos(phase), np.sin(phase)], **SHORT)
    assert exponents[0] == pytest.approx(0.0, abs=1e-3)
    assert zero_count(exponents) == 1


def test_burn_share_is_validated(hopfcircle):
    with pytest.raises(InvalidInput):
        lyapunov_spectrum(hopfcircle, hopfcircle.param_vector(), [1.0, 0.0], burn=1.0, **SHORT)


def test_spectrum_needs_consistent_times(hopfcircle):
    with pytest.raises(InvalidInput):
        lyapunov_spectrum(hopfcircle, hopfcircle.param_vector(), [1.0, 0.0], t_transient=10.0, t_total=5.0)


def test_escaping_trajectory(hopfcircle):
    with pytest.raises(Divergence):
        lyapunov_spectrum(hopfcircle, hopfcircle.param_vector(), [1e4, 0.0], **SHORT)


def test_zero_count_threshold():
    assert zero_count([0.001, -0.005, -0.3]) == 2
    assert zero_count([0.001, -0.005, -0.3], threshold=1e-3) == 0


def test_sweep_follows_attractor(hopfcircle):
    spec = short_sweep('omega:1.0:2.0:3', direction='down')
    samples = sweep(hopfcircle, spec, progress=False)
    assert [s['param'] for s in samples] == pytest.approx([2.0, 1.5, 1.0])
    assert [s['zero_count'] for s in samples] == [1, 1, 1]
    assert spec.samples is samples
    assert transitions(samples) == []


def test_independent_samples_in_parallel(hopfcircle):
    spec = short_sweep('omega:1.0:2.0:3', follow=False, workers=2)
    samples = sweep(hopfcircle, spec, progress=False)
    assert [s['param'] for s in samples] == pytest.approx([1.0, 1.5, 2.0])
    for s in samples:
        assert s['exponents'][1] == pytest.approx(-2.0, abs=2e-2)
    serial = sweep(hopfcircle, short_sweep('omega:1.0:2.0:3', follow=False), progress=False)
    assert [s['exponents'] for s in serial] == [s['exponents'] for s in samples]


def test_sweep_of_unknown_parameter(hopfcircle):
    with pytest.raises(InvalidInput):
        sweep(hopfcircle, short_sweep('nu:1:2:3'), progress=False)


def test_transitions():
    samples = [{'param': 0.0, 'zero_count': 1}, {'param': 1.0, 'zero_count': 1},
               {'param': 2.0, 'zero_count': 2}, {'param': 3.0, 'zero_count': 3}]
    assert transitions(samples) == [{'param': 1.5, 'from': 1, 'to': 2}, {'param': 2.5, 'from': 2, 'to': 3}]


def test_sweep_csv(tmp_path):
    samples = [{'param': 0.5, 'exponents': [0.001, -2.0], 'zero_count': 1},
               {'param': 0.75, 'exponents': [0.002, -1.5], 'zero_count': 1}]
    path = tmp_path / 'sweep.csv'
    write_sweep_csv(samples, path, name='omega')
    with open(path) as f:
        table = list(csv.reader(f))
    assert table[0] == ['omega', 'lambda1', 'lambda2', 'zero_count']
    assert float(table[2][2]) == -1.5
    assert table[1][3] == '1'


# --- published scans --------------------------------------------------------

SCAN = dict(t_transient=2000.0, t_total=12000.0, renorm_dt=1.0, step=0.02)


@pytest.mark.slow
def test_laser_scan_reaches_three_torus():
    system = get_model('laser')
    spec = LyapunovSweep.parse('laser', {'Omega_p': 3.45}, 'Delta_cav:-1.80:-1.60:21', **SCAN)
    samples = sweep(system, spec, progress=False)
    found = [t for t in transitions(samples) if {t['from'], t['to']} == {2, 3}]
    assert any(abs(t['param'] + 1.773) < 0.01 for t in found)


@pytest.mark.slow
def test_preypredator_torus_transition():
    system = get_model('preypredator')
    spec = LyapunovSweep.parse('preypredator', {'b2': 0.261}, 'eps:0.50:0.54:9', **SCAN)
    samples = sweep(system, spec, progress=False)
    assert any(abs(t['param'] - 0.52) < 0.01 for t in transitions(samples))


@pytest.mark.slow
def test_vibration_three_zero_window():
    system = get_model('vibration')
    spec = LyapunovSweep.parse('vibration', {'k1': 0.083}, 'eta:0.40:0.42:21', **SCAN)
    samples = sweep(system, spec, progress=False)
    window = [s['param'] for s in samples if s['zero_count'] == 3]
    assert window
    assert min(window) <= 0.4164 and max(window) >= 0.4107
