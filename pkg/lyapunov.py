"""
Lyapunov spectra along one-parameter sweeps
Benettin tangent integration with QR re-orthonormalization; the number of
exponents near zero counts the dimension of the attracting torus
"""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from errors import Divergence, InvalidInput
from jets import Jet, taylor_coefficient

logger = logging.getLogger(__name__)

T_TRANSIENT = 1e4
T_TOTAL = 5e4
RENORM_DT = 1.0
STEP = 0.01
ZERO_THRESHOLD = 1e-2
# share of the measured span spent aligning the tangent basis before log growth is summed
TANGENT_BURN = 0.1
BOUND = 1e6


@dataclass
class LyapunovSweep:
    model: str
    params: dict
    name: str
    low: float
    high: float
    count: int
    direction: str = 'up'
    x0: tuple = None
    t_transient: float = T_TRANSIENT
    t_total: float = T_TOTAL
    renorm_dt: float = RENORM_DT
    step: float = STEP
    zero_threshold: float = ZERO_THRESHOLD
    follow: bool = True
    workers: int = 1
    samples: list = field(default_factory=list)

    def values(self):
        v = np.linspace(self.low, self.high, self.count)
        return v[::-1] if self.direction == 'down' else v

    @classmethod
    def parse(cls, model, params, spec, **kwargs):
        """From a 'name:lo:hi:n' sweep string"""
        try:
            name, lo, hi, n = spec.split(':')
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError:
            raise InvalidInput(f"sweep must read name:lo:hi:n, got '{spec}'", sweep=spec) from None
        if n < 1:
            raise InvalidInput("sweep needs a positive sample count", sweep=spec)
        if lo == hi:
            raise InvalidInput("sweep range has zero length", sweep=spec)
        return cls(model, dict(params), name, lo, hi, n, **kwargs)


def _tangent(system, pd, x, Y):
    """f(x) and A(x) Y from one evaluation of the field on first-order jets"""
    if not system.analytic:
        return system.rhs(x, system.param_vector(pd)), system.jacobian(x, system.param_vector(pd)) @ Y
    m = Y.shape[1]
    jets = [Jet.variable(np.full(m, x[i]), Y[i], 1) for i in range(system.dim)]
    out = system.field(jets, pd)
    f = np.array([taylor_coefficient(o, 0, (m,))[0] for o in out])
    AY = np.array([taylor_coefficient(o, 1, (m,)) for o in out])
    return f, AY


def _rk4(system, pd, x, Y, h, steps):
    for _ in range(steps):
        f1, g1 = _tangent(system, pd, x, Y)
        f2, g2 = _tangent(system, pd, x + 0.5 * h * f1, Y + 0.5 * h * g1)
        f3, g3 = _tangent(system, pd, x + 0.5 * h * f2, Y + 0.5 * h * g2)
        f4, g4 = _tangent(system, pd, x + h * f3, Y + h * g3)
        x = x + h * (f1 + 2 * f2 + 2 * f3 + f4) / 6
        Y = Y + h * (g1 + 2 * g2 + 2 * g3 + g4) / 6
    return x, Y


def _rk4_state(system, p, x, h, steps):
    for _ in range(steps):
        k1 = system.rhs(x, p)
        k2 = system.rhs(x + 0.5 * h * k1, p)
        k3 = system.rhs(x + 0.5 * h * k2, p)
        k4 = system.rhs(x + h * k3, p)
        x = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return x


def lyapunov_spectrum(system, params, x0, t_transient=T_TRANSIENT, t_total=T_TOTAL, renorm_dt=RENORM_DT,
                      step=STEP, bound=BOUND, burn=TANGENT_BURN, return_state=False):
    """
    Full Lyapunov spectrum, sorted descending.

    The transient is integrated without tangent vectors; the remaining
    t_total - t_transient is split into windows of renorm_dt, each ending
    with a QR factorization of the tangent basis. Growth over the first
    `burn` share of those windows is not counted, so the basis is aligned
    with the Oseledets directions when the sums start.
    """
    if not (t_total > t_transient > 0) or renorm_dt <= 0 or step <= 0 or not 0 <= burn < 1:
        raise InvalidInput("need t_total > t_transient > 0, positive renorm_dt, step and 0 <= burn < 1",
                           t_total=t_total, t_transient=t_transient, burn=burn)
    p = np.asarray(params, dtype=float)
    pd = system.param_dict(p)
    x = np.asarray(x0, dtype=float)
    n = system.dim
    substeps = max(1, int(round(renorm_dt / step)))
    h = renorm_dt / substeps

    windows = int(round(t_transient / renorm_dt))
    for _ in range(windows):
        x = _rk4_state(system, p, x, h, substeps)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
            raise Divergence("trajectory left the bounded region during the transient", bound=bound)

    Y = np.eye(n)
    sums = np.zeros(n)
    windows = int(round((t_total - t_transient) / renorm_dt))
    aligning = int(burn * windows)
    if windows - aligning < 1:
        raise InvalidInput("measured span is shorter than one renormalization window",
                           t_total=t_total, t_transient=t_transient, renorm_dt=renorm_dt)
    for w in range(windows):
        x, Y = _rk4(system, pd, x, Y, h, substeps)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
            raise Divergence("trajectory left the bounded region", bound=bound)
        Q, R = np.linalg.qr(Y)
        d = np.diag(R)
        if w >= aligning:
            sums += np.log(np.abs(d))
        Y = Q * np.sign(d)
    exponents = np.sort(sums / ((windows - aligning) * renorm_dt))[::-1]
    logger.debug("lyapunov spectrum: %s", np.array2string(exponents, precision=5))
    if return_state:
        return exponents, x
    return exponents


def zero_count(exponents, threshold=ZERO_THRESHOLD):
    return int(np.sum(np.abs(exponents) < threshold))


def _sample(system, sweep, value, x0):
    params = dict(sweep.params)
    params[sweep.name] = value
    p = system.param_vector(params)
    exponents, x = lyapunov_spectrum(system, p, x0, sweep.t_transient, sweep.t_total, sweep.renorm_dt,
                                     sweep.step, return_state=True)
    return {'param': float(value), 'exponents': exponents.tolist(),
            'zero_count': zero_count(exponents, sweep.zero_threshold), 'state': x.tolist()}


def sweep(system, spec, progress=True):
    """
    Spectra across the sweep range.

    When following the attractor each sample starts from the final state of
    the previous one, so sweeping up and down exposes hysteresis; otherwise
    every sample starts from x0 and samples may run in parallel.
    """
    if spec.name not in system.param_names:
        raise InvalidInput(f"unknown parameter '{spec.name}' for model {system.name}",
                           parameter=spec.name, known=list(system.param_names))
    x0 = np.asarray(spec.x0 if spec.x0 is not None else system.meta.get('initial_state'), dtype=float)
    values = spec.values()
    samples = []
    if spec.follow:
        state = x0
        for value in tqdm(values, desc=f"lyapunov {spec.name}", disable=not progress):
            sample = _sample(system, spec, value, state)
            state = np.asarray(sample['state'])
            samples.append(sample)
    elif spec.workers > 1:
        # OdeSystem fields are module-level functions, so the system pickles into the worker processes
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_sample, system, spec, value, x0) for value in values]
            samples = [f.result() for f in tqdm(futures, desc=f"lyapunov {spec.name}", disable=not progress)]
    else:
        samples = [_sample(system, spec, value, x0)
                   for value in tqdm(values, desc=f"lyapunov {spec.name}", disable=not progress)]
    spec.samples = samples
    logger.info("sweep of %s over [%g, %g]: zero counts %s", spec.name, spec.low, spec.high,
                [s['zero_count'] for s in samples])
    return samples


def transitions(samples):
    """Parameter midpoints where the zero-exponent count changes"""
    out = []
    for a, b in zip(samples, samples[1:]):
        if a['zero_count'] != b['zero_count']:
            out.append({'param': 0.5 * (a['param'] + b['param']),
                        'from': a['zero_count'], 'to': b['zero_count']})
    return out


def write_sweep_csv(samples, path, name='param'):
    n = len(samples[0]['exponents']) if samples else 0
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow([name] + [f'lambda{i + 1}' for i in range(n)] + ['zero_count'])
        for s in samples:
            writer.writerow([f"{s['param']:.17g}"] + [f"{e:.17g}" for e in s['exponents']] + [s['zero_count']])
