"""
Codim-2 cycle point locator
Broyden iteration in two parameters on Floquet-multiplier test functions,
with multiplier tracking and non-resonance guards
"""

import logging
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from cycle import PeriodicOrbit, floquet, newton_cycle, orbit_from_simulation, spectrum_from_multipliers
from errors import (AmbiguousPairing, CriticalityCheckFailed, InvalidInput, NoConvergence,
                    ResonanceGuardTripped)

logger = logging.getLogger(__name__)

KINDS = ('LPNS', 'PDNS', 'NSNS')
ROLES = {'LPNS': ('fold', 'ns'), 'PDNS': ('pd', 'ns'), 'NSNS': ('ns1', 'ns2')}

LOCATOR_TOL = 1e-8
LOCATOR_MAXIT = 30
RESONANCE_TOL = 1e-3
TIE_TOL = 1e-12
IMAG_TOL = 1e-8
SCHEMA_VERSION = 1


def normalize_kind(kind):
    k = str(kind).upper()
    if k not in KINDS:
        raise InvalidInput(f"unknown bifurcation kind '{kind}'", kind=kind, known=list(KINDS))
    return k


@dataclass(frozen=True, eq=False)
class Codim2Point:
    kind: str
    orbit: PeriodicOrbit
    omega: tuple
    test_residuals: tuple
    free_params: tuple = ()
    multipliers: tuple = ()
    iterations: int = 0

    @property
    def omega1(self):
        return self.omega[0]

    @property
    def omega2(self):
        return self.omega[1] if len(self.omega) > 1 else None

    @property
    def theta(self):
        return tuple(w * self.orbit.period for w in self.omega)

    def to_dict(self, system=None):
        return {
            'schema_version': SCHEMA_VERSION,
            'kind': self.kind,
            'free_params': list(self.free_params),
            'omega': [float(w) for w in self.omega],
            'test_residuals': [float(g) for g in self.test_residuals],
            'multipliers': [[float(m.real), float(m.imag)] for m in self.multipliers],
            'iterations': int(self.iterations),
            'orbit': self.orbit.to_dict(system),
        }

    @classmethod
    def from_dict(cls, d, system=None):
        try:
            orbit = PeriodicOrbit.from_dict(d['orbit'], system)
            return cls(
                kind=normalize_kind(d['kind']),
                orbit=orbit,
                omega=tuple(float(w) for w in d['omega']),
                test_residuals=tuple(float(g) for g in d.get('test_residuals', ())),
                free_params=tuple(d.get('free_params', ())),
                multipliers=tuple(complex(re, im) for re, im in d.get('multipliers', ())),
                iterations=int(d.get('iterations', 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"malformed point document: {e}") from None


def multiplier_matching(previous, current):
    """
    Greedy nearest-neighbour pairing of two multiplier sets.

    Returns pairing with pairing[i] the index in current matched to
    previous[i]. Both arguments may be FloquetSpectrum objects or arrays.
    """
    prev = np.asarray(getattr(previous, 'multipliers', previous), dtype=complex)
    cur = np.asarray(getattr(current, 'multipliers', current), dtype=complex)
    if prev.shape != cur.shape:
        raise InvalidInput("spectra of different dimension cannot be paired", previous=len(prev), current=len(cur))
    dist = np.abs(prev[:, None] - cur[None, :])
    pairing = [-1] * len(prev)
    free_prev = set(range(len(prev)))
    free_cur = set(range(len(cur)))
    while free_prev:
        rows = sorted(free_prev)
        cols = sorted(free_cur)
        sub = dist[np.ix_(rows, cols)]
        a, b = np.unravel_index(np.argmin(sub), sub.shape)
        i, j = rows[a], cols[b]
        best = sub[a, b]
        for k in np.flatnonzero(sub[a] - best <= TIE_TOL):
            if abs(cur[cols[k]] - cur[j]) > TIE_TOL:
                raise AmbiguousPairing("two current multipliers tie for one previous multiplier",
                                       previous=complex(prev[i]), candidates=[complex(cur[j]), complex(cur[cols[k]])])
        for k in np.flatnonzero(sub[:, b] - best <= TIE_TOL):
            if abs(prev[rows[k]] - prev[i]) > TIE_TOL:
                raise AmbiguousPairing("two previous multipliers tie for one current multiplier",
                                       current=complex(cur[j]), candidates=[complex(prev[i]), complex(prev[rows[k]])])
        pairing[i] = j
        free_prev.discard(i)
        free_cur.discard(j)
    return pairing


def _ns_candidates(spectrum, exclude=()):
    mu = spectrum.multipliers
    return [i for i in range(len(mu))
            if i != spectrum.trivial_index and i not in exclude and mu[i].imag > IMAG_TOL]


def select_critical(kind, spectrum):
    """Indices of the multipliers the test functions of `kind` act on, by role"""
    kind = normalize_kind(kind)
    mu = spectrum.multipliers
    others = [i for i in range(len(mu)) if i != spectrum.trivial_index]
    if not others:
        raise InvalidInput("spectrum has no non-trivial multipliers")
    if kind == 'NSNS':
        cand = sorted(_ns_candidates(spectrum), key=lambda i: abs(abs(mu[i]) - 1.0))[:2]
        if len(cand) < 2:
            raise NoConvergence("fewer than two complex multiplier pairs for NSNS test functions")
        cand.sort(key=lambda i: -np.angle(mu[i]))
        return {'ns1': cand[0], 'ns2': cand[1]}
    if kind == 'LPNS':
        first = min(others, key=lambda i: abs(mu[i] - 1.0))
    else:
        first = min(others, key=lambda i: abs(mu[i] + 1.0))
    exclude = {first}
    # a complex partner of the fold multiplier is not a Neimark-Sacker candidate
    for i in others:
        if abs(mu[i] - np.conj(mu[first])) < 1e-12 and i != first:
            exclude.add(i)
    ns = sorted(_ns_candidates(spectrum, exclude), key=lambda i: abs(abs(mu[i]) - 1.0))
    if not ns:
        raise NoConvergence("no complex multiplier pair for the Neimark-Sacker test function")
    return {ROLES[kind][0]: first, 'ns': ns[0]}


def test_functions(kind, spectrum, indices):
    kind = normalize_kind(kind)
    mu = spectrum.multipliers
    if kind == 'NSNS':
        return np.array([abs(mu[indices['ns1']]) - 1.0, abs(mu[indices['ns2']]) - 1.0])
    first = mu[indices[ROLES[kind][0]]]
    if kind == 'LPNS':
        # near-1 cluster sum stays real when the pair collides; its signed
        # square is linear in the distance to the fold of cycles
        s = (mu[spectrum.trivial_index] + first).real - 2.0
        g1 = s * abs(s)
    else:
        g1 = first.real + 1.0
    return np.array([g1, abs(mu[indices['ns']]) - 1.0])


def frequencies(kind, spectrum, indices, period):
    """omega = arg(mu)/T on the branch Im(mu) > 0"""
    roles = ('ns1', 'ns2') if normalize_kind(kind) == 'NSNS' else ('ns',)
    out = []
    for r in roles:
        mu = spectrum.multipliers[indices[r]]
        out.append(float(np.angle(mu)) / period)
    return tuple(out)


def resonance_guard(kind, thetas, tol=RESONANCE_TOL):
    """Raise ResonanceGuardTripped if the critical angles sit on a strong resonance"""
    kind = normalize_kind(kind)
    orders = range(1, 7) if kind == 'NSNS' else range(1, 5)
    for theta in thetas:
        if not 0.0 < theta < np.pi:
            raise ResonanceGuardTripped("critical angle outside (0, pi)", theta=float(theta))
        for j in orders:
            if abs(theta - 2 * np.pi / j) < tol:
                raise ResonanceGuardTripped(f"critical angle is resonant with 2*pi/{j}", theta=float(theta), j=j)
    if kind == 'NSNS':
        t1, t2 = thetas
        for l in range(1, 4):
            for j in range(1, 5 - l):
                if abs(l * t1 - j * t2) < tol:
                    raise ResonanceGuardTripped(f"{l}*theta1 = {j}*theta2", theta1=float(t1), theta2=float(t2))


def _track(kind, previous, current, indices):
    try:
        pairing = multiplier_matching(previous, current)
    except AmbiguousPairing:
        # a complex pair splitting on the real axis; fall back to the role rules
        logger.debug("ambiguous multiplier pairing, reselecting critical multipliers")
        return select_critical(kind, current)
    return {role: pairing[i] for role, i in indices.items()}


class _Evaluator:
    """Cycle + Floquet + test functions at a parameter vector, warm-started"""

    def __init__(self, system, kind, base, slots, mesh, newton_tol, critical_tol):
        self.system = system
        self.kind = kind
        self.base = base
        self.slots = slots
        self.mesh = mesh
        self.newton_tol = newton_tol
        self.critical_tol = critical_tol
        self.count = 0

    def params(self, values):
        p = self.base.copy()
        p[self.slots] = values
        return p

    def __call__(self, values, orbit, spectrum=None, indices=None):
        self.count += 1
        new_orbit = newton_cycle(self.system, self.params(values), orbit, mesh=self.mesh, tol=self.newton_tol)
        new_spectrum = floquet(self.system, new_orbit, self.critical_tol)
        if indices is None:
            new_indices = select_critical(self.kind, new_spectrum)
        else:
            new_indices = _track(self.kind, spectrum, new_spectrum, indices)
        g = test_functions(self.kind, new_spectrum, new_indices)
        return new_orbit, new_spectrum, new_indices, g


def locate(system, kind, at, params=None, guess=None, x0=None, mesh=None, tol=LOCATOR_TOL,
           maxit=LOCATOR_MAXIT, newton_tol=1e-10, critical_tol=1e-2, fd_step=1e-4,
           resonance_tol=RESONANCE_TOL, progress=False):
    """
    Pin a codim-2 point in the two parameters named in `at`.

    at maps two parameter names to starting values; params holds name
    overrides for the remaining parameters. The starting cycle is `guess`
    (a PeriodicOrbit) or is seeded by simulation from x0.
    """
    kind = normalize_kind(kind)
    if len(at) != 2:
        raise InvalidInput("locate needs exactly two free parameters", given=list(at))
    base = system.param_vector(params)
    base = system.param_vector({**system.param_dict(base), **at})
    slots = [system.param_names.index(name) for name in at]
    values = base[slots].copy()

    if guess is None:
        if x0 is None:
            x0 = system.meta.get('initial_state')
        if x0 is None:
            raise InvalidInput(f"model {system.name} needs a guess orbit or an initial state")
        guess = orbit_from_simulation(system, base, x0, mesh=mesh)
    evaluate = _Evaluator(system, kind, base, slots, mesh, newton_tol, critical_tol)
    orbit, spectrum, indices, g = evaluate(values, guess)
    logger.debug("locator start: %s, g = %s", values, g)

    iteration = 0
    J = None
    bar = tqdm(total=maxit, desc=f"locate {kind}", disable=not progress, leave=False)
    try:
        while np.max(np.abs(g)) >= tol:
            if iteration == maxit:
                raise NoConvergence(f"{kind} locator did not converge", iterations=maxit,
                                    residuals=g.tolist(), params=values.tolist())
            if J is None:
                J = np.zeros((2, 2))
                for k in range(2):
                    h = fd_step * max(1.0, abs(values[k]))
                    shifted = values.copy()
                    shifted[k] += h
                    _, _, _, gk = evaluate(shifted, orbit, spectrum, indices)
                    J[:, k] = (gk - g) / h
            try:
                step = -np.linalg.solve(J, g)
            except np.linalg.LinAlgError:
                raise NoConvergence("singular test-function Jacobian", jacobian=J.tolist()) from None

            lam = 1.0
            while True:
                try:
                    trial = evaluate(values + lam * step, orbit, spectrum, indices)
                    break
                except NoConvergence:
                    lam *= 0.5
                    logger.debug("cycle failed, halving locator step to %.3g", lam)
                    if lam < 1e-4:
                        raise
            dp = lam * step
            new_orbit, new_spectrum, new_indices, new_g = trial
            J = J + np.outer(new_g - g - J @ dp, dp) / (dp @ dp)
            values = values + dp
            orbit, spectrum, indices, g = new_orbit, new_spectrum, new_indices, new_g
            iteration += 1
            bar.update(1)
            logger.debug("locator %d: params %s, g = %s", iteration, values, g)
    finally:
        bar.close()

    omega = frequencies(kind, spectrum, indices, orbit.period)
    resonance_guard(kind, [w * orbit.period for w in omega], resonance_tol)
    logger.info("%s point located after %d iterations (%d cycle solves): %s", kind, iteration,
                evaluate.count, dict(zip(at, values.tolist())))
    return Codim2Point(kind, orbit, omega, tuple(float(x) for x in g), tuple(at),
                       tuple(spectrum.multipliers), iteration)


def verify_point(system, point, tol=1e-6):
    """Recompute the test functions at a stored point; raise CriticalityCheckFailed when off"""
    spectrum = floquet(system, point.orbit)
    indices = select_critical(point.kind, spectrum)
    g = test_functions(point.kind, spectrum, indices)
    if np.max(np.abs(g)) > tol:
        raise CriticalityCheckFailed(f"point is not a {point.kind} point: test functions {g.tolist()}",
                                     residuals=g.tolist(), tol=tol)
    return g


def spectrum_of_point(point):
    return spectrum_from_multipliers(point.multipliers)
