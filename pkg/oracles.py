"""
Independent reference computations
Polynomial systems realizing a chosen critical normal form exactly, monodromy
matrices from the variational equation, and the Melnikov coefficient of the
heteroclinic curve by quadrature
"""

import logging
import math

import numpy as np
from scipy.integrate import quad, solve_ivp

from errors import DomainViolation, InvalidCoefficients, NoConvergence
from models import OdeSystem, fd_mlf, register

logger = logging.getLogger(__name__)

PERIOD = 2 * math.pi
KAPPA2 = 2.0 / PERIOD
MAX_PLANTED = 2.0
MIN_DECAY = 5.0

# planted coefficients; complex ones are split into *_re / *_im parameters
PLANTED = {
    'lpns': {
        'a200': 0.5, 'a011': -1.0, 'b110': 0.3 + 0.2j,
        'a300': 0.2, 'a111': -0.3, 'b210': -0.1 + 0.1j, 'b021': 0.4 - 0.2j,
    },
    'pdns': {
        'alpha200': 0.1, 'alpha011': -0.2, 'alpha400': 0.05, 'alpha211': -0.1, 'alpha022': 0.1,
        'a300': -1.0, 'a111': -0.6, 'b210': -0.5 + 0.2j, 'b021': -1.2 + 0.4j,
        'a500': 0.3, 'a311': -0.2, 'a122': 0.1, 'b410': 0.2 - 0.1j, 'b221': -0.3 + 0.1j, 'b032': 0.1 + 0.3j,
    },
    'nsns': {
        'alpha1100': 0.1, 'alpha0011': -0.1, 'alpha2200': 0.05, 'alpha1111': -0.05, 'alpha0022': 0.02,
        'a2100': -1.0 + 0.5j, 'a1011': 0.7, 'b0021': -1.8 - 0.3j, 'b1110': -0.4,
        'a3200': 0.2 + 0.1j, 'a2111': -0.1, 'a1022': 0.3, 'b0032': 0.1 - 0.2j, 'b2210': -0.2, 'b1121': 0.15,
    },
}
OMEGAS = {'lpns': (0.2828,), 'pdns': (0.2828,), 'nsns': (0.41, 0.27)}
COMPLEX = {
    'lpns': ('b110', 'b210', 'b021'),
    'pdns': ('b210', 'b021', 'b410', 'b221', 'b032'),
    'nsns': ('a2100', 'a1011', 'b0021', 'b1110', 'a3200', 'a2111', 'a1022', 'b0032', 'b2210', 'b1121'),
}


def _param_layout(kind, coefficients, omegas, decay):
    names, values = [], []
    for name, value in coefficients.items():
        if name in COMPLEX[kind]:
            names += [f'{name}_re', f'{name}_im']
            values += [complex(value).real, complex(value).imag]
        else:
            if abs(complex(value).imag) > 0:
                raise InvalidCoefficients(f"{name} is a real coefficient", coefficient=name)
            names.append(name)
            values.append(float(np.real(value)))
    names += [f'omega{i + 1}' if len(omegas) > 1 else 'omega' for i in range(len(omegas))]
    values += list(omegas)
    names += ['beta1', 'beta2', 'decay']
    values += [0.0, 0.0, decay]
    return tuple(names), tuple(values)


def _cplx(p, name):
    return p[f'{name}_re'], p[f'{name}_im']


def _cmul(a, b):
    """(a_re + i a_im)(b_re + i b_im) on pairs that may hold Jets"""
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _circle(u, g, decay):
    x, y = u[0], u[1]
    radial = decay * (1 - x * x - y * y)
    return -y * g + x * radial, x * g + y * radial


def _rotation(p, q, rate, g):
    """g * rate * (p + i q) with rate = (re, im)"""
    re, im = _cmul(rate, (p, q))
    return g * re, g * im


def _lpns_field(u, p):
    x, y, s, pp, qq = u[:5]
    z2 = (pp * pp + qq * qq) / KAPPA2
    g = 1 - s
    ds = g * (p['beta1'] * s + p['a200'] * s * s + p['a011'] * z2 + p['a300'] * s * s * s + p['a111'] * s * z2)
    b110, b210, b021 = _cplx(p, 'b110'), _cplx(p, 'b210'), _cplx(p, 'b021')
    rate = (p['beta2'] + b110[0] * s + b210[0] * s * s + b021[0] * z2,
            p['omega'] + b110[1] * s + b210[1] * s * s + b021[1] * z2)
    dp, dq = _rotation(pp, qq, rate, g)
    return [*_circle(u, g, p['decay']), ds, dp, dq] + [-p['decay'] * w for w in u[5:]]


def _pdns_field(u, p):
    x, y, w1, w2, pp, qq = u[:6]
    # projector onto the half-angle direction (cos tau/2, sin tau/2) on the unit circle
    pw1 = 0.5 * ((1 + x) * w1 + y * w2)
    pw2 = 0.5 * (y * w1 + (1 - x) * w2)
    x1 = PERIOD * (w1 * pw1 + w2 * pw2)
    z2 = (pp * pp + qq * qq) / KAPPA2
    g = (1 + p['alpha200'] * x1 + p['alpha011'] * z2 + p['alpha400'] * x1 * x1
         + p['alpha211'] * x1 * z2 + p['alpha022'] * z2 * z2)
    Q = (p['beta1'] + p['a300'] * x1 + p['a111'] * z2 + p['a500'] * x1 * x1
         + p['a311'] * x1 * z2 + p['a122'] * z2 * z2)
    lam = p['decay']
    dw1 = g * (Q * pw1 - 0.5 * w2) - lam * (w1 - pw1)
    dw2 = g * (Q * pw2 + 0.5 * w1) - lam * (w2 - pw2)
    b = {n: _cplx(p, n) for n in COMPLEX['pdns']}
    rate = tuple((p['beta2'] if k == 0 else p['omega'])
                 + b['b210'][k] * x1 + b['b021'][k] * z2 + b['b410'][k] * x1 * x1
                 + b['b221'][k] * x1 * z2 + b['b032'][k] * z2 * z2 for k in (0, 1))
    dp, dq = _rotation(pp, qq, rate, g)
    return [*_circle(u, g, p['decay']), dw1, dw2, dp, dq] + [-lam * w for w in u[6:]]


def _nsns_field(u, p):
    x, y, p1, q1, p2, q2 = u[:6]
    z1 = (p1 * p1 + q1 * q1) / KAPPA2
    z2 = (p2 * p2 + q2 * q2) / KAPPA2
    g = (1 + p['alpha1100'] * z1 + p['alpha0011'] * z2 + p['alpha2200'] * z1 * z1
         + p['alpha1111'] * z1 * z2 + p['alpha0022'] * z2 * z2)
    c = {n: _cplx(p, n) for n in COMPLEX['nsns']}
    rate1 = tuple((p['beta1'] if k == 0 else p['omega1'])
                  + c['a2100'][k] * z1 + c['a1011'][k] * z2 + c['a3200'][k] * z1 * z1
                  + c['a2111'][k] * z1 * z2 + c['a1022'][k] * z2 * z2 for k in (0, 1))
    rate2 = tuple((p['beta2'] if k == 0 else p['omega2'])
                  + c['b1110'][k] * z1 + c['b0021'][k] * z2 + c['b2210'][k] * z1 * z1
                  + c['b1121'][k] * z1 * z2 + c['b0032'][k] * z2 * z2 for k in (0, 1))
    dp1, dq1 = _rotation(p1, q1, rate1, g)
    dp2, dq2 = _rotation(p2, q2, rate2, g)
    return [*_circle(u, g, p['decay']), dp1, dq1, dp2, dq2] + [-p['decay'] * w for w in u[6:]]


FIELDS = {'lpns': (_lpns_field, 5), 'pdns': (_pdns_field, 6), 'nsns': (_nsns_field, 6)}


def build_embedding(kind, coefficients=None, decay=MIN_DECAY, omegas=None, n_stable=1, name=None):
    """
    Polynomial system whose flow on the flat centre manifold is exactly the
    critical normal form of `kind` with the planted coefficients.

    The cycle is the unit circle in the first two coordinates with period
    2*pi; beta1 and beta2 unfold the two critical multipliers and are zero
    at the codim-2 point. Passing `name` also registers the system.
    """
    kind = kind.lower()
    if kind not in FIELDS:
        raise InvalidCoefficients(f"no embedding for kind '{kind}'", kind=kind)
    planted = dict(PLANTED[kind])
    for key, value in (coefficients or {}).items():
        if key not in planted:
            raise InvalidCoefficients(f"'{key}' is not a {kind.upper()} coefficient", coefficient=key,
                                      known=sorted(planted))
        planted[key] = value
    too_large = {k: abs(v) for k, v in planted.items() if abs(v) > MAX_PLANTED}
    if too_large:
        raise InvalidCoefficients("planted coefficients must not exceed 2 in modulus", **too_large)
    if decay < MIN_DECAY:
        raise InvalidCoefficients("decay rate of the stable directions must be at least 5", decay=decay)
    omegas = tuple(omegas or OMEGAS[kind])
    if any(not 0 < w < 0.5 for w in omegas) or (len(omegas) == 2 and omegas[0] <= omegas[1]):
        raise InvalidCoefficients("frequencies must lie in (0, 0.5), ordered decreasing", omegas=list(omegas))
    field, core = FIELDS[kind]
    names, values = _param_layout(kind, planted, omegas, decay)
    initial = (1.0, 0.0) + (0.0,) * (core - 2 + n_stable)
    system = OdeSystem(
        name=name or f'nf_embed_{kind}', dim=core + n_stable, param_names=names, defaults=values,
        field=field, degree=None, meta={'initial_state': initial, 'planted': planted, 'omegas': omegas},
        description=f'flat embedding of the {kind.upper()} critical normal form')
    if name:
        register(name, lambda: system)
    return system


def planted_coefficients(system):
    return dict(system.meta.get('planted', {}))


def embedding_orbit(system, params=None, mesh=None):
    """The exact critical cycle of an embedding as a PeriodicOrbit"""
    from collocation import Mesh, MeshFunction
    from cycle import PeriodicOrbit
    mesh = mesh or Mesh()
    p = system.param_vector(params)
    n = system.dim

    def state(tau):
        u = np.zeros(n)
        u[0], u[1] = math.cos(tau), math.sin(tau)
        return u
    profile = MeshFunction.from_callable(mesh, PERIOD, state)
    return PeriodicOrbit(system.name, profile, p, 0.0)


# --- monodromy --------------------------------------------------------------

def monodromy_by_integration(system, orbit, rtol=1e-12, atol=1e-12):
    """Y(T) of dY/dt = A(x(t)) Y, Y(0) = I, integrated together with the orbit"""
    n = system.dim
    p = orbit.params
    x0 = np.asarray(orbit.profile.values[0], dtype=float)

    def rhs(t, z):
        x = z[:n]
        Y = z[n:].reshape(n, n)
        return np.concatenate([system.rhs(x, p), (system.jacobian(x, p) @ Y).ravel()])

    z0 = np.concatenate([x0, np.eye(n).ravel()])
    sol = solve_ivp(rhs, (0.0, orbit.period), z0, method='DOP853', rtol=rtol, atol=atol)
    if not sol.success:
        raise NoConvergence("variational equation integration failed", message=sol.message)
    drift = float(np.linalg.norm(sol.y[:n, -1] - x0))
    logger.debug("variational integration: %d steps, orbit closure %.2e", sol.t.size, drift)
    return sol.y[n:, -1].reshape(n, n)


def fd_tensor(system, k, x, p, *dirs):
    """k-th multilinear form by finite-difference polarization"""
    return fd_mlf(system, k, x, p, *dirs)


# --- Melnikov ---------------------------------------------------------------

def beta_integral(a, b):
    """I_{a,b}: integral over [0, 1] of (1-x)^a x^b by algebraic-weight quadrature"""
    value, err = quad(lambda x: 1.0, 0.0, 1.0, weight='alg', wvar=(b, a), epsabs=1e-14, epsrel=1e-13)
    return value


def melnikov_numeric(theta, delta, Theta, Delta):
    """
    Quadratic coefficient c2 of the heteroclinic curve from M(0) = 0.

    The Melnikov integral of g1 dy - g2 dx is taken along the level set
    H = 0, y = (delta-1)/(theta-1) (1-x), and is linear in c2.
    """
    if not (theta < 0 and delta < 0 and delta * theta - 1 > 0):
        raise DomainViolation("Melnikov integral needs theta, delta < 0 and theta*delta > 1",
                              theta=theta, delta=delta)
    D = delta * theta - 1
    p = (1 - delta) / D
    q = (1 - theta) / D
    k = (delta - 1) / (theta - 1)
    j0 = beta_integral(q, p - 1)
    j1 = beta_integral(q + 1, p)
    j2 = beta_integral(q, p + 1)
    return -(Theta * k * k * j1 + Delta * j2) / j0
