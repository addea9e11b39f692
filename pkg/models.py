"""
Model registry for cycle normal-form analysis
Parameterized ODE systems with exact right-hand sides and multilinear forms
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from errors import InvalidInput
from jets import Jet, taylor_coefficient

logger = logging.getLogger(__name__)

MAX_ORDER = 5


@dataclass(frozen=True)
class OdeSystem:
    """
    Autonomous system dx/dt = f(x, p).

    `field` receives the state as a list of components (arrays or Jets) and a
    name -> value parameter dict, and returns the list of right-hand side
    components. Multilinear forms are exact when `analytic` is set, because
    the field is then evaluated in truncated Taylor arithmetic.
    """
    name: str
    dim: int
    param_names: tuple
    defaults: tuple
    field: Callable
    degree: Optional[int] = None
    analytic: bool = True
    component_names: tuple = ()
    description: str = ''
    meta: dict = field(default_factory=dict, compare=False)

    def param_vector(self, overrides=None):
        p = np.array(self.defaults, dtype=float)
        for key, value in (overrides or {}).items():
            if key not in self.param_names:
                raise InvalidInput(f"unknown parameter '{key}' for model {self.name}",
                                   parameter=key, known=list(self.param_names))
            p[self.param_names.index(key)] = float(value)
        return p

    def param_dict(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (len(self.param_names),):
            raise InvalidInput(f"model {self.name} expects {len(self.param_names)} parameters, got {p.shape}",
                               expected=len(self.param_names))
        return dict(zip(self.param_names, p.tolist()))

    def _components(self, x):
        x = np.asarray(x)
        if x.shape[-1:] != (self.dim,):
            raise InvalidInput(f"model {self.name} has dimension {self.dim}, got state of shape {x.shape}",
                               expected=self.dim, shape=list(x.shape))
        return x

    def rhs(self, x, p):
        x = self._components(x)
        out = self.field([x[..., i] for i in range(self.dim)], self.param_dict(p))
        shape = x.shape[:-1]
        return np.stack([np.broadcast_to(np.asarray(o), shape) for o in out], axis=-1).astype(
            np.result_type(x, float), copy=False)

    def directional(self, k, x, p, w):
        """k-th Taylor coefficient of t -> f(x + t w), i.e. D^k f(x)[w,...,w] / k!"""
        x = self._components(x)
        w = self._components(w)
        pd = self.param_dict(p)
        shape = np.broadcast_shapes(x.shape, w.shape)[:-1]
        if self.analytic:
            jets = [Jet.variable(x[..., i], w[..., i], k) for i in range(self.dim)]
            out = self.field(jets, pd)
            return np.stack([taylor_coefficient(o, k, shape) for o in out], axis=-1)
        return _fd_directional(self, k, x, pd, w)

    def mlf(self, k, x, p, *dirs):
        if not 1 <= k <= MAX_ORDER:
            raise InvalidInput(f"multilinear form order must be in 1..{MAX_ORDER}, got {k}", order=k)
        if len(dirs) != k:
            raise InvalidInput(f"order {k} form needs {k} directions, got {len(dirs)}")
        dirs = [self._components(d) for d in dirs]
        x = self._components(x)
        shape = np.broadcast_shapes(x.shape, *[d.shape for d in dirs])
        dtype = np.result_type(x, *dirs, float)
        if self.degree is not None and k > self.degree:
            return np.zeros(shape, dtype=dtype)
        return polarize(lambda w: self.directional(k, x, p, w), k, dirs)

    def jacobian(self, x, p):
        x = self._components(x)
        eye = np.eye(self.dim)
        cols = [self.directional(1, x, p, eye[j]) for j in range(self.dim)]
        return np.stack(cols, axis=-1)

    def divergence(self, x, p):
        return np.trace(self.jacobian(x, p), axis1=-2, axis2=-1)


def polarize(directional, k, dirs):
    """Symmetric k-linear form from its diagonal via the polarization identity"""
    if k == 1:
        return directional(dirs[0])
    scales = []
    unit = []
    for d in dirs:
        s = np.max(np.abs(d), axis=-1, keepdims=True)
        s = np.where(s > 0, s, 1.0)
        scales.append(s)
        unit.append(d / s)
    total = 0
    for signs in itertools.product((1.0, -1.0), repeat=k - 1):
        eps = (1.0,) + signs
        w = sum(e * u for e, u in zip(eps, unit))
        total = total + np.prod(eps) * directional(w)
    total = total / 2 ** (k - 1)
    for s in scales:
        total = total * s
    return total


def _stencil(k):
    m = (k + 1) // 2
    offsets = np.arange(-m, m + 1, dtype=float)
    V = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[k] = math.factorial(k)
    return offsets, np.linalg.solve(V, rhs)


def _fd_directional(system, k, x, pd, w):
    offsets, weights = _stencil(k)
    scale = np.maximum(1.0, np.max(np.abs(x), axis=-1, keepdims=True))
    h = np.finfo(float).eps ** (1.0 / (k + 2)) * scale
    total = 0
    for off, a in zip(offsets, weights):
        if a == 0:
            continue
        y = x + off * h * w
        out = system.field([y[..., i] for i in range(system.dim)], pd)
        total = total + a * np.stack([np.broadcast_to(np.asarray(o), y.shape[:-1]) for o in out], axis=-1)
    return total / h ** k / math.factorial(k)


def fd_mlf(system, k, x, p, *dirs):
    """Finite-difference polarization of the k-th form, independent of Taylor arithmetic"""
    x = np.asarray(x)
    pd = system.param_dict(p)
    return polarize(lambda w: _fd_directional(system, k, x, pd, np.asarray(w)), k, [np.asarray(d) for d in dirs])


def eval_rhs(system, x, p):
    return system.rhs(x, p)


def eval_mlf(system, order, x, p, dirs):
    return system.mlf(order, x, p, *dirs)


# --- built-in models -------------------------------------------------------

def _hopfcircle(u, p):
    v1, v2 = u
    w = 1 - v1 * v1 - v2 * v2
    return [-p['omega'] * v2 + v1 * w, p['omega'] * v1 + v2 * w]


def _laser(u, p):
    Om, raa, rbb, xab, yab, xac, yac, xcb, ycb = u
    Op = p['Omega_p']
    Dp = p['Delta_p']
    Ra = -0.505 * raa - 0.405 * rbb + 0.45
    Rb = 0.0495 * raa - 0.0505 * rbb + 0.0055
    Dl = p['Delta_cav'] + p['g'] * xab * Om
    D = Dl - Dp
    inv = raa - rbb
    pump = 2 * raa + rbb - 1
    return [
        -0.5 * p['gamma_cav'] * Om - p['g'] * yab,
        Ra + Om * yab + Op * yac,
        Rb - Om * yab,
        -p['gamma1'] * xab + Dl * yab - 0.5 * Op * ycb,
        -p['gamma1'] * yab - Dl * xab - 0.5 * Om * inv + 0.5 * Op * xcb,
        -p['gamma2'] * xac + Dp * yac + 0.5 * Om * ycb,
        -p['gamma2'] * yac - Dp * xac - 0.5 * Op * pump + 0.5 * Om * xcb,
        -p['gamma3'] * xcb + D * ycb - 0.5 * (Om * yac + Op * yab),
        -p['gamma3'] * ycb - D * xcb - 0.5 * (Om * xac - Op * xab),
    ]


def _preypredator(u, p):
    x1, x2, y1, y2, v1, v2 = u
    hx = p['c'] * x1 * x2 / (x1 + p['b1'] * (1 + p['eps'] * v1))
    hy = p['c'] * y1 * y2 / (y1 + p['b2'])
    w = 1 - v1 * v1 - v2 * v2
    return [
        p['r1'] * x1 * (1 - x1) - hx,
        -x2 + hx + p['gamma'] * (y2 - x2),
        p['r2'] * y1 * (1 - y1) - hy,
        -y2 + hy + p['gamma'] * (x2 - y2),
        -v2 + v1 * w,
        v1 + v2 * w,
    ]


def _vibration(u, p):
    x1, x2, v1, v2, y1, y2 = u
    spring = p['Q'] ** 2 * (1 + p['eps'] * y1) * (x1 - x2)
    damper = p['k1'] * (v1 - v2)
    w = 1 - y1 * y1 - y2 * y2
    return [
        v1,
        v2,
        -damper - spring,
        p['M'] * damper + p['M'] * spring - p['k2'] * v2 - x2
        + p['beta'] * p['V'] ** 2 * (1 - p['gamma'] * v2 * v2) * v2,
        -p['eta'] * y2 + y1 * w,
        p['eta'] * y1 + y2 * w,
    ]


def hopfcircle():
    return OdeSystem(
        name='hopfcircle', dim=2, param_names=('omega',), defaults=(1.0,),
        field=_hopfcircle, degree=3, component_names=('v1', 'v2'), meta={'initial_state': (1.0, 0.0)},
        description='planar oscillator with the unit circle as attracting cycle')


def laser():
    return OdeSystem(
        name='laser', dim=9,
        param_names=('Omega_p', 'Delta_cav', 'gamma1', 'gamma2', 'gamma3', 'gamma_cav', 'g', 'Delta_p'),
        defaults=(3.411, -1.819, 0.275, 0.25525, 0.25025, 0.03, 100.0, 0.0),
        field=_laser, degree=3, meta={'initial_state': (0.05, 0.45, 0.35, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)},
        component_names=('Omega_l', 'rho_aa', 'rho_bb', 're_sigma_ab', 'im_sigma_ab',
                         're_sigma_ac', 'im_sigma_ac', 're_sigma_cb', 'im_sigma_cb'),
        description='single-mode inversionless laser with a three-level phaser')


def preypredator():
    return OdeSystem(
        name='preypredator', dim=6,
        param_names=('b2', 'eps', 'r1', 'r2', 'b1', 'gamma', 'c'),
        defaults=(0.277, 0.530, 1.0, 1.0, 0.4, 0.1, 2.0),
        field=_preypredator, degree=None, meta={'initial_state': (0.5, 0.3, 0.5, 0.3, 1.0, 0.0)},
        component_names=('x1', 'x2', 'y1', 'y2', 'v1', 'v2'),
        description='two-patch predator-prey system with seasonal forcing of one patch')


def vibration():
    return OdeSystem(
        name='vibration', dim=6,
        param_names=('k1', 'eta', 'eps', 'k2', 'beta', 'V', 'gamma', 'Q', 'M'),
        defaults=(0.09167, 0.411, 0.1, 0.1, 0.1, math.sqrt(2.1), 4.0, 0.95, 0.2),
        field=_vibration, degree=3, meta={'initial_state': (0.1, 0.0, 0.0, 0.0, 1.0, 0.0)},
        component_names=('x1', 'x2', 'v1', 'v2', 'y1', 'y2'),
        description='two-mass system with flow-induced self excitation and parametric absorber')


def _embedding(kind):
    def factory():
        from oracles import build_embedding
        return build_embedding(kind)
    return factory


_REGISTRY = {
    'hopfcircle': hopfcircle,
    'laser': laser,
    'preypredator': preypredator,
    'vibration': vibration,
    'nf_embed_lpns': _embedding('lpns'),
    'nf_embed_pdns': _embedding('pdns'),
    'nf_embed_nsns': _embedding('nsns'),
}


def register(name, factory):
    _REGISTRY[name] = factory


def available_models():
    return sorted(_REGISTRY)


def get_model(name):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise InvalidInput(f"unknown model '{name}'", model=name, known=available_models()) from None
    return factory()
