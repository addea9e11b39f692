"""
Critical normal forms of codim-2 cycle bifurcations
Eigenfunctions, centre-manifold terms and normal-form coefficients for LPNS,
PDNS and NSNS points from the periodic homological equation, with every
linear problem solved as a bordered collocation BVP on [0, T]
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from bvp import CONDITION_LIMIT, KERNEL_RATIO, BorderedSystem, kernel_function, normalize_pair, normalize_self
from collocation import MeshFunction, assemble_operator, inner_product
from cycle import orbit_jacobians
from errors import DependencyMissing, InvalidInput
from locator import normalize_kind

logger = logging.getLogger(__name__)

BORDER_TOL = 1e-8
DOTTED_TOL = 1e-6
ORDERS = {'LPNS': (2, 3), 'PDNS': (3, 5), 'NSNS': (3, 5)}
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Layout:
    """
    Coordinates of one critical normal form.

    Variables are the transverse coordinates and their conjugates, in the
    index order of the h_ijk / h_ijkl subscripts. `equations` lists the
    monomials present in dxi/dtau for the canonical variables, `tau` those
    of dtau/dt; `tau_free` marks kinds whose tau-coefficients are left
    undetermined by the homological equation and set to zero.
    """
    kind: str
    conj: tuple
    freq: tuple
    parity: tuple
    eig: tuple
    adj: tuple
    prefixes: dict
    equations: dict
    tau: tuple
    tau_fixed: dict = field(default_factory=dict)
    tau_free: bool = False
    derived: dict = field(default_factory=dict)

    @property
    def nvar(self):
        return len(self.conj)

    def conjugate(self, m):
        return tuple(m[self.conj[i]] for i in range(self.nvar))

    def unit(self, var):
        return tuple(1 if i == var else 0 for i in range(self.nvar))

    def shift_vector(self, m):
        return tuple(int(sum(e * f[j] for e, f in zip(m, self.freq))) for j in range(len(self.freq[0])))

    def monomial_parity(self, m):
        return int(np.prod([p ** e for p, e in zip(self.parity, m)]))

    def name(self, eq, m):
        return self.prefixes[eq] + ''.join(str(e) for e in m)


LAYOUTS = {
    'LPNS': Layout(
        kind='LPNS', conj=(0, 2, 1), freq=((0,), (1,), (-1,)), parity=(1, 1, 1),
        eig=(('v1', False), ('v2', False), ('v2', True)),
        adj=(('phi_star', False), ('v2_star', False), ('v2_star', True)),
        prefixes={'tau': 'alpha', 0: 'a', 1: 'b'},
        equations={0: ((2, 0, 0), (0, 1, 1), (3, 0, 0), (1, 1, 1)),
                   1: ((1, 1, 0), (2, 1, 0), (0, 2, 1))},
        tau=((2, 0, 0), (0, 1, 1)),
        tau_fixed={(1, 0, 0): -1.0},
        tau_free=True),
    'PDNS': Layout(
        kind='PDNS', conj=(0, 2, 1), freq=((0,), (1,), (-1,)), parity=(-1, 1, 1),
        eig=(('v1', False), ('v2', False), ('v2', True)),
        adj=(('v1_star', False), ('v2_star', False), ('v2_star', True)),
        prefixes={'tau': 'alpha', 0: 'a', 1: 'b'},
        equations={0: ((3, 0, 0), (1, 1, 1), (5, 0, 0), (3, 1, 1), (1, 2, 2)),
                   1: ((2, 1, 0), (0, 2, 1), (4, 1, 0), (2, 2, 1), (0, 3, 2))},
        tau=((2, 0, 0), (0, 1, 1), (4, 0, 0), (2, 1, 1), (0, 2, 2))),
    'NSNS': Layout(
        kind='NSNS', conj=(1, 0, 3, 2), freq=((1, 0), (-1, 0), (0, 1), (0, -1)), parity=(1, 1, 1, 1),
        eig=(('v1', False), ('v1', True), ('v2', False), ('v2', True)),
        adj=(('v1_star', False), ('v1_star', True), ('v2_star', False), ('v2_star', True)),
        prefixes={'tau': 'alpha', 0: 'a', 2: 'b'},
        equations={0: ((2, 1, 0, 0), (1, 0, 1, 1), (3, 2, 0, 0), (2, 1, 1, 1), (1, 0, 2, 2)),
                   2: ((0, 0, 2, 1), (1, 1, 1, 0), (0, 0, 3, 2), (2, 2, 1, 0), (1, 1, 2, 1))},
        tau=((1, 1, 0, 0), (0, 0, 1, 1), (2, 2, 0, 0), (1, 1, 1, 1), (0, 0, 2, 2)),
        derived={'b1101': (3, (1, 1, 0, 1)), 'a0111': (1, (0, 1, 1, 1))}),
}


def _factorial(m):
    return math.prod(math.factorial(e) for e in m)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    d = tuple(x - y for x, y in zip(a, b))
    return d if min(d) >= 0 else None


def _sub_indices(m):
    return [b for b in itertools.product(*[range(e, -1, -1) for e in m]) if any(b)]


def _splits(m, k, upper=None):
    """Non-increasing k-tuples of non-zero multi-indices summing to m"""
    if k == 1:
        if upper is None or m <= upper:
            yield (m,)
        return
    for part in _sub_indices(m):
        if upper is not None and part > upper:
            continue
        rest = _sub(m, part)
        if not any(rest):
            continue
        for tail in _splits(rest, k - 1, part):
            yield (part,) + tail


def label(m):
    return 'h' + ''.join(str(e) for e in m)


# --- result types -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenfunctionBundle:
    kind: str
    u0: MeshFunction
    f0: MeshFunction
    v1: MeshFunction
    v2: MeshFunction
    phi_star: MeshFunction
    v1_star: MeshFunction
    v2_star: MeshFunction
    omega: float
    omega2: Optional[float] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def period(self):
        return self.u0.period

    @property
    def omegas(self):
        return (self.omega,) if self.omega2 is None else (self.omega, self.omega2)

    def function(self, spec):
        name, conjugate = spec
        f = getattr(self, name)
        return f.conj() if conjugate else f


@dataclass(frozen=True, eq=False)
class CenterManifoldTerms:
    kind: str
    terms: dict
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, index):
        return self.terms[tuple(index)]

    def __contains__(self, index):
        return tuple(index) in self.terms

    def __len__(self):
        return len(self.terms)

    def indices(self):
        return sorted(self.terms, key=lambda m: (sum(m), tuple(-e for e in m)))

    def to_dict(self):
        return {label(m): {'parity': self.terms[m].parity,
                           'l2_norm': float(np.sqrt(abs(inner_product(self.terms[m], self.terms[m])))),
                           **self.diagnostics.get(label(m), {})}
                for m in self.indices()}


@dataclass(frozen=True, eq=False)
class NormalFormReport:
    kind: str
    coefficients: dict
    order_computed: int
    omega: tuple
    period: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, name):
        return self.coefficients[name]

    def get(self, name, default=None):
        return self.coefficients.get(name, default)

    def real(self, name):
        value = self.coefficients.get(name)
        return float('nan') if value is None else float(np.real(value))

    def to_dict(self):
        return {
            'schema_version': SCHEMA_VERSION,
            'kind': self.kind,
            'order_computed': int(self.order_computed),
            'omega': [float(w) for w in self.omega],
            'period': float(self.period),
            'coefficients': {k: [float(np.real(v)), float(np.imag(v))] for k, v in self.coefficients.items()},
            'diagnostics': self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                kind=normalize_kind(d['kind']),
                coefficients={k: complex(re, im) for k, (re, im) in d['coefficients'].items()},
                order_computed=int(d['order_computed']),
                omega=tuple(float(w) for w in d['omega']),
                period=float(d['period']),
                diagnostics=d.get('diagnostics', {}),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInput(f"malformed normal-form report: {e}") from None


# --- eigenfunctions ---------------------------------------------------------

def _residual(op, f):
    return float(np.max(np.abs(op.apply(f))))


def build_eigenbundle(system, point, kernel_ratio=KERNEL_RATIO, condition_limit=CONDITION_LIMIT):
    """Eigenfunctions, generalized eigenfunction and adjoints of the critical cycle"""
    kind = normalize_kind(point.kind)
    orbit = point.orbit
    mesh, T = orbit.mesh, orbit.period
    A = orbit_jacobians(system, orbit)
    At = -np.swapaxes(A, -1, -2)
    f0 = MeshFunction(mesh, system.rhs(orbit.profile.values, orbit.params), T)

    def L(shift=0.0):
        return assemble_operator(mesh, T, A, shift)

    def Ladj(shift=0.0):
        return assemble_operator(mesh, T, At, shift)

    def kernel(op, boundary='periodic'):
        h, sigma = kernel_function(op, boundary, kernel_ratio)
        diag.setdefault('kernel_sigma', []).append([float(s) for s in sigma])
        return h

    diag = {}
    omega2 = None
    if kind == 'LPNS':
        omega = point.omega[0]
        phi = kernel(Ladj())
        sol = BorderedSystem(L(), 'periodic', [f0], [phi], condition_limit).solve(f0)
        v1 = sol.h
        diag['v1_border'] = abs(sol.border_multiplier)
        phi = normalize_pair(phi, v1)
        diag['phi_f_orthogonality'] = abs(inner_product(phi, f0))
        v2 = normalize_self(kernel(L(1j * omega)))
        sol = BorderedSystem(Ladj(), 'periodic', [v1], [f0], condition_limit).solve(-phi)
        v1_star = sol.h
        diag['v1_star_border'] = abs(sol.border_multiplier)
        v2_star = normalize_pair(kernel(Ladj(1j * omega)), v2)
        diag['v1_star_f'] = abs(inner_product(v1_star, f0))
    elif kind == 'PDNS':
        omega = point.omega[0]
        v1 = normalize_self(kernel(L(), 'antiperiodic'))
        phi = normalize_pair(kernel(Ladj()), f0)
        v1_star = normalize_pair(kernel(Ladj(), 'antiperiodic'), v1)
        v2 = normalize_self(kernel(L(1j * omega)))
        v2_star = normalize_pair(kernel(Ladj(1j * omega)), v2)
    else:
        omega, omega2 = point.omega[0], point.omega[1]
        if omega <= omega2:
            raise InvalidInput("NSNS frequencies must be ordered omega1 > omega2", omega1=omega, omega2=omega2)
        v1 = normalize_self(kernel(L(1j * omega)))
        v2 = normalize_self(kernel(L(1j * omega2)))
        phi = normalize_pair(kernel(Ladj()), f0)
        v1_star = normalize_pair(kernel(Ladj(1j * omega)), v1)
        v2_star = normalize_pair(kernel(Ladj(1j * omega2)), v2)

    shift1 = 1j * omega if kind == 'NSNS' else 0.0
    shift2 = 1j * (omega2 if kind == 'NSNS' else omega)
    residuals = {
        'v2': _residual(L(shift2), v2),
        'phi_star': _residual(Ladj(), phi),
        'v2_star': _residual(Ladj(shift2), v2_star),
    }
    if kind == 'LPNS':
        residuals['v1'] = float(np.max(np.abs(L().apply(v1) - f0.at_colloc())))
        residuals['v1_star'] = float(np.max(np.abs(Ladj().apply(v1_star) + phi.at_colloc())))
    else:
        residuals['v1'] = _residual(L(shift1), v1)
        residuals['v1_star'] = _residual(Ladj(shift1), v1_star)
    diag['residuals'] = residuals
    logger.debug("eigenfunction residuals: %s", residuals)
    return EigenfunctionBundle(kind, orbit.profile, f0, v1, v2, phi, v1_star, v2_star, float(omega),
                               None if omega2 is None else float(omega2), diag)


# --- homological equation ---------------------------------------------------

class _Points:
    """Cycle data sampled at the collocation or quadrature points"""

    def __init__(self, system, orbit, where):
        self.where = where
        profile = orbit.profile
        self.u = profile.at_colloc() if where == 'colloc' else profile.at_quad()
        self.du = system.rhs(self.u, orbit.params)
        self.A = system.jacobian(self.u, orbit.params)
        self.count = self.u.shape[0]


def _sample(f, where):
    if where == 'colloc':
        return f.at_colloc(), f.deriv_colloc()
    return f.at_quad(), f.deriv_quad()


class HomologicalSolver:
    """
    Order-by-order solution of the periodic homological equation.

    The centre manifold is u0 + sum of xi^m h_m / m! and the reduced flow is
    dtau/dt = sum t_a xi^a, dxi_j/dtau = sum g_j,a xi^a. Collecting the
    xi^m terms gives h_m' - A h_m + s_m h_m = R_m, where the unknown
    coefficients of degree |m| enter R_m linearly and are fixed by the
    solvability condition against the matching adjoint function.
    """

    def __init__(self, system, point, bundle, condition_limit=CONDITION_LIMIT, border_tol=BORDER_TOL):
        self.system = system
        self.layout = LAYOUTS[normalize_kind(point.kind)]
        self.bundle = bundle
        self.orbit = point.orbit
        self.params = point.orbit.params
        self.mesh = point.orbit.mesh
        self.T = point.orbit.period
        self.n = system.dim
        self.condition_limit = condition_limit
        self.border_tol = border_tol
        self.points = {w: _Points(system, self.orbit, w) for w in ('colloc', 'quad')}
        self.quad_weights = self.mesh.quad[1]
        lay = self.layout
        nvar = lay.nvar
        self.zero = (0,) * nvar
        self.eig = [bundle.function(lay.eig[v]) for v in range(nvar)]
        self.adj = [bundle.function(lay.adj[v]) for v in range(nvar)]
        self.lam = [1j * float(np.dot(lay.freq[v], bundle.omegas)) for v in range(nvar)]

        self.t = {self.zero: 1.0 + 0j}
        self.t.update({m: complex(c) for m, c in lay.tau_fixed.items()})
        self.g = [{lay.unit(v): self.lam[v]} for v in range(nvar)]
        self.coefficients = {}
        self.terms = {}
        self.store = {}
        self.diagnostics = {}
        self._systems = {}
        self._operators = {}
        for v in range(nvar):
            self.store[lay.unit(v)] = {w: _sample(self.eig[v], w) for w in self.points}

    # structural description of the reduced flow, used for dependency closure
    def _structure(self):
        lay = self.layout
        t = {self.zero, *lay.tau_fixed, *lay.tau, *[lay.conjugate(m) for m in lay.tau]}
        g = []
        for v in range(lay.nvar):
            mons = {lay.unit(v)}
            c = lay.conj[v]
            for m in lay.equations.get(v, ()):
                mons.add(m)
            for m in lay.equations.get(c, ()):
                mons.add(lay.conjugate(m))
            g.append(mons)
        return t, g

    def dependencies(self, m):
        """Centre-manifold indices (degree >= 2) entering the right-hand side of xi^m"""
        lay = self.layout
        deg = sum(m)
        deps = {b for b in _sub_indices(m) if 2 <= sum(b) < deg}
        t, g = self._structure()
        for v in range(lay.nvar):
            e = lay.unit(v)
            for c in t:
                for d in g[v]:
                    a = _add(c, d)
                    if not any(a) or sum(a) > deg:
                        continue
                    b = _sub(_add(m, e), a)
                    if b is not None and b[v] >= 1 and 2 <= sum(b) < deg:
                        deps.add(b)
        return deps

    def closure(self, targets):
        needed = set()
        stack = list(targets)
        while stack:
            m = stack.pop()
            for b in self.dependencies(m):
                for x in (b, self.layout.conjugate(b)):
                    if x not in needed:
                        needed.add(x)
                        stack.append(x)
        return needed

    # numerical pieces
    def _value(self, b, where):
        try:
            return self.store[b][where][0]
        except KeyError:
            raise DependencyMissing(f"{label(b)} is needed before it has been solved", index=list(b)) from None

    def _deriv(self, b, where):
        if not any(b):
            return self.points[where].du
        try:
            return self.store[b][where][1]
        except KeyError:
            raise DependencyMissing(f"{label(b)} is needed before it has been solved", index=list(b)) from None

    def _p(self, v, deg):
        P = {}
        for c, tc in self.t.items():
            for d, gd in self.g[v].items():
                a = _add(c, d)
                if sum(a) <= deg:
                    P[a] = P.get(a, 0) + tc * gd
        return P

    def rhs(self, m, where):
        """R_m at the given point set with the unknown degree-|m| coefficients left out"""
        pts = self.points[where]
        deg = sum(m)
        lay = self.layout
        total = np.zeros((pts.count, self.n), dtype=complex)
        top = deg if self.system.degree is None else min(deg, self.system.degree)
        for k in range(2, top + 1):
            for parts in _splits(m, k):
                dirs = [self._value(b, where) for b in parts]
                weight = 1.0 / math.prod(math.factorial(c) for c in Counter(parts).values())
                total += weight * self.system.mlf(k, pts.u, self.params, *dirs)
        for a, ta in self.t.items():
            if not any(a) or a == m or ta == 0:
                continue
            b = _sub(m, a)
            if b is not None:
                total -= ta * self._deriv(b, where)
        for v in range(lay.nvar):
            e = lay.unit(v)
            for a, pa in self._p(v, deg).items():
                if pa == 0 or not any(a):
                    continue
                b = _sub(_add(m, e), a)
                if b is None or b[v] < 1 or b == m:
                    continue
                total -= b[v] * pa * self._value(b, where)
        return _factorial(m) * total

    def integral(self, w, values):
        return self.T * np.sum(self.quad_weights * np.sum(np.conj(w.at_quad()) * values, axis=1))

    def mode(self, m):
        """Kernel direction of the operator for xi^m: None, 'trivial' or a variable index"""
        lay = self.layout
        k = lay.shift_vector(m)
        parity = lay.monomial_parity(m)
        if not any(k) and parity == 1:
            return 'trivial'
        for v in range(lay.nvar):
            if tuple(lay.freq[v]) == k and lay.parity[v] == parity:
                return v
        return None

    def _set_tau(self, m, value):
        lay = self.layout
        self.t[m] = value
        self.t[lay.conjugate(m)] = np.conj(value) if lay.conjugate(m) != m else value
        self.coefficients[lay.name('tau', m)] = value

    def _set_g(self, v, m, value):
        lay = self.layout
        self.g[v][m] = value
        c, cm = lay.conj[v], lay.conjugate(m)
        if (c, cm) != (v, m):
            self.g[c][cm] = np.conj(value)
        self.coefficients[lay.name(v, m)] = value

    def coefficient(self, m, R0q=None):
        """Fix the normal-form coefficients carried by xi^m; returns the correction for R_m"""
        lay = self.layout
        mode = self.mode(m)
        corrections = []
        if mode is None:
            return corrections
        if R0q is None:
            R0q = self.rhs(m, 'quad')
        fact = _factorial(m)
        if mode == 'trivial':
            if lay.tau_free:
                if m in lay.tau:
                    self._set_tau(m, 0.0)
                if m in lay.equations.get(0, ()):
                    value = self.integral(self.bundle.phi_star, R0q) / fact
                    self._set_g(0, m, value)
                    corrections.append((value, 0))
            elif m in lay.tau:
                value = self.integral(self.bundle.phi_star, R0q) / fact
                self._set_tau(m, value)
                corrections.append((value, 'f0'))
        elif m in lay.equations.get(mode, ()):
            value = self.integral(self.adj[mode], R0q) / fact
            self._set_g(mode, m, value)
            corrections.append((value, mode))
        for value, which in corrections:
            logger.debug("%s = %s", lay.name('tau' if which == 'f0' else which, m), value)
        return corrections

    def _correct(self, m, R, corrections, where):
        fact = _factorial(m)
        for value, which in corrections:
            direction = self.points[where].du if which == 'f0' else self._value(self.layout.unit(which), where)
            R = R - fact * value * direction
        return R

    def _bordered(self, m, mode):
        lay = self.layout
        k = lay.shift_vector(m)
        parity = lay.monomial_parity(m)
        key = (k, parity, mode)
        if key not in self._systems:
            shift = 1j * float(np.dot(k, self.bundle.omegas)) if any(k) else 0.0
            op = assemble_operator(self.mesh, self.T, self.points['colloc'].A, shift)
            self._operators[key] = op
            boundary = 'periodic' if parity == 1 else 'antiperiodic'
            if mode is None:
                weights, borders = [], []
            elif mode == 'trivial':
                weights = [self.bundle.v1_star if lay.tau_free else self.bundle.phi_star]
                borders = [self.bundle.phi_star]
            else:
                weights, borders = [self.adj[mode]], [self.adj[mode]]
            self._systems[key] = BorderedSystem(op, boundary, weights, borders, self.condition_limit)
        return self._systems[key], self._operators[key]

    def solve(self, m):
        """Coefficients of xi^m and the centre-manifold term h_m (and its conjugate)"""
        lay = self.layout
        if m in self.terms:
            return self.terms[m]
        missing = [b for b in self.dependencies(m) if b not in self.store]
        if missing:
            raise DependencyMissing(f"{label(m)} depends on unsolved terms",
                                    index=list(m), missing=[label(b) for b in sorted(missing)])
        # both right-hand sides before coefficient() stores the xi^m coefficients they must not contain
        R0q = self.rhs(m, 'quad')
        R0c = self.rhs(m, 'colloc')
        corrections = self.coefficient(m, R0q)
        Rq = self._correct(m, R0q, corrections, 'quad')
        Rc = self._correct(m, R0c, corrections, 'colloc')
        mode = self.mode(m)
        system, op = self._bordered(m, mode)
        sol = system.solve(Rc)
        h = sol.h
        fact = _factorial(m)
        hq, dq = h.at_quad(), h.deriv_quad()
        shift = op.shift
        implied = np.einsum('qij,qj->qi', self.points['quad'].A, hq) - shift * hq + Rq
        dotted = float(np.max(np.abs(dq - implied))) / max(1.0, float(np.max(np.abs(implied))))
        info = {'border_multiplier': abs(sol.border_multiplier), 'residual': sol.residual_norm,
                'condition': sol.condition, 'dotted_discrepancy': dotted, 'mode': str(mode)}
        self.diagnostics[label(m)] = info
        logger.debug("%s: shift %s, border %.2e, condition %.2e", label(m), shift,
                     info['border_multiplier'], sol.condition)
        scale = max(1.0, float(np.max(np.abs(Rc))))
        if mode is not None and info['border_multiplier'] > self.border_tol * scale:
            logger.warning("%s: solvability border multiplier %.3e above tolerance", label(m),
                           info['border_multiplier'])
        if dotted > DOTTED_TOL:
            logger.warning("%s: derivative of the collocation solution differs from its equation by %.2e",
                           label(m), dotted)
        self._store(m, h, fact)
        cm = lay.conjugate(m)
        if cm != m:
            self._store(cm, h.conj(), fact)
        return h

    def _store(self, m, h, fact):
        self.terms[m] = h
        self.store[m] = {w: tuple(x / fact for x in _sample(h, w)) for w in self.points}

    def coefficient_only(self, m):
        if self.mode(m) is None:
            return
        self.coefficient(m)

    def run(self, order):
        """Solve everything needed for all declared coefficients up to `order`"""
        lay = self.layout
        targets = [m for m in lay.tau if sum(m) <= order]
        for v, mons in lay.equations.items():
            targets += [m for m in mons if sum(m) <= order]
        needed = {m for m in self.closure(targets) if sum(m) < order}
        for m in required_terms(lay.kind, order, needed):
            self.solve(m)
        for m in sorted(set(targets), key=lambda x: (sum(x), x)):
            if m not in self.terms:
                self.coefficient_only(m)
        for name, (v, m) in lay.derived.items():
            if sum(m) <= order and m in self.g[v]:
                self.coefficients[name] = self.g[v][m]
        return self.coefficients


def required_terms(kind, order, needed=None):
    """
    Canonical solve order of the centre-manifold terms: increasing degree,
    one representative per conjugate pair.
    """
    lay = LAYOUTS[normalize_kind(kind)]
    if needed is None:
        targets = [m for m in lay.tau if sum(m) <= order]
        for mons in lay.equations.values():
            targets += [m for m in mons if sum(m) <= order]
        needed = set()
        for m in targets:
            needed |= {b for b in _sub_indices(m) if 2 <= sum(b) < order}
    reps = {max(m, lay.conjugate(m)) for m in needed}
    return sorted(reps, key=lambda m: (sum(m), tuple(-e for e in m)))


# --- public operations ------------------------------------------------------

def _order_of(kind, order):
    low, high = ORDERS[kind]
    if order in ('low', None):
        return low
    if order == 'high':
        return high
    order = int(order)
    if order not in (low, high):
        raise InvalidInput(f"{kind} normal forms are computed to order {low} or {high}", order=order)
    return order


def solve_center_manifold_terms(system, point, bundle, needed, condition_limit=CONDITION_LIMIT):
    """
    Solve the requested centre-manifold terms in the given order.

    Conjugate indices are filled in by conjugation; an index whose right-hand
    side needs a term not yet available raises DependencyMissing.
    """
    solver = HomologicalSolver(system, point, bundle, condition_limit)
    for m in needed:
        m = tuple(int(e) for e in m)
        if len(m) != solver.layout.nvar or sum(m) < 2:
            raise InvalidInput(f"{label(m)} is not a centre-manifold index for {solver.layout.kind}")
        solver.solve(m)
    return CenterManifoldTerms(solver.layout.kind, dict(solver.terms), dict(solver.diagnostics))


def _report(solver, order, bundle):
    diag = {
        'terms': dict(solver.diagnostics),
        'eigenfunctions': bundle.diagnostics,
        'max_border_multiplier': max([d['border_multiplier'] for d in solver.diagnostics.values()
                                      if d['mode'] != 'None'] or [0.0]),
    }
    return NormalFormReport(solver.layout.kind, dict(solver.coefficients), order, bundle.omegas,
                            float(bundle.period), diag)


def _coefficients(kind, system, point, bundle, order, condition_limit, border_tol=BORDER_TOL):
    if normalize_kind(point.kind) != kind:
        raise InvalidInput(f"point is a {point.kind} point, not {kind}")
    order = _order_of(kind, order)
    solver = HomologicalSolver(system, point, bundle, condition_limit, border_tol)
    solver.run(order)
    report = _report(solver, order, bundle)
    logger.info("%s normal form to order %d: %d coefficients", kind, order, len(report.coefficients))
    return report, CenterManifoldTerms(kind, dict(solver.terms), dict(solver.diagnostics))


def lpns_coefficients(system, point, bundle, order=2, condition_limit=CONDITION_LIMIT):
    return _coefficients('LPNS', system, point, bundle, order, condition_limit)[0]


def pdns_coefficients(system, point, bundle, order=3, condition_limit=CONDITION_LIMIT):
    return _coefficients('PDNS', system, point, bundle, order, condition_limit)[0]


def nsns_coefficients(system, point, bundle, order=3, condition_limit=CONDITION_LIMIT):
    return _coefficients('NSNS', system, point, bundle, order, condition_limit)[0]


def normal_form(system, point, order='low', bundle=None, kernel_ratio=KERNEL_RATIO,
                condition_limit=CONDITION_LIMIT, border_tol=BORDER_TOL):
    """Eigenfunctions, centre-manifold terms and coefficients for a located point"""
    kind = normalize_kind(point.kind)
    if bundle is None:
        bundle = build_eigenbundle(system, point, kernel_ratio, condition_limit)
    report, terms = _coefficients(kind, system, point, bundle, order, condition_limit, border_tol)
    return report, bundle, terms
