"""
Bifurcation scenarios from critical normal-form coefficients
Unfolding quantities, case/region verdicts, Hopf and heteroclinic curve
asymptotics and equilibria of the truncated amplitude systems
"""

import csv
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from errors import BoundaryDegenerate, DomainViolation, InvalidCoefficients, MissingHigherOrder
from locator import normalize_kind

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-8
NAN = float('nan')

LPNS_CASES = {(1, 1): 'a', (-1, -1): 'b', (1, -1): 'c', (-1, 1): 'd'}


@dataclass(frozen=True)
class UnfoldingQuantities:
    kind: str
    order: int
    s: float = NAN
    theta: float = NAN
    E: float = NAN
    p11: float = NAN
    p12: float = NAN
    p21: float = NAN
    p22: float = NAN
    delta: float = NAN
    s1: float = NAN
    s2: float = NAN
    Theta: float = NAN
    Delta: float = NAN
    sign_l1: float = NAN

    def to_dict(self):
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: (NAN if v is None else v) for k, v in d.items()})

    def output_tuple(self):
        """The (s, theta, E) or (p11, p22, theta, delta, sign l1) summary"""
        if self.kind == 'LPNS':
            return (self.s, self.theta, self.E)
        return (self.p11, self.p22, self.theta, self.delta, self.sign_l1)


@dataclass(frozen=True)
class ScenarioVerdict:
    kind: str
    case_label: str
    torus_inventory: list = field(default_factory=list)
    swapped: bool = False
    simple: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _real(report, name):
    value = report.get(name)
    if value is None:
        raise InvalidCoefficients(f"normal-form report lacks {name}", coefficient=name)
    return float(np.real(value))


def _nonzero(value, name):
    if value == 0 or not np.isfinite(value):
        raise InvalidCoefficients(f"{name} must be finite and non-zero", coefficient=name, value=value)
    return value


def _sign(x):
    return 1.0 if x > 0 else -1.0


# --- unfolding quantities ---------------------------------------------------

def lpns_quantities(report):
    a200 = _nonzero(_real(report, 'a200'), 'a200')
    a011 = _nonzero(_real(report, 'a011'), 'a011')
    b110 = complex(report['b110'])
    s = _sign(a200 * a011)
    theta = b110.real / a200
    E = NAN
    if report.order_computed >= 3:
        a300, a111 = _real(report, 'a300'), _real(report, 'a111')
        b210, b021 = complex(report['b210']), complex(report['b021'])
        E = (b210 + b110 * (b021.real / a011 - 3 * a300 / (2 * a200) + a111 / (2 * a011))
             - b021 * a200 / a011).real
    return UnfoldingQuantities('LPNS', report.order_computed, s=s, theta=theta, E=E)


# PDNS coefficient names in the positions of the NSNS ones
_HOPF_HOPF_NAMES = {
    'PDNS': dict(p11='a300', p12='a111', p21='b210', p22='b021', a1022='a122', b1121='b221',
                 b0032='b032', a3200='a500', b2210='b410', a2111='a311'),
    'NSNS': dict(p11='a2100', p12='a1011', p21='b1110', p22='b0021', a1022='a1022', b1121='b1121',
                 b0032='b0032', a3200='a3200', b2210='b2210', a2111='a2111'),
}


def hopfhopf_quantities(report):
    kind = normalize_kind(report.kind)
    names = _HOPF_HOPF_NAMES[kind]
    p11 = _nonzero(_real(report, names['p11']), 'p11')
    p12 = _real(report, names['p12'])
    p21 = _nonzero(_real(report, names['p21']), 'p21')
    p22 = _nonzero(_real(report, names['p22']), 'p22')
    values = dict(p11=p11, p12=p12, p21=p21, p22=p22, theta=p12 / p22, delta=p21 / p11)
    if report.order_computed >= 5:
        r = {k: _real(report, v) for k, v in names.items() if not k.startswith('p')}
        if p12 == 0:
            raise InvalidCoefficients("p12 vanishes; fifth-order quantities are undefined")
        s1 = r['a1022'] + p12 * (r['b1121'] / p21 - 2 * r['b0032'] / p22 - r['a3200'] * p22 / (p11 * p21))
        s2 = r['b2210'] + p21 * (r['a2111'] / p12 - 2 * r['a3200'] / p11 - p11 * r['b0032'] / (p12 * p22))
        values.update(s1=s1, s2=s2, Theta=s1 / p22 ** 2, Delta=s2 / p11 ** 2)
        try:
            values['sign_l1'] = float(sign_l1(values['theta'], values['delta'], values['Theta'], values['Delta']))
        except BoundaryDegenerate:
            logger.warning("first Lyapunov coefficient of the torus bifurcation is degenerate")
    return UnfoldingQuantities(kind, report.order_computed, **values)


def unfolding_quantities(report):
    if normalize_kind(report.kind) == 'LPNS':
        return lpns_quantities(report)
    return hopfhopf_quantities(report)


# --- verdicts ---------------------------------------------------------------

def lpns_l1_sign(theta):
    """Sign of the Lyapunov coefficient of the amplitude-system Hopf bifurcation"""
    return -_sign(theta)


def classify_lpns(q):
    """
    Case (a)-(d) of the LPNS amplitude system from the signs of s and theta.

    Axis equilibria are cycles, off-axis equilibria 2-tori, and the periodic
    orbit present for s*theta < 0 is a 3-torus. A stable 3-torus goes with
    E*l1 < 0, which is the orientation matching the computed laser torus.
    """
    if math.isnan(q.s) or math.isnan(q.theta):
        raise InvalidCoefficients("LPNS verdict needs s and theta")
    if abs(q.theta) < BOUNDARY_TOL:
        raise BoundaryDegenerate("theta vanishes; the LPNS case is not determined", theta=q.theta)
    s, sg = int(q.s), int(_sign(q.theta))
    label = LPNS_CASES[(s, sg)]
    inventory = [{'set': 'cycle', 'count': 2}, {'set': 'T2', 'count': 1}]
    notes = []
    if s * sg < 0:
        if math.isnan(q.E):
            notes.append('3-torus exists, stability unknown without third-order terms')
            inventory.append({'set': 'T3', 'stability': 'unknown'})
        else:
            stable = q.E * lpns_l1_sign(q.theta) < 0
            inventory.append({'set': 'T3', 'stability': 'stable' if stable else 'unstable'})
    return ScenarioVerdict('LPNS', label, inventory, False, s * sg > 0, notes)


def require_torus_stability(q):
    """Raise MissingHigherOrder when a 3-torus exists but E was not computed"""
    if q.kind == 'LPNS' and q.s * q.theta < 0 and math.isnan(q.E):
        raise MissingHigherOrder("3-torus stability needs the third-order LPNS coefficients")


def _check_boundaries(theta, delta, simple):
    marks = [('theta', theta, 0.0), ('delta', delta, 0.0), ('theta*delta', theta * delta, 1.0)]
    if not simple:
        marks += [('theta', theta, 1.0), ('delta', delta, 1.0)]
    for name, value, edge in marks:
        if abs(value - edge) < BOUNDARY_TOL:
            raise BoundaryDegenerate(f"{name} lies on a region boundary", quantity=name, value=value, edge=edge)


def hopfhopf_region(theta, delta, simple):
    """Region label with theta >= delta (caller swaps)"""
    _check_boundaries(theta, delta, simple)
    td = theta * delta
    if simple:
        if theta > 0 and delta > 0:
            return 'I' if td > 1 else 'II'
        if theta > 0 > delta:
            return 'III'
        return 'IV' if td < 1 else 'V'
    if theta > 1 and delta > 1:
        return 'I'
    if theta > 1 and delta < 1 and td > 1:
        return 'II'
    if theta > 0 and delta > 0:
        return 'III'
    if theta > 0 > delta:
        return 'IV'
    return 'V' if td < 1 else 'VI'


_HH_SETS = {
    'PDNS': {'origin': 'cycle', 'axis1': 'period-doubled cycle', 'axis2': 'T2',
             'interior': 'doubled T2', 'orbit': 'T3'},
    'NSNS': {'origin': 'cycle', 'axis1': 'T2', 'axis2': 'T2', 'interior': 'T3', 'orbit': 'T4'},
}


def classify_hopfhopf(q, kind=None):
    kind = normalize_kind(kind or q.kind)
    for name in ('p11', 'p22', 'theta', 'delta'):
        if math.isnan(getattr(q, name)):
            raise InvalidCoefficients(f"verdict needs {name}")
    simple = q.p11 * q.p22 > 0
    theta, delta = q.theta, q.delta
    swapped = delta > theta
    if swapped:
        theta, delta = delta, theta
    region = hopfhopf_region(theta, delta, simple)
    sets = _HH_SETS[kind]
    inventory = [{'set': sets['origin']}, {'set': sets['axis1']}, {'set': sets['axis2']},
                 {'set': sets['interior']}]
    notes = []
    if not simple:
        if math.isnan(q.sign_l1):
            inventory.append({'set': sets['orbit'], 'stability': 'unknown'})
            notes.append('stability of the extra torus needs fifth-order terms')
        else:
            inventory.append({'set': sets['orbit'], 'stability': 'stable' if q.sign_l1 < 0 else 'unstable'})
    label = f"{'simple' if simple else 'difficult'} {region}"
    logger.info("%s verdict: %s%s", kind, label, ' (theta/delta swapped)' if swapped else '')
    return ScenarioVerdict(kind, label, inventory, swapped, simple, notes)


def classify(q):
    if q.kind == 'LPNS':
        return classify_lpns(q)
    return classify_hopfhopf(q)


def sign_l1(theta, delta, Theta, Delta):
    values = (theta, delta, Theta, Delta)
    if not all(np.isfinite(v) for v in values):
        raise DomainViolation("sign l1 needs finite theta, delta, Theta, Delta")
    x = theta * (theta * (theta - 1) * Delta + delta * (delta - 1) * Theta)
    if x == 0:
        raise BoundaryDegenerate("first Lyapunov coefficient vanishes", value=x)
    return -int(_sign(x))


# --- curve asymptotics ------------------------------------------------------

def hh_curve_asymptotics(theta, delta, Theta, Delta, heteroclinic=True):
    """
    Quadratic approximations mu2 = c1*mu1 + c2*mu1^2 of the Hopf and
    heteroclinic curves of the rescaled difficult-case amplitude system.

    The heteroclinic expansion requires theta, delta < 0 and theta*delta > 1.
    """
    if abs(theta - 1) < BOUNDARY_TOL:
        raise DomainViolation("theta = 1 makes the curve slopes singular", theta=theta)
    denom = 2 * delta * theta - delta - theta
    if abs(denom) < BOUNDARY_TOL:
        raise DomainViolation("2*delta*theta - delta - theta vanishes", value=denom)
    if heteroclinic and not (theta < 0 and delta < 0 and delta * theta - 1 > 0):
        raise DomainViolation("heteroclinic asymptotics need theta, delta < 0 and theta*delta > 1",
                              theta=theta, delta=delta)
    linear = -(delta - 1) / (theta - 1)
    hopf = -((delta - 1) * Theta + (theta - 1) * Delta) / (theta - 1) ** 3
    het = (theta * Theta * (delta - 1) ** 3 + delta * Delta * (theta - 1) ** 3) / ((theta - 1) ** 3 * denom)
    bracket = delta * (delta - 1) * Theta + theta * (theta - 1) * Delta
    difference = (delta * theta - 1) * bracket / ((theta - 1) ** 3 * denom)
    try:
        l1 = sign_l1(theta, delta, Theta, Delta)
    except BoundaryDegenerate:
        l1 = 0
    return {
        'linear_coeff': linear,
        'hopf_quadratic_coeff': hopf,
        'het_quadratic_coeff': het,
        'het_minus_hopf': difference,
        'l1_sign': l1,
    }


# --- amplitude systems ------------------------------------------------------

def _stability(eigs, tol=1e-12):
    re = np.real(eigs)
    if np.all(re < -tol):
        return 'sink'
    if np.all(re > tol):
        return 'source'
    if np.any(re < -tol) and np.any(re > tol):
        return 'saddle'
    return 'nonhyperbolic'


def _lpns_equilibria(q, beta1, beta2):
    s, theta = q.s, q.theta
    points = []
    if beta1 <= 0:
        root = math.sqrt(-beta1)
        points += [(root, 0.0)] if root == 0 else [(-root, 0.0), (root, 0.0)]
    for xi in np.roots([1.0, theta, beta2]):
        if abs(xi.imag) > 1e-12:
            continue
        xi = xi.real
        rho2 = -(beta1 + xi * xi) / s
        if rho2 > 0:
            points.append((xi, math.sqrt(rho2)))
    rows = []
    for xi, rho in points:
        J = np.array([[2 * xi, 2 * s * rho],
                      [rho * (theta + 2 * xi), beta2 + theta * xi + xi * xi]])
        rows.append((xi, rho, np.linalg.eigvals(J)))
    return rows


def _hh_coefficients(q):
    s1 = 0.0 if math.isnan(q.s1) else q.s1
    s2 = 0.0 if math.isnan(q.s2) else q.s2
    return q.p11, q.p12, q.p21, q.p22, s1, s2


def _hh_equilibria(q, mu1, mu2):
    p11, p12, p21, p22, s1, s2 = _hh_coefficients(q)
    squares = [(0.0, 0.0)]
    if -mu1 / p11 > 0:
        squares.append((-mu1 / p11, 0.0))
    if -mu2 / p22 > 0:
        squares.append((0.0, -mu2 / p22))
    # interior: u = r1^2, w = r2^2 with u eliminated from the first equation
    c = [s1, p12, mu1]
    u_of_w = np.poly1d([-x / p11 for x in c])
    poly = np.poly1d([s2]) * u_of_w * u_of_w + np.poly1d([p21]) * u_of_w + np.poly1d([p22, mu2])
    for w in np.atleast_1d(poly.roots if poly.order > 0 else []):
        if abs(w.imag) > 1e-10 or w.real <= 0:
            continue
        u = u_of_w(w.real)
        if u > 0:
            squares.append((float(u), float(w.real)))
    rows = []
    for u, w in squares:
        r1, r2 = math.sqrt(u), math.sqrt(w)
        g1 = mu1 + p11 * u + p12 * w + s1 * w * w
        g2 = mu2 + p21 * u + p22 * w + s2 * u * u
        J = np.array([[g1 + 2 * p11 * u, r1 * (2 * p12 * r2 + 4 * s1 * r2 ** 3)],
                      [r2 * (2 * p21 * r1 + 4 * s2 * r1 ** 3), g2 + 2 * p22 * w]])
        rows.append((r1, r2, np.linalg.eigvals(J)))
    return rows


def amplitude_rhs(q, mu1, mu2):
    """Vector field of the truncated amplitude system, for root-finding checks"""
    if q.kind == 'LPNS':
        def rhs(z):
            xi, rho = z
            return [mu1 + xi * xi + q.s * rho * rho, rho * (mu2 + q.theta * xi + xi * xi)]
        return rhs
    p11, p12, p21, p22, s1, s2 = _hh_coefficients(q)

    def rhs(z):
        r1, r2 = z
        return [r1 * (mu1 + p11 * r1 ** 2 + p12 * r2 ** 2 + s1 * r2 ** 4),
                r2 * (mu2 + p21 * r1 ** 2 + p22 * r2 ** 2 + s2 * r1 ** 4)]
    return rhs


def amplitude_portrait(q, mu1, mu2, grid=None):
    """
    Equilibria of the truncated amplitude system with eigenvalue stability.

    For LPNS (mu1, mu2) are the unfolding parameters (beta1, beta2) and the
    coordinates are (xi, rho). With a grid of (mu1, mu2) pairs every row also
    carries its parameter values.
    """
    pairs = [(mu1, mu2)] if grid is None else list(grid)
    rows = []
    for m1, m2 in pairs:
        found = _lpns_equilibria(q, m1, m2) if q.kind == 'LPNS' else _hh_equilibria(q, m1, m2)
        for r1, r2, eigs in found:
            rows.append({'mu1': m1, 'mu2': m2, 'r1': r1, 'r2': r2, 'type': _stability(eigs),
                         'eig1': complex(eigs[0]), 'eig2': complex(eigs[1])})
    return rows


def write_portrait_csv(rows, path, with_params=False):
    columns = (['mu1', 'mu2'] if with_params else []) + ['r1', 'r2', 'type', 'eig1', 'eig2']
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_value(row[c]) for c in columns])


def _csv_value(value):
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    if isinstance(value, float):
        return f"{value:.17g}"
    return value
