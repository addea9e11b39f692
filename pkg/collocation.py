"""
Orthogonal collocation on [0, T]
Piecewise polynomial mesh functions, Gauss-Legendre collocation matrices and
quadrature for the inner-product integrals
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from errors import InvalidInput

logger = logging.getLogger(__name__)

DEFAULT_NTST = 40
DEFAULT_NCOL = 4


def gauss_legendre(count, a=0.0, b=1.0):
    """Gauss-Legendre nodes and weights on [a, b]"""
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (x + 1) * (b - a) + a, 0.5 * (b - a) * w


def lagrange_basis(x_nodes, x_eval):
    """
    Values and derivatives of the Lagrange basis.

    Returns (L, dL) with L[j, i] = L_i(x_eval[j]).
    """
    x_nodes = np.asarray(x_nodes, dtype=float)
    x_eval = np.atleast_1d(np.asarray(x_eval, dtype=float))
    s = len(x_nodes)
    L = np.ones((x_eval.size, s))
    dL = np.zeros((x_eval.size, s))
    for i in range(s):
        others = [k for k in range(s) if k != i]
        for k in others:
            L[:, i] *= (x_eval - x_nodes[k]) / (x_nodes[i] - x_nodes[k])
        for j in others:
            term = np.full(x_eval.size, 1.0 / (x_nodes[i] - x_nodes[j]))
            for k in others:
                if k != j:
                    term *= (x_eval - x_nodes[k]) / (x_nodes[i] - x_nodes[k])
            dL[:, i] += term
    return L, dL


@dataclass(frozen=True)
class Mesh:
    ntst: int = DEFAULT_NTST
    ncol: int = DEFAULT_NCOL
    breakpoints: Optional[tuple] = None

    def __post_init__(self):
        if self.ntst < 1 or self.ncol < 1:
            raise InvalidInput("mesh needs ntst >= 1 and ncol >= 1", ntst=self.ntst, ncol=self.ncol)
        if self.breakpoints is None:
            object.__setattr__(self, 'breakpoints', tuple(np.linspace(0.0, 1.0, self.ntst + 1).tolist()))
        b = np.asarray(self.breakpoints, dtype=float)
        if len(b) != self.ntst + 1 or b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise InvalidInput("breakpoints must increase strictly from 0 to 1", ntst=self.ntst)

    @property
    def n_nodes(self):
        return self.ntst * self.ncol + 1

    @cached_property
    def widths(self):
        return np.diff(np.asarray(self.breakpoints))

    @cached_property
    def nodes(self):
        local = np.arange(self.ncol) / self.ncol
        b = np.asarray(self.breakpoints)
        inner = (b[:-1, None] + self.widths[:, None] * local[None, :]).ravel()
        return np.append(inner, 1.0)

    @cached_property
    def gauss_nodes(self):
        return gauss_legendre(self.ncol)[0]

    @cached_property
    def gauss_weights(self):
        return gauss_legendre(self.ncol)[1]

    def _assemble(self, local_points, local_weights=None):
        L, dL = lagrange_basis(np.arange(self.ncol + 1) / self.ncol, local_points)
        m = len(local_points)
        E = np.zeros((self.ntst * m, self.n_nodes))
        D = np.zeros((self.ntst * m, self.n_nodes))
        b = np.asarray(self.breakpoints)
        points = np.zeros(self.ntst * m)
        weights = np.zeros(self.ntst * m)
        for j in range(self.ntst):
            rows = slice(j * m, (j + 1) * m)
            cols = slice(j * self.ncol, j * self.ncol + self.ncol + 1)
            E[rows, cols] = L
            D[rows, cols] = dL / self.widths[j]
            points[rows] = b[j] + self.widths[j] * local_points
            if local_weights is not None:
                weights[rows] = self.widths[j] * local_weights
        return points, weights, E, D

    @cached_property
    def colloc(self):
        """(fractions, E, D) at the collocation points; D differentiates in the mesh fraction"""
        points, _, E, D = self._assemble(self.gauss_nodes)
        return points, E, D

    @cached_property
    def quad(self):
        """(fractions, weights, E, D) of the ncol+1 point Gauss rule per interval"""
        nodes, weights = gauss_legendre(self.ncol + 1)
        return self._assemble(nodes, weights)

    def refined(self):
        b = np.asarray(self.breakpoints)
        mids = 0.5 * (b[:-1] + b[1:])
        fine = np.empty(2 * self.ntst + 1)
        fine[0::2] = b
        fine[1::2] = mids
        return Mesh(2 * self.ntst, self.ncol, tuple(fine.tolist()))

    def locate(self, fraction):
        b = np.asarray(self.breakpoints)
        j = np.clip(np.searchsorted(b, fraction, side='right') - 1, 0, self.ntst - 1)
        return j, (fraction - b[j]) / self.widths[j]

    def to_dict(self):
        return {'ntst': self.ntst, 'ncol': self.ncol, 'breakpoints': list(self.breakpoints)}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d['ntst']), int(d['ncol']), tuple(float(x) for x in d['breakpoints']))


@dataclass(frozen=True, eq=False)
class MeshFunction:
    """Continuous piecewise polynomial on [0, T]; parity -1 marks anti-periodic functions"""
    mesh: Mesh
    values: np.ndarray
    period: float
    parity: int = 1

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != self.mesh.n_nodes:
            raise InvalidInput("mesh function needs one value per basis node",
                               expected=self.mesh.n_nodes, got=values.shape[0])
        object.__setattr__(self, 'values', values)

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    def at_colloc(self):
        return self.mesh.colloc[1] @ self.values

    def at_quad(self):
        return self.mesh.quad[2] @ self.values

    def deriv_colloc(self):
        return self.mesh.colloc[2] @ self.values / self.period

    def deriv_quad(self):
        return self.mesh.quad[3] @ self.values / self.period

    def __call__(self, tau):
        return interpolate(self, tau)

    def _like(self, values, parity=None):
        return MeshFunction(self.mesh, values, self.period, self.parity if parity is None else parity)

    def _check(self, other):
        if other.mesh != self.mesh or other.values.shape[1] != self.dim:
            raise InvalidInput("mesh functions live on different meshes or dimensions")

    def conj(self):
        return self._like(np.conj(self.values))

    @property
    def real(self):
        return self._like(self.values.real)

    def __add__(self, other):
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.values - other.values)

    def __neg__(self):
        return self._like(-self.values)

    def __mul__(self, scalar):
        return self._like(self.values * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._like(self.values / scalar)

    def remesh(self, mesh):
        fractions = mesh.nodes
        return MeshFunction(mesh, interpolate(self, fractions * self.period), self.period, self.parity)

    @classmethod
    def from_callable(cls, mesh, period, func, parity=1):
        """Sample func(tau) -> vector at the basis nodes"""
        taus = mesh.nodes * period
        return cls(mesh, np.array([np.atleast_1d(func(t)) for t in taus]), period, parity)


def interpolate(f, tau):
    tau_arr = np.asarray(tau, dtype=float)
    scalar = tau_arr.ndim == 0
    tau_arr = np.atleast_1d(tau_arr)
    if np.any(tau_arr < -1e-12 * f.period) or np.any(tau_arr > f.period * (1 + 1e-12)):
        raise InvalidInput("interpolation time outside [0, T]", period=f.period)
    mesh = f.mesh
    j, s = mesh.locate(np.clip(tau_arr / f.period, 0.0, 1.0))
    L, _ = lagrange_basis(np.arange(mesh.ncol + 1) / mesh.ncol, s)
    idx = j[:, None] * mesh.ncol + np.arange(mesh.ncol + 1)[None, :]
    out = np.einsum('pm,pmi->pi', L, f.values[idx])
    return out[0] if scalar else out


def inner_product(a, b):
    """Integral over [0, T] of conj(a)^T b"""
    if a.mesh != b.mesh or a.dim != b.dim:
        raise InvalidInput("inner product of mesh functions on different meshes")
    _, weights, _, _ = a.mesh.quad
    return a.period * np.sum(weights * np.sum(np.conj(a.at_quad()) * b.at_quad(), axis=1))


def quad_integral(values, mesh, period):
    """Integral over [0, T] of samples given at the quadrature points"""
    return period * np.sum(mesh.quad[1] * values)


@dataclass(frozen=True, eq=False)
class CollocationOperator:
    """Rows of h -> dh/dtau - A(tau) h + shift h at the collocation points"""
    matrix: np.ndarray
    mesh: Mesh
    period: float
    dim: int
    shift: complex = 0.0

    def apply(self, f):
        return (self.matrix @ f.values.ravel()).reshape(-1, self.dim)


def assemble_operator(mesh, T, A, shift=0.0):
    """
    Block-banded collocation matrix of d/dtau - A(tau) + shift.

    A is either a callable tau -> (n, n) matrix or an array of matrices at the
    collocation points.
    """
    points, E, D = mesh.colloc
    if callable(A):
        A = np.array([A(t) for t in points * T])
    A = np.asarray(A)
    n = A.shape[-1]
    eye = np.eye(n)
    M = np.kron(D / T, eye) - (E[:, None, :, None] * A[:, :, None, :]).reshape(E.shape[0] * n, -1)
    if shift != 0:
        M = M + shift * np.kron(E, eye)
    return CollocationOperator(M, mesh, float(T), n, shift)


def adapted_mesh(f, ntst=None):
    """Mesh equidistributing arclength of f (blended with uniform spacing)"""
    mesh = f.mesh
    ntst = ntst or mesh.ntst
    _, weights, _, _ = mesh.quad
    speed = np.linalg.norm(f.deriv_quad(), axis=1)
    per_interval = (weights * speed).reshape(mesh.ntst, -1).sum(axis=1) * f.period
    density = per_interval / max(per_interval.sum(), 1e-300) + mesh.widths
    cumulative = np.concatenate([[0.0], np.cumsum(density)])
    cumulative /= cumulative[-1]
    b = np.interp(np.linspace(0.0, 1.0, ntst + 1), cumulative, np.asarray(mesh.breakpoints))
    b[0], b[-1] = 0.0, 1.0
    logger.debug("adapted mesh: smallest interval %.3g, largest %.3g", np.diff(b).min(), np.diff(b).max())
    return Mesh(ntst, mesh.ncol, tuple(b.tolist()))
