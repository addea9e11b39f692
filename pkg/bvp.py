"""
Linear periodic / anti-periodic boundary value problems on collocation meshes
Bordered direct solves and kernel (eigen)functions of singular operators
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgWarning, get_lapack_funcs, lu_factor, lu_solve, qr, svd

from collocation import MeshFunction, assemble_operator, inner_product
from errors import (ConstraintInconsistent, InvalidInput, KernelDimensionMismatch,
                    NormalizationDegenerate, NumericallySingular)

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
KERNEL_RATIO = 1e-4
CONSTRAINT_TOL = 1e-10

BOUNDARY_PARITY = {'periodic': 1, 'antiperiodic': -1}


@dataclass
class BvpSpec:
    operator: object
    rhs: object
    boundary: str = 'periodic'
    constraints: list = field(default_factory=list)
    border: Optional[MeshFunction] = None


@dataclass
class BvpSolution:
    h: MeshFunction
    border_multiplier: complex
    residual_norm: float
    condition: float


def _parity(boundary):
    try:
        return BOUNDARY_PARITY[boundary]
    except KeyError:
        raise InvalidInput(f"unknown boundary type '{boundary}'", boundary=boundary) from None


def _boundary_rows(mesh, n, boundary):
    rows = np.zeros((n, mesh.n_nodes * n))
    eye = np.eye(n)
    rows[:, -n:] = eye
    rows[:, :n] = -_parity(boundary) * eye
    return rows


def _constraint_row(weight, mesh, period):
    _, wq, Eq, _ = mesh.quad
    W = np.conj(weight.at_quad())
    return period * np.einsum('q,qi,qm->mi', wq, W, Eq).ravel()


def _condition(lu, anorm):
    gecon, = get_lapack_funcs(('gecon',), (lu,))
    rcond, info = gecon(lu, anorm, norm='1')
    return np.inf if rcond == 0 else 1.0 / rcond


class BorderedSystem:
    """
    Factored square system for one operator, boundary type and constraint set.

    Unknowns are the node values of h followed by one border multiplier per
    border column; the collocation rows read L h - sum(beta_k psi_k) = r.
    """

    def __init__(self, operator, boundary='periodic', constraint_weights=(), borders=(),
                 condition_limit=CONDITION_LIMIT):
        if isinstance(borders, MeshFunction):
            borders = [borders]
        constraint_weights = list(constraint_weights)
        borders = list(borders)
        if len(constraint_weights) != len(borders):
            raise InvalidInput("bordered system needs as many constraint rows as border columns",
                               constraints=len(constraint_weights), borders=len(borders))
        self.operator = operator
        self.boundary = boundary
        self.parity = _parity(boundary)
        self.mesh = operator.mesh
        self.period = operator.period
        self.n = operator.dim
        self.n_border = len(borders)
        mesh, n = self.mesh, self.n

        blocks = [operator.matrix, _boundary_rows(mesh, n, boundary)]
        blocks += [_constraint_row(w, mesh, self.period)[None, :] for w in constraint_weights]
        dtype = np.result_type(*blocks, *[b.values for b in borders], float)
        K = np.zeros((mesh.n_nodes * n + self.n_border,) * 2, dtype=dtype)
        K[:, :mesh.n_nodes * n] = np.vstack(blocks)
        ncol_rows = operator.matrix.shape[0]
        for k, psi in enumerate(borders):
            K[:ncol_rows, mesh.n_nodes * n + k] = -psi.at_colloc().ravel()
        self.matrix = K
        self.constraint_rows = slice(ncol_rows + n, K.shape[0])

        self.lu = lu_factor(K, check_finite=False)
        self.condition = _condition(self.lu[0], np.linalg.norm(K, 1))
        logger.debug("bordered system: size %d, shift %s, %s, condition %.3g",
                     K.shape[0], operator.shift, boundary, self.condition)
        if not np.isfinite(self.condition) or self.condition > condition_limit:
            raise NumericallySingular("bordered collocation system is numerically singular",
                                      condition=float(self.condition), limit=condition_limit,
                                      shift=complex(operator.shift), boundary=boundary)

    def _solve_vector(self, b):
        if np.iscomplexobj(b) and not np.iscomplexobj(self.matrix):
            return lu_solve(self.lu, b.real) + 1j * lu_solve(self.lu, b.imag)
        return lu_solve(self.lu, b)

    def solve(self, rhs, targets=None):
        """rhs: MeshFunction or (ncolloc, n) samples at the collocation points"""
        mesh, n = self.mesh, self.n
        r = rhs.at_colloc() if isinstance(rhs, MeshFunction) else np.asarray(rhs)
        if r.shape != (self.operator.matrix.shape[0] // n, n):
            raise InvalidInput("right-hand side does not match the collocation points", shape=list(r.shape))
        targets = np.zeros(self.n_border) if targets is None else np.asarray(targets)
        b = np.concatenate([r.ravel(), np.zeros(n), targets]).astype(np.result_type(r, targets, float))
        x = self._solve_vector(b)
        residual = self.matrix @ x - b
        scale = max(1.0, float(np.max(np.abs(b))))
        residual_norm = float(np.max(np.abs(residual))) / scale
        constraint_residual = np.abs(residual[self.constraint_rows])
        if constraint_residual.size and np.max(constraint_residual) > CONSTRAINT_TOL * scale:
            raise ConstraintInconsistent("integral constraint rows are not satisfied after the solve",
                                         residual=float(np.max(constraint_residual)))
        values = x[:mesh.n_nodes * n].reshape(mesh.n_nodes, n)
        beta = x[mesh.n_nodes * n:]
        multiplier = complex(beta[0]) if self.n_border else 0.0
        h = MeshFunction(mesh, values, self.period, self.parity)
        return BvpSolution(h, multiplier, residual_norm, float(self.condition))


def solve_linear_bvp(spec, condition_limit=CONDITION_LIMIT):
    weights = [w for w, _ in spec.constraints]
    targets = [t for _, t in spec.constraints]
    borders = [] if spec.border is None else [spec.border]
    system = BorderedSystem(spec.operator, spec.boundary, weights, borders, condition_limit)
    return system.solve(spec.rhs, targets)


def _square_matrix(operator, boundary):
    return np.vstack([operator.matrix, _boundary_rows(operator.mesh, operator.dim, boundary)])


def kernel_function(operator, boundary='periodic', kernel_ratio=KERNEL_RATIO, seed=12345):
    """
    One-dimensional kernel of the square collocation system by inverse subspace iteration.

    Returns the kernel MeshFunction (unit 2-norm of node values) and the two
    smallest singular value estimates.
    """
    K = _square_matrix(operator, boundary)
    complex_case = np.iscomplexobj(K)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', LinAlgWarning)
        warnings.simplefilter('ignore', RuntimeWarning)
        lu, piv = lu_factor(K, check_finite=False)
    floor = np.finfo(float).eps * max(np.linalg.norm(K, 1), 1.0)
    diag = np.diag(lu).copy()
    small = np.abs(diag) < floor
    diag[small] = floor
    np.fill_diagonal(lu, diag)

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((K.shape[0], 3))
    if complex_case:
        X = X + 1j * rng.standard_normal((K.shape[0], 3))
    X, _ = qr(X, mode='economic')
    for _ in range(10):
        Y = lu_solve((lu, piv), X, trans=2 if complex_case else 1, check_finite=False)
        Z = lu_solve((lu, piv), Y, check_finite=False)
        X, _ = qr(Z, mode='economic')
    _, s, Vh = svd(K @ X, full_matrices=False)
    sigma = s[::-1]
    vector = X @ np.conj(Vh[-1])
    logger.debug("kernel: shift %s, %s, sigma %.3g / %.3g", operator.shift, boundary, sigma[0], sigma[1])
    if sigma[1] == 0 or sigma[0] > kernel_ratio * sigma[1]:
        raise KernelDimensionMismatch("operator has no isolated one-dimensional kernel",
                                      sigma_min=float(sigma[0]), sigma_next=float(sigma[1]),
                                      shift=complex(operator.shift), boundary=boundary)
    values = vector.reshape(operator.mesh.n_nodes, operator.dim)
    if not complex_case:
        values = values.real
    h = MeshFunction(operator.mesh, values, operator.period, _parity(boundary))
    return h, sigma[:2]


def normalize_pair(h, w):
    """Scale h so that the integral of <h, w> equals one"""
    value = inner_product(h, w)
    if abs(value) < 1e-12:
        raise NormalizationDegenerate("normalization integral vanishes", value=complex(value))
    return h * (1.0 / np.conj(value))


def normalize_self(h):
    """Scale h to unit L2 norm with its largest component at tau=0 real positive"""
    norm2 = inner_product(h, h).real
    if norm2 < 1e-24:
        raise NormalizationDegenerate("function has vanishing norm", value=float(norm2))
    h = h * (1.0 / np.sqrt(norm2))
    first = h.values[0]
    k = int(np.argmax(np.abs(first)))
    if abs(first[k]) > 0:
        phase = np.conj(first[k]) / abs(first[k])
        h = h * (phase if h.is_complex else np.sign(first[k].real))
    return h


def solve_adjoint_bvp(A, mesh, T, shift, boundary, pair=None, kernel_ratio=KERNEL_RATIO):
    """
    Kernel of d/dtau + A(tau)^T + shift, normalized so the integral of <phi, pair> is one.

    A is a callable or an array of matrices at the collocation points.
    """
    if callable(A):
        points = mesh.colloc[0] * T
        A = np.array([A(t) for t in points])
    op = assemble_operator(mesh, T, -np.swapaxes(np.asarray(A), -1, -2), shift)
    phi, _ = kernel_function(op, boundary, kernel_ratio)
    return normalize_self(phi) if pair is None else normalize_pair(phi, pair)
