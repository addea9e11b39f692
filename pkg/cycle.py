"""
Periodic orbits by collocation Newton
Simulation seeding, Floquet multipliers from the condensed period map and
orbit JSON import/export
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eig, solve
from scipy.optimize import brentq

from collocation import Mesh, MeshFunction, adapted_mesh, assemble_operator
from errors import InvalidInput, NoConvergence, PeriodCollapse

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
NEWTON_MAXIT = 20
CRITICAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    model: str
    profile: MeshFunction
    params: np.ndarray
    converged_residual: float = float('nan')

    @property
    def period(self):
        return self.profile.period

    @property
    def mesh(self):
        return self.profile.mesh

    @property
    def dim(self):
        return self.profile.dim

    def with_params(self, params):
        return PeriodicOrbit(self.model, self.profile, np.asarray(params, dtype=float), float('nan'))

    def to_dict(self, system=None):
        names = system.param_names if system is not None else [f'p{i}' for i in range(len(self.params))]
        return {
            'model': self.model,
            'params': dict(zip(names, self.params.tolist())),
            'period': float(self.period),
            'mesh': self.mesh.to_dict(),
            'profile': self.profile.values.tolist(),
            'converged_residual': float(self.converged_residual),
        }

    @classmethod
    def from_dict(cls, d, system=None):
        mesh = Mesh.from_dict(d['mesh'])
        profile = MeshFunction(mesh, np.array(d['profile'], dtype=float), float(d['period']))
        if system is not None:
            params = system.param_vector(d['params'])
        else:
            params = np.array(list(d['params'].values()), dtype=float)
        return cls(d['model'], profile, params, float(d.get('converged_residual', float('nan'))))


@dataclass(frozen=True, eq=False)
class FloquetSpectrum:
    multipliers: np.ndarray
    trivial_index: int
    critical: tuple
    monodromy: np.ndarray = None

    @property
    def trivial(self):
        return self.multipliers[self.trivial_index]

    def nontrivial(self):
        return [m for i, m in enumerate(self.multipliers) if i != self.trivial_index]

    def to_dict(self):
        return {
            'multipliers': [[float(m.real), float(m.imag)] for m in self.multipliers],
            'moduli': [float(abs(m)) for m in self.multipliers],
            'trivial_index': int(self.trivial_index),
            'critical': list(self.critical),
        }


def _profile_from_series(times, states, mesh):
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    period = times[-1] - times[0]
    if period <= 0:
        raise InvalidInput("time series guess must span a positive interval")
    fractions = (times - times[0]) / period
    values = np.column_stack([np.interp(mesh.nodes, fractions, states[:, i]) for i in range(states.shape[1])])
    return MeshFunction(mesh, values, period)


def _cycle_residual(system, params, mesh, U, T, ref_values, ref_deriv_q):
    n = system.dim
    _, Ec, Dc = mesh.colloc
    _, wq, Eq, _ = mesh.quad
    ug = Ec @ U
    f = system.rhs(ug, params)
    colloc = Dc @ U - T * f
    bc = U[-1] - U[0]
    phase = np.sum(wq[:, None] * ref_deriv_q * (Eq @ (U - ref_values)))
    return np.concatenate([colloc.ravel(), bc, [phase]]), ug, f


def _cycle_jacobian(system, params, mesh, T, ug, f, ref_deriv_q):
    n = system.dim
    Nn = mesh.n_nodes
    _, wq, Eq, _ = mesh.quad
    A = system.jacobian(ug, params)
    op = assemble_operator(mesh, T, A)
    size = Nn * n + 1
    J = np.zeros((size, size))
    rows = op.matrix.shape[0]
    J[:rows, :Nn * n] = T * op.matrix
    J[:rows, -1] = -f.ravel()
    J[rows:rows + n, (Nn - 1) * n:Nn * n] = np.eye(n)
    J[rows:rows + n, :n] -= np.eye(n)
    J[-1, :Nn * n] = np.einsum('q,qi,qm->mi', wq, ref_deriv_q, Eq).ravel()
    return J


def newton_cycle(system, params, guess, mesh=None, tol=NEWTON_TOL, maxit=NEWTON_MAXIT, adapt=False):
    """
    Converge a periodic orbit of the collocation system.

    guess is a PeriodicOrbit or a (times, states) pair covering one period.
    The phase is fixed by the integral condition against the guess profile.
    """
    params = np.asarray(params, dtype=float)
    if isinstance(guess, PeriodicOrbit):
        profile = guess.profile
        mesh = mesh or profile.mesh
        if profile.mesh != mesh:
            profile = profile.remesh(mesh)
    else:
        mesh = mesh or Mesh()
        profile = _profile_from_series(guess[0], guess[1], mesh)
    if profile.dim != system.dim:
        raise InvalidInput("guess dimension does not match the model", expected=system.dim, got=profile.dim)

    U = np.array(profile.values, dtype=float)
    T = float(profile.period)
    ref_values = U.copy()
    ref_deriv_q = mesh.quad[3] @ ref_values

    residual = np.inf
    for iteration in range(maxit + 1):
        F, ug, f = _cycle_residual(system, params, mesh, U, T, ref_values, ref_deriv_q)
        scale = max(1.0, T, float(np.max(np.abs(U))))
        residual = float(np.max(np.abs(F))) / scale
        logger.debug("cycle newton %d: residual %.3e, T = %.10g", iteration, residual, T)
        if not np.isfinite(residual):
            break
        if residual < tol:
            orbit = PeriodicOrbit(system.name, MeshFunction(mesh, U, T), params, residual)
            logger.info("cycle converged in %d iterations, T = %.10g", iteration, T)
            if adapt:
                return newton_cycle(system, params, orbit, adapted_mesh(orbit.profile), tol, maxit)
            return orbit
        if iteration == maxit:
            break
        J = _cycle_jacobian(system, params, mesh, T, ug, f, ref_deriv_q)
        delta = solve(J, -F, check_finite=False)
        U = U + delta[:-1].reshape(U.shape)
        T = T + delta[-1]
        if T < 1e-6:
            raise PeriodCollapse("period collapsed during Newton iteration", period=T)
    raise NoConvergence("collocation Newton did not converge", residual=residual, iterations=maxit,
                        params=params.tolist())


def orbit_jacobians(system, orbit, where='colloc'):
    """Jacobian matrices A(tau) along the orbit at the collocation or quadrature points"""
    u = orbit.profile.at_colloc() if where == 'colloc' else orbit.profile.at_quad()
    return system.jacobian(u, orbit.params)


def monodromy(system, orbit):
    """Period map of the discretized variational equation by condensing each interval"""
    mesh, n = orbit.mesh, system.dim
    op = assemble_operator(mesh, orbit.period, orbit_jacobians(system, orbit))
    M = np.eye(n)
    m = mesh.ncol
    for j in range(mesh.ntst):
        G = op.matrix[j * m * n:(j + 1) * m * n, j * m * n:(j * m + m + 1) * n]
        Phi = -solve(G[:, n:], G[:, :n], check_finite=False)[-n:, :]
        M = Phi @ M
    return M


def spectrum_from_multipliers(multipliers, critical_tol=CRITICAL_TOL, matrix=None):
    mu = np.asarray(multipliers, dtype=complex)
    mu = mu[np.lexsort((-mu.imag, -np.abs(mu)))]
    trivial = int(np.argmin(np.abs(mu - 1.0)))
    critical = tuple(int(i) for i in np.flatnonzero(np.abs(np.abs(mu) - 1.0) < critical_tol))
    return FloquetSpectrum(mu, trivial, critical, matrix)


def floquet(system, orbit, critical_tol=CRITICAL_TOL):
    M = monodromy(system, orbit)
    mu = eig(M, right=False)
    spectrum = spectrum_from_multipliers(mu, critical_tol, M)
    logger.debug("multipliers: %s", np.array2string(spectrum.multipliers, precision=6))
    return spectrum


def simulate(system, params, x0, t_span, **kwargs):
    options = dict(method='DOP853', rtol=1e-10, atol=1e-12)
    options.update(kwargs)
    return solve_ivp(lambda t, x: system.rhs(x, params), t_span, np.asarray(x0, dtype=float), **options)


def simulate_guess(system, params, x0, t_transient=500.0, max_period=500.0, samples=20000, max_returns=20):
    """
    Periodic-orbit guess from the attractor reached by time integration.

    A section through the post-transient state, normal to the flow, is
    crossed repeatedly; the closest return among the first crossings
    defines the period.
    """
    params = np.asarray(params, dtype=float)
    sol = simulate(system, params, x0, (0.0, t_transient))
    if not sol.success:
        raise NoConvergence("transient integration failed", message=sol.message)
    xs = sol.y[:, -1]
    normal = system.rhs(xs, params)
    sol = simulate(system, params, xs, (0.0, max_period), dense_output=True)
    if not sol.success:
        raise NoConvergence("return integration failed", message=sol.message)
    t = np.linspace(0.0, sol.t[-1], samples)
    g = (sol.sol(t).T - xs) @ normal
    crossings = np.flatnonzero((g[:-1] < 0) & (g[1:] >= 0))
    if crossings.size == 0:
        raise NoConvergence("trajectory does not return to the section", max_period=max_period)
    returns = []
    for k in crossings[:max_returns]:
        tr = brentq(lambda s: (sol.sol(s) - xs) @ normal, t[k], t[k + 1])
        returns.append((tr, np.linalg.norm(sol.sol(tr) - xs)))
    closest = min(d for _, d in returns)
    accept = max(10.0 * closest, 1e-6 * (1.0 + np.linalg.norm(xs)))
    period, distance = next(r for r in returns if r[1] <= accept)
    logger.info("simulated return: period %.8g, return distance %.3e", period, distance)
    times = np.linspace(0.0, period, 4001)
    return times, sol.sol(times).T


def orbit_from_simulation(system, params, x0, mesh=None, **kwargs):
    times, states = simulate_guess(system, params, x0, **kwargs)
    return newton_cycle(system, params, (times, states), mesh=mesh or Mesh())
