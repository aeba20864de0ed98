"""
Empirical characteristic function estimation of GARCH parameters.

For a grid of frequencies u_k the scores

    h_{k,n}(theta) = (exp(i u_k eps_n(theta)) - phi(u_k)) sigma_theta,n / sigma_n

have mean zero at the true parameter. They are stacked into a vector of
length p M (index k p + j) and averaged over time. The estimate minimizes
Q_N = h^* K^{-1} h, whose half-gradient Re(h_theta^* K^{-1} h) is driven
to zero. The preliminary estimate uses K = I, the final one
K = C kron M(theta_pre).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import noise as _noise
from . import solver
from .errors import InsufficientData, NoConvergence, BoundaryStall, SingularWeighting
from .garch_core import GarchParams, filter_series

# pylint: disable=invalid-name, too-many-arguments, too-many-locals, too-many-instance-attributes

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12
RIDGE_FACTOR = 1e-10
MIN_OBSERVATIONS = 500
WEIGHTINGS = ('identity', 'optimal')


@dataclass(frozen=True)
class UGrid:
    """
    Frequencies u_1 < .. < u_M, all positive.

    With mirror=True the moment nodes are (-u_M .. -u_1, u_1 .. u_M), which
    adds the conjugate scores. The covariance formula of
    asymptotic_covariance describes the estimator exactly only when the
    nodes are closed under negation.
    """
    points: tuple
    mirror: bool = False

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError('grid needs at least one point')
        if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
            raise ValueError('grid points must be finite and positive: {}'.format(pts))
        if np.any(np.diff(pts) <= 0):
            raise ValueError('grid points must be strictly increasing: {}'.format(pts))
        object.__setattr__(self, 'points', tuple(float(u) for u in pts))
        object.__setattr__(self, 'mirror', bool(self.mirror))

    @classmethod
    def default(cls):
        return cls(0.5 * np.arange(1, 9), mirror=True)

    @classmethod
    def uniform(cls, step, count, mirror=True):
        """
        u_k = step * k, k = 1 .. count.
        """
        return cls(step * np.arange(1, int(count) + 1), mirror=mirror)

    @property
    def nodes(self):
        pts = np.array(self.points)
        if self.mirror:
            return np.concatenate((-pts[::-1], pts))
        return pts

    @property
    def size(self):
        return len(self.points) * (2 if self.mirror else 1)

    def is_nested_in(self, other):
        # type: (UGrid) -> bool
        return self.mirror == other.mirror and set(self.points) <= set(other.points)

    def to_config(self):
        return {'points': list(self.points), 'mirror': self.mirror}


class WeightMatrix:
    """
    Hermitian positive definite weighting K with a Cholesky factor.

    :param K: Hermitian matrix
    :param ridge: None applies ridge = 1e-10 trace(K) / dim when
        cond(K) > 1e12; a number is used as given
    """

    def __init__(self, K, ridge=None):
        K = np.asarray(K)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError('weighting must be square, got shape {}'.format(K.shape))
        if not np.all(np.isfinite(K)):
            raise SingularWeighting('weighting has non-finite entries')
        K = 0.5 * (K + K.conj().T)
        size = K.shape[0]
        with np.errstate(all='ignore'):
            self.condition = float(np.linalg.cond(K))
        if not np.isfinite(self.condition):
            self.condition = np.inf
        if ridge is None:
            ridge = 0.0
            if self.condition > COND_LIMIT:
                ridge = RIDGE_FACTOR * float(np.trace(K).real) / size
                logger.warning('weighting condition %.3e, adding ridge %.3e',
                               self.condition, ridge)
        elif ridge < 0:
            raise ValueError('ridge must be non-negative, got {!r}'.format(ridge))
        self.ridge = float(ridge)
        self.matrix = (K + self.ridge * np.eye(size)).astype(complex)
        try:
            self._factor = scipy.linalg.cho_factor(self.matrix, lower=True)
        except np.linalg.LinAlgError:
            raise SingularWeighting(
                'weighting is not positive definite after ridge {:.3e}'.format(self.ridge),
                self.condition)

    @classmethod
    def identity(cls, size):
        return cls(np.eye(size), ridge=0.0)

    @property
    def size(self):
        return self.matrix.shape[0]

    def solve(self, b):
        """
        K^{-1} b.
        """
        return scipy.linalg.cho_solve(self._factor, np.asarray(b, dtype=complex))

    def quad_form(self, h):
        return float(np.vdot(h, self.solve(h)).real)

    def ridge_event(self, stage):
        return {'stage': stage, 'ridge': self.ridge, 'condition': self.condition}


def _as_weight(K):
    return K if isinstance(K, WeightMatrix) else WeightMatrix(K)


@dataclass(frozen=True)
class EcfOptions:
    """
    Estimator settings.

    :param weighting: 'identity' stops after the preliminary stage,
        'optimal' re-solves with K = C kron M(theta_pre)
    :param gtol: tolerance on the half-gradient norm
    :param max_iter: iteration limit per solver phase
    :param ridge: None for the automatic ridge rule, else a fixed ridge
    :param n_starts: multistart count
    :param transient: leading filter steps left out of every average
    :param strict: raise NoConvergence / BoundaryStall instead of flagging
    :param seed: seed of the multistart jitter
    """
    weighting: str = 'optimal'
    gtol: float = 1e-8
    max_iter: int = 200
    ridge: float = None
    n_starts: int = 5
    transient: int = 100
    strict: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ValueError('weighting must be one of {}, got {!r}'.format(
                WEIGHTINGS, self.weighting))
        if not self.gtol > 0:
            raise ValueError('gtol must be positive')
        if int(self.max_iter) < 1 or int(self.n_starts) < 1:
            raise ValueError('max_iter and n_starts must be at least 1')
        if self.ridge is not None and not self.ridge >= 0:
            raise ValueError('ridge must be non-negative, got {!r}'.format(self.ridge))
        if int(self.transient) < 0:
            raise ValueError('transient must be non-negative')


def _phi_vector(nodes, noise):
    return nodes * _noise.cf_deriv(nodes, noise)


def c_matrix(grid, noise):
    """
    Covariance of the i.i.d. scores exp(i u_k L) - phi(u_k):
    C_kl = phi(u_k - u_l) - phi(u_k) phi(-u_l).
    :param grid: UGrid
    :param noise: NoiseModel
    :return: Hermitian M x M matrix
    """
    u = grid.nodes
    return _noise.cf(np.subtract.outer(u, u), noise) - \
        np.multiply.outer(_noise.cf(u, noise), _noise.cf(-u, noise))


def pseudo_c_matrix(grid, noise):
    """
    E[(exp(i u_k L) - phi_k)(exp(i u_l L) - phi_l)] = phi(u_k + u_l) - phi_k phi_l.
    """
    u = grid.nodes
    return _noise.cf(np.add.outer(u, u), noise) - \
        np.multiply.outer(_noise.cf(u, noise), _noise.cf(u, noise))


def _usable(params, y, transient):
    y = np.asarray(y, dtype=float)
    if len(y) <= transient + params.p:
        raise InsufficientData('{:d} observations leave nothing after a transient of {:d}'.format(
            len(y), transient))
    return y


def _score_terms(params, y, nodes, noise, transient, jacobian=True):
    """
    Time-averaged scores, their theta-Jacobian and M_hat.
    """
    y = _usable(params, y, transient)
    if jacobian:
        bundle, sens2, hess = filter_series(params, y, second_order=True)
    else:
        bundle = filter_series(params, y)
        sens2 = 2.0 * np.sqrt(bundle.sigma2)[:, None] * bundle.sens
    cut = slice(transient, None)
    eps = bundle.eps[cut]
    sigma2 = bundle.sigma2[cut]
    z = sens2[cut] / (2.0 * sigma2)[:, None]
    n = len(eps)
    phi = _noise.cf(nodes, noise)
    e = np.exp(1j * np.multiply.outer(eps, nodes))
    d = e - phi
    h_bar = np.einsum('nk,nj->kj', d, z).reshape(-1) / n
    m = z.T.dot(z) / n
    if not jacobian:
        return h_bar, None, m
    zz = np.einsum('nj,nl->njl', z, z)
    dz = hess[cut] / (2.0 * sigma2)[:, None, None] - 2.0 * zz
    jac = -1j * nodes[:, None, None] * np.einsum('nk,njl->kjl', e * eps[:, None], zz) / n + \
        np.einsum('nk,njl->kjl', d, dz) / n
    return h_bar, jac.reshape(len(nodes) * params.p, params.p), m


def scores(params, y, grid, noise, transient=100):
    # type: (GarchParams, np.array, UGrid, _noise.NoiseModel, int) -> (np.array, np.array)
    """
    Averaged stacked scores and their analytic Jacobian.

    The Jacobian uses d eps_n / d theta = -eps_n sigma_theta,n / sigma_n and
    the second-order sensitivity filter for d(sigma_theta / sigma).
    :param params: GarchParams
    :param y: observations
    :param grid: UGrid
    :param noise: assumed NoiseModel
    :param transient: leading filter steps excluded
    :return: (h_bar of length p M, jac of shape p M x p)
    """
    h_bar, jac, _ = _score_terms(params, y, grid.nodes, noise, transient)
    return h_bar, jac


def m_hat(params, y, transient=100):
    """
    M_hat(theta) = (1/N) sum sigma_theta sigma_theta^T / sigma^2.
    """
    y = _usable(params, y, transient)
    bundle = filter_series(params, y)
    sens = bundle.sens[transient:] / np.sqrt(bundle.sigma2[transient:])[:, None]
    return sens.T.dot(sens) / len(sens)


def objective(params, y, grid, noise, K, transient=100):
    """
    Q_N = h^* K^{-1} h and its half-gradient Re(h_theta^* K^{-1} h).
    :param K: Hermitian matrix or WeightMatrix of size p M
    :return: (Q_N, half_grad)
    """
    weight = _as_weight(K)
    h_bar, jac = scores(params, y, grid, noise, transient)
    wh = weight.solve(h_bar)
    return float(np.vdot(h_bar, wh).real), np.real(jac.conj().T.dot(wh))


@dataclass(frozen=True, eq=False)
class ScoreSystem:
    """
    Scores, Jacobian and weighting at one theta.
    """
    grid: UGrid
    h_bar: np.ndarray
    jac: np.ndarray
    C: np.ndarray
    M_hat: np.ndarray
    K: np.ndarray
    weight: WeightMatrix

    @property
    def objective(self):
        return self.weight.quad_form(self.h_bar)

    @property
    def half_grad(self):
        return np.real(self.jac.conj().T.dot(self.weight.solve(self.h_bar)))


def score_system(params, y, grid, noise, weighting='optimal', ridge=None, transient=100):
    """
    Build the ScoreSystem at params, K = C kron M_hat(params) or the identity.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError('unknown weighting {!r}'.format(weighting))
    h_bar, jac, m = _score_terms(params, y, grid.nodes, noise, transient)
    C = c_matrix(grid, noise)
    if weighting == 'optimal':
        K = np.kron(C, m)
        weight = WeightMatrix(K, ridge)
    else:
        K = np.eye(len(h_bar))
        weight = WeightMatrix.identity(len(h_bar))
    return ScoreSystem(grid, h_bar, jac, C, m, K, weight)


def _m_factor(M_star):
    M_star = np.asarray(M_star, dtype=float)
    try:
        return scipy.linalg.cho_factor(0.5 * (M_star + M_star.T))
    except np.linalg.LinAlgError:
        raise SingularWeighting('M* is not positive definite',
                                float(np.linalg.cond(M_star)))


def efficiency_score(grid, noise, ridge=None):
    """
    phi^* C^{-1} phi with phi_k = u_k phi'(u_k).
    :return: (score, WeightMatrix of C)
    """
    weight = WeightMatrix(c_matrix(grid, noise), ridge)
    phi = _phi_vector(grid.nodes, noise)
    return weight.quad_form(phi), weight


def asymptotic_covariance(grid, noise, M_star, ridge=None):
    # type: (UGrid, _noise.NoiseModel, np.array, float) -> (np.array, float)
    """
    Sigma = (phi^* C^{-1} phi)^{-1} M*^{-1}, the covariance of
    sqrt(N)(theta_hat - theta*) under K = C kron M*.
    :param grid: UGrid
    :param noise: NoiseModel
    :param M_star: positive definite p x p
    :param ridge: ridge for C, None for the automatic rule
    :return: (Sigma, phi^* C^{-1} phi)
    """
    factor = _m_factor(M_star)
    score, _ = efficiency_score(grid, noise, ridge)
    m_inv = scipy.linalg.cho_solve(factor, np.eye(factor[0].shape[0]))
    sigma = m_inv / score
    return 0.5 * (sigma + sigma.T), score


def sandwich_covariance(grid, noise, M_star, K):
    """
    Covariance of sqrt(N)(theta_hat - theta*) for an arbitrary weighting.

    The estimator solves Re(G^* W h) = 0 with W = K^{-1} and
    G = E[jac] = -phi kron M*, so with B = G^* W and R = Re(B G)

        Sigma = R^{-1} (1/2) Re(B Omega B^* + B Omega~ B^T) R^{-1}

    where Omega = C kron M* and Omega~ = C~ kron M* is the pseudo-covariance.
    """
    weight = _as_weight(K)
    M_star = np.asarray(M_star, dtype=float)
    phi = _phi_vector(grid.nodes, noise)
    G = -np.kron(phi[:, None], M_star)
    if weight.size != G.shape[0]:
        raise ValueError('weighting has size {:d}, expected {:d}'.format(weight.size, G.shape[0]))
    B = weight.solve(G).conj().T
    R = np.real(B.dot(G))
    omega = np.kron(c_matrix(grid, noise), M_star)
    omega_t = np.kron(pseudo_c_matrix(grid, noise), M_star)
    S = 0.5 * np.real(B.dot(omega).dot(B.conj().T) + B.dot(omega_t).dot(B.T))
    R_inv = np.linalg.inv(R)
    sigma = R_inv.dot(S).dot(R_inv.T)
    return 0.5 * (sigma + sigma.T)


def efficiency_table(noise, grid_family):
    """
    phi^* C^{-1} phi over nested grids, one row per grid.

    The ridge is chosen once on the largest grid and applied to every grid,
    so the values are nondecreasing along the family.
    :return: list of dicts with keys M, score, ridge, condition
    """
    grids = list(grid_family)
    if not grids:
        raise ValueError('empty grid family')
    for small, big in zip(grids[:-1], grids[1:]):
        if not small.is_nested_in(big):
            raise ValueError('grids are not nested: {} then {}'.format(small.points, big.points))
    ridge = WeightMatrix(c_matrix(grids[-1], noise)).ridge
    rows = []
    for grid in grids:
        score, weight = efficiency_score(grid, noise, ridge)
        rows.append({'M': grid.size, 'score': score, 'ridge': weight.ridge,
                     'condition': weight.condition})
    return rows


def efficiency_bound(noise, grid_family):
    """
    Sequence of phi^* C^{-1} phi over nested grids, increasing toward the
    scale Fisher information mu.
    """
    return [row['score'] for row in efficiency_table(noise, grid_family)]


def error_decomposition(params_true, y, grid, noise, K, transient=100):
    """
    Linear term -R_G^{-1} Re(G^* K^{-1} h(theta*)) of the estimation error,
    with G the score Jacobian at theta* and R_G = Re(G^* K^{-1} G).
    """
    weight = _as_weight(K)
    h_bar, jac = scores(params_true, y, grid, noise, transient)
    B = weight.solve(jac).conj().T
    R = np.real(B.dot(jac))
    return -np.linalg.solve(R, np.real(B.dot(h_bar)))


@dataclass
class EstimationResult:
    """
    Outcome of ecf.estimate (and, with method 'ml', of mle.ml_estimate).
    """
    method: str
    theta: GarchParams
    asympt_cov: np.ndarray
    cov: np.ndarray
    objective: float
    half_grad_norm: float
    iterations: int
    converged: bool
    boundary_stall: bool
    condition1_violation: bool
    n_obs: int
    m_hat: np.ndarray
    sandwich_cov: np.ndarray = None
    efficiency_score: float = None
    grid: UGrid = None
    theta_pre: GarchParams = None
    trace: list = field(default_factory=list)
    ridge_events: list = field(default_factory=list)

    def to_dict(self):
        def arr(x):
            return None if x is None else np.asarray(x).tolist()

        return {
            'method': self.method,
            'theta': dict(zip(self.theta.names, self.theta.as_array().tolist())),
            'theta_array': self.theta.as_array().tolist(),
            'asympt_cov': arr(self.asympt_cov),
            'cov': arr(self.cov),
            'sandwich_cov': arr(self.sandwich_cov),
            'efficiency_score': self.efficiency_score,
            'objective': self.objective,
            'half_grad_norm': self.half_grad_norm,
            'iterations': self.iterations,
            'converged': self.converged,
            'boundary_stall': self.boundary_stall,
            'condition1_violation': self.condition1_violation,
            'n_obs': self.n_obs,
            'm_hat': arr(self.m_hat),
            'trace': self.trace,
            'grid': None if self.grid is None else self.grid.to_config(),
            'ridge_events': self.ridge_events,
            'theta_pre': None if self.theta_pre is None else self.theta_pre.as_array().tolist(),
        }


def _stage(y, noise, grid, weight, theta0, opts, r, s, label, extra_starts=()):
    nodes = grid.nodes

    def evaluate(theta, curvature):
        params = GarchParams.from_array(theta, r, s)
        h_bar, jac, _ = _score_terms(params, y, nodes, noise, opts.transient)
        B = weight.solve(jac).conj().T
        value = float(np.vdot(h_bar, weight.solve(h_bar)).real)
        grad = 2.0 * np.real(B.dot(h_bar))
        return value, grad, 2.0 * np.real(B.dot(jac)) if curvature else None

    return solver.multistart(evaluate, theta0, n_starts=opts.n_starts, seed=opts.seed,
                             gtol=2.0 * opts.gtol, max_iter=opts.max_iter,
                             extra_starts=extra_starts, label=label)


def check_outcome(best, strict, label):
    """
    Raise or log a non-converged or boundary outcome.
    """
    if best.boundary:
        msg = '{:s}: solution on the boundary of the parameter domain: {}'.format(
            label, best.theta)
        if strict:
            raise BoundaryStall(msg)
        logger.warning(msg)
    if not best.converged:
        msg = '{:s}: gradient norm {:.3e} after {:d} iterations ({:s})'.format(
            label, best.grad_norm, best.iterations, best.message)
        if strict:
            raise NoConvergence(msg)
        logger.warning(msg)


def estimate(y, noise, grid=None, opts=None, order=(1, 1)):
    """
    Two-step ECF estimate.

    Stage A minimizes Q_N with K = I from the moment-matched start; stage B
    rebuilds K = C kron M_hat(theta_pre) and solves again from theta_pre and
    from the moment-matched start. Both stages prefer converged interior roots
    over a lower cost.
    :param y: observations, at least 500
    :param noise: assumed NoiseModel
    :param grid: UGrid, default UGrid.default()
    :param opts: EcfOptions
    :param order: (r, s)
    :return: EstimationResult
    """
    grid = UGrid.default() if grid is None else grid
    opts = EcfOptions() if opts is None else opts
    r, s = (int(v) for v in order)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or len(y) < MIN_OBSERVATIONS:
        raise InsufficientData('ECF estimation needs at least {:d} observations, got {:d}'.format(
            MIN_OBSERVATIONS, len(y)))
    p = 1 + r + s
    if grid.size < p:
        raise ValueError('grid has {:d} moment nodes, fewer than the {:d} parameters'.format(
            grid.size, p))

    trace, ridge_events = [], []
    weight = WeightMatrix.identity(grid.size * p)
    theta_start = solver.initial_point(y, r, s)
    best, outcomes, distinct = _stage(y, noise, grid, weight, theta_start, opts, r, s, 'ecf pre')
    trace.extend(dict(o.to_dict(), stage='pre') for o in outcomes)
    theta_pre = GarchParams.from_array(best.theta, r, s)
    if opts.weighting == 'optimal':
        check_outcome(best, False, 'ecf pre')
        m_pre = m_hat(theta_pre, y, opts.transient)
        weight = WeightMatrix(np.kron(c_matrix(grid, noise), m_pre), opts.ridge)
        if weight.ridge:
            ridge_events.append(weight.ridge_event('optimal'))
        best, outcomes, distinct = _stage(y, noise, grid, weight, best.theta, opts, r, s,
                                          'ecf optimal', extra_starts=[theta_start])
        trace.extend(dict(o.to_dict(), stage='optimal') for o in outcomes)
    check_outcome(best, opts.strict, 'ecf')

    theta_hat = GarchParams.from_array(best.theta, r, s)
    n_eff = len(y) - opts.transient
    m = m_hat(theta_hat, y, opts.transient)
    score = None
    try:
        sandwich = sandwich_covariance(grid, noise, m, weight)
        if opts.weighting == 'optimal':
            sigma, score = asymptotic_covariance(grid, noise, m, opts.ridge)
        else:
            sigma = sandwich
            score = efficiency_score(grid, noise, opts.ridge)[0]
    except (SingularWeighting, np.linalg.LinAlgError) as ex:
        if opts.strict:
            raise
        logger.warning('covariance unavailable at %s: %s', theta_hat.as_array(), ex)
        sandwich = sigma = np.full((p, p), np.nan)
    logger.info('ecf estimate %s, Q = %.4g, converged %s',
                np.array2string(theta_hat.as_array(), precision=5), best.value, best.converged)
    return EstimationResult(
        method='ecf', theta=theta_hat, asympt_cov=sigma, cov=sigma / n_eff,
        objective=best.value, half_grad_norm=0.5 * best.grad_norm,
        iterations=best.iterations, converged=best.converged,
        boundary_stall=best.boundary, condition1_violation=distinct, n_obs=n_eff,
        m_hat=m, sandwich_cov=sandwich, efficiency_score=score, grid=grid,
        theta_pre=theta_pre, trace=trace, ridge_events=ridge_events)

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
