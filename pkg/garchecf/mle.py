"""
Maximum likelihood baseline for GARCH under a known noise density.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import noise as _noise
from . import solver
from .ecf import MIN_OBSERVATIONS, check_outcome
from .errors import DensityUnavailable, InsufficientData, SingularWeighting
from .garch_core import GarchParams, filter_series

# pylint: disable=invalid-name, too-many-arguments, too-many-locals, too-many-instance-attributes

logger = logging.getLogger(__name__)


def _require_density(noise):
    if not noise.has_density:
        raise DensityUnavailable(
            'maximum likelihood needs a closed form density, {:s} has none'.format(str(noise)))


def _terms(params, y, noise, transient, second_order):
    y = np.asarray(y, dtype=float)
    if len(y) <= transient:
        raise InsufficientData('{:d} observations, transient {:d}'.format(len(y), transient))
    if second_order:
        bundle, sens2, hess = filter_series(params, y, second_order=True)
        hess = hess[transient:]
    else:
        bundle = filter_series(params, y)
        sens2 = 2.0 * np.sqrt(bundle.sigma2)[:, None] * bundle.sens
        hess = None
    sigma2 = bundle.sigma2[transient:]
    eps = bundle.eps[transient:]
    z = sens2[transient:] / (2.0 * sigma2)[:, None]
    return eps, sigma2, z, hess


def score_contributions(params, y, noise, transient=0):
    # type: (GarchParams, np.array, _noise.NoiseModel, int) -> np.array
    """
    Per-observation gradients l_theta,n = ((f'/f)(eps_n) eps_n + 1) sigma_theta,n / sigma_n.
    :return: N x p array
    """
    _require_density(noise)
    eps, _, z, _ = _terms(params, y, noise, transient, False)
    psi = _noise.log_density_score(eps, noise)[1]
    return (psi * eps + 1.0)[:, None] * z


def neg_log_likelihood(params, y, noise, hessian=False, transient=0):
    """
    Averaged negative log-likelihood (1/N) sum [-log f(eps_n) + log sigma_n].

    :param params: GarchParams
    :param y: observations
    :param noise: NoiseModel with a closed form density
    :param hessian: also return the analytic Hessian
    :param transient: leading observations left out
    :return: (value, grad) or (value, grad, hess)
    """
    _require_density(noise)
    eps, sigma2, z, H = _terms(params, y, noise, transient, hessian)
    log_f, psi = _noise.log_density_score(eps, noise)
    value = float(np.mean(-log_f + 0.5 * np.log(sigma2)))
    weight = psi * eps + 1.0
    grad = (weight[:, None] * z).mean(axis=0)
    if not hessian:
        return value, grad
    ratio2 = _noise.density_ratios(eps, noise)[1]
    dpsi = ratio2 - psi * psi
    zz = np.einsum('nj,nl->njl', z, z)
    dz = H / (2.0 * sigma2)[:, None, None] - 2.0 * zz
    hess = np.einsum('n,njl->jl', -(dpsi * eps + psi) * eps, zz) / len(eps) + \
        np.einsum('n,njl->jl', weight, dz) / len(eps)
    return value, grad, 0.5 * (hess + hess.T)


@dataclass(frozen=True)
class MlOptions:
    gtol: float = 1e-8
    max_iter: int = 200
    n_starts: int = 5
    transient: int = 0
    strict: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.gtol > 0:
            raise ValueError('gtol must be positive')
        if int(self.max_iter) < 1 or int(self.n_starts) < 1:
            raise ValueError('max_iter and n_starts must be at least 1')
        if int(self.transient) < 0:
            raise ValueError('transient must be non-negative')


@dataclass
class MlResult:
    """
    ML estimate with the asymptotic covariance mu^-1 M*^-1.
    """
    theta_hat: GarchParams
    neg_loglik: float
    mu: float
    M_star_hat: np.ndarray
    asympt_cov: np.ndarray
    cov: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    boundary_stall: bool
    condition1_violation: bool
    n_obs: int
    trace: list = field(default_factory=list)

    @property
    def theta(self):
        return self.theta_hat

    @property
    def objective(self):
        return self.neg_loglik

    def to_dict(self):
        theta = self.theta_hat.as_array()
        return {
            'method': 'ml',
            'theta': dict(zip(self.theta_hat.names, theta.tolist())),
            'theta_array': theta.tolist(),
            'asympt_cov': self.asympt_cov.tolist(),
            'cov': self.cov.tolist(),
            'sandwich_cov': None,
            'efficiency_score': None,
            'objective': self.neg_loglik,
            'neg_loglik': self.neg_loglik,
            'mu': self.mu,
            'half_grad_norm': None,
            'grad_norm': self.grad_norm,
            'iterations': self.iterations,
            'converged': self.converged,
            'boundary_stall': self.boundary_stall,
            'condition1_violation': self.condition1_violation,
            'n_obs': self.n_obs,
            'm_hat': self.M_star_hat.tolist(),
            'trace': self.trace,
            'grid': None,
            'ridge_events': [],
            'theta_pre': None,
        }


def ml_estimate(y, noise, opts=None, order=(1, 1)):
    """
    Minimize the negative log-likelihood under the ECF solver's constraints
    and multistart policy.
    :param y: observations, at least 500
    :param noise: NoiseModel with a closed form density
    :param opts: MlOptions
    :param order: (r, s)
    :return: MlResult
    """
    _require_density(noise)
    opts = MlOptions() if opts is None else opts
    r, s = (int(v) for v in order)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or len(y) < MIN_OBSERVATIONS:
        raise InsufficientData('ML estimation needs at least {:d} observations, got {:d}'.format(
            MIN_OBSERVATIONS, len(y)))

    def evaluate(theta, curvature):
        params = GarchParams.from_array(theta, r, s)
        if not curvature:
            value, grad = neg_log_likelihood(params, y, noise, transient=opts.transient)
            return value, grad, None
        value, grad, hess = neg_log_likelihood(params, y, noise, True, opts.transient)
        try:
            scipy.linalg.cholesky(hess)
        except np.linalg.LinAlgError:
            contrib = score_contributions(params, y, noise, opts.transient)
            hess = contrib.T.dot(contrib) / len(contrib)
        return value, grad, hess

    n_eff = len(y) - opts.transient
    best, outcomes, distinct = solver.multistart(
        evaluate, solver.initial_point(y, r, s), n_starts=opts.n_starts, seed=opts.seed,
        gtol=opts.gtol, max_iter=opts.max_iter, label='ml')
    check_outcome(best, opts.strict, 'ml')

    theta_hat = GarchParams.from_array(best.theta, r, s)
    mu = _noise.fisher_scale(noise)
    bundle = filter_series(theta_hat, y)
    sens = bundle.sens[opts.transient:] / np.sqrt(bundle.sigma2[opts.transient:])[:, None]
    m = sens.T.dot(sens) / len(sens)
    try:
        cov = scipy.linalg.cho_solve(scipy.linalg.cho_factor(m), np.eye(len(m))) / mu
    except np.linalg.LinAlgError:
        if opts.strict:
            raise SingularWeighting('M_hat is singular at the ML estimate',
                                    float(np.linalg.cond(m)))
        logger.warning('M_hat is singular at %s', theta_hat.as_array())
        cov = np.full(m.shape, np.nan)
    logger.info('ml estimate %s, nll = %.6g, converged %s',
                np.array2string(theta_hat.as_array(), precision=5), best.value, best.converged)
    return MlResult(
        theta_hat=theta_hat, neg_loglik=best.value, mu=mu, M_star_hat=m,
        asympt_cov=0.5 * (cov + cov.T), cov=0.5 * (cov + cov.T) / n_eff,
        grad_norm=best.grad_norm, iterations=best.iterations, converged=best.converged,
        boundary_stall=best.boundary, condition1_violation=distinct, n_obs=n_eff,
        trace=[o.to_dict() for o in outcomes])


def density_identities(noise):
    """
    E[(f'/f)(X) X] and E[(f''/f)(X) X^2] by quadrature, -1 and 2 for any
    regular density.
    """
    _require_density(noise)

    def first(x):
        return float(_noise.density_ratios(x, noise)[0] * x * _noise.density(x, noise))

    def second(x):
        return float(_noise.density_ratios(x, noise)[1] * x * x * _noise.density(x, noise))

    return (_noise.quad(first, -np.inf, np.inf, tol=1e-9, epsabs=1e-13, epsrel=1e-12),
            _noise.quad(second, -np.inf, np.inf, tol=1e-9, epsabs=1e-13, epsrel=1e-12))


def scale_fisher_identity_check(noise):
    # type: (_noise.NoiseModel) -> (float, float)
    """
    Both sides of E[(-(f'/f)(X) X - 1)^2] = E[(f'/f)^2 X^2] - 1, the scale
    Fisher information mu, by quadrature.
    :return: (lhs, rhs)
    """
    _require_density(noise)

    def lhs_fun(x):
        psi = _noise.density_ratios(x, noise)[0]
        return float((-psi * x - 1.0) ** 2 * _noise.density(x, noise))

    def rhs_fun(x):
        psi = _noise.density_ratios(x, noise)[0]
        return float(psi * psi * x * x * _noise.density(x, noise))

    lhs = _noise.quad(lhs_fun, -np.inf, np.inf, tol=1e-9, epsabs=1e-13, epsrel=1e-12)
    rhs = _noise.quad(rhs_fun, -np.inf, np.inf, tol=1e-9, epsabs=1e-13, epsrel=1e-12) - 1.0
    return lhs, rhs

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
