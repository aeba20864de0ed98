"""
GARCH(r, s) parameters, simulation and the volatility inversion filters.

The model is

    y_n = sigma_n dL_n
    sigma_n^2 = alpha0 + sum_i alpha_i y_{n-i}^2 + sum_j beta_j sigma_{n-j}^2

The first observation is time 0. The inverse filter starts from
y_n = 0 for n < 0 and sigma_n^2 = gamma for n <= 0, gamma being the
stationary variance alpha0 / (1 - sum alpha - sum beta).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import noise as _noise
from .errors import InsufficientData, NonPositiveVolatility, NonStationary

# pylint: disable=invalid-name, too-many-arguments, too-many-locals

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GarchParams:
    """
    Parameter vector theta = (alpha0, alpha_1..alpha_r, beta_1..beta_s).

    Positivity is enforced on construction; stationarity is checked by the
    operations that need it so that boundary cases can still be described.
    """
    alpha0: float
    alpha: tuple
    beta: tuple = ()

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        beta = tuple(float(b) for b in np.atleast_1d(self.beta)) \
            if np.size(self.beta) else ()
        alpha0 = float(self.alpha0)
        if len(alpha) < 1:
            raise ValueError('GARCH order r must be at least 1')
        if not np.isfinite(alpha0) or alpha0 <= 0:
            raise ValueError('alpha0 must be positive, got {!r}'.format(self.alpha0))
        if not all(np.isfinite(alpha + beta)) or min(alpha + beta) < 0:
            raise ValueError('alpha and beta must be finite and non-negative: '
                             '{} {}'.format(alpha, beta))
        object.__setattr__(self, 'alpha0', alpha0)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'beta', beta)

    @property
    def r(self):
        return len(self.alpha)

    @property
    def s(self):
        return len(self.beta)

    @property
    def p(self):
        return 1 + self.r + self.s

    @property
    def persistence(self):
        return sum(self.alpha) + sum(self.beta)

    @property
    def is_stationary(self):
        return self.persistence < 1.0

    @property
    def names(self):
        return ['alpha0'] + ['alpha{:d}'.format(i + 1) for i in range(self.r)] + \
            ['beta{:d}'.format(j + 1) for j in range(self.s)]

    def check_stationary(self):
        if not self.is_stationary:
            raise NonStationary(
                'sum(alpha) + sum(beta) = {:.6g} >= 1'.format(self.persistence))

    @property
    def gamma(self):
        """
        Stationary variance alpha0 / (1 - sum alpha - sum beta).
        """
        self.check_stationary()
        return self.alpha0 / (1.0 - self.persistence)

    def gamma_gradient(self):
        """
        d gamma / d theta.
        """
        slack = 1.0 - self.persistence
        grad = np.full(self.p, self.alpha0 / slack ** 2)
        grad[0] = 1.0 / slack
        return grad

    def gamma_hessian(self):
        """
        d^2 gamma / d theta d theta.
        """
        slack = 1.0 - self.persistence
        hess = np.full((self.p, self.p), 2.0 * self.alpha0 / slack ** 3)
        hess[0, :] = 1.0 / slack ** 2
        hess[:, 0] = 1.0 / slack ** 2
        hess[0, 0] = 0.0
        return hess

    def as_array(self):
        return np.array((self.alpha0,) + self.alpha + self.beta)

    @classmethod
    def from_array(cls, theta, r, s):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (1 + r + s,):
            raise ValueError('expected {:d} parameters, got shape {}'.format(
                1 + r + s, theta.shape))
        return cls(theta[0], tuple(theta[1:1 + r]), tuple(theta[1 + r:]))

    def to_config(self):
        return {'alpha0': self.alpha0, 'alpha': list(self.alpha), 'beta': list(self.beta)}

    @classmethod
    def from_config(cls, cfg):
        # type: (dict) -> GarchParams
        """
        Build from {"alpha0": ..., "alpha": [...], "beta": [...]}.
        """
        try:
            return cls(cfg['alpha0'], tuple(cfg['alpha']), tuple(cfg.get('beta', ())))
        except (KeyError, TypeError) as ex:
            raise ValueError('bad GARCH parameter config {!r}: {}'.format(cfg, ex))


@dataclass(frozen=True, eq=False)
class SeriesBundle:
    """
    Aligned filter outputs for one series at one theta.

    sens holds d sigma_n / d theta (not of sigma_n^2).
    """
    y: np.ndarray
    sigma2: np.ndarray
    sens: np.ndarray
    eps: np.ndarray

    def __len__(self):
        return len(self.y)


def stationary_variance(params):
    # type: (GarchParams) -> float
    """
    gamma = alpha0 / (1 - sum alpha - sum beta).
    """
    return params.gamma


def _check_series(params, y):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError('series must be one dimensional, got shape {}'.format(y.shape))
    need = max(params.r, params.s) + 1
    if len(y) < need:
        raise InsufficientData(
            'GARCH({:d},{:d}) needs at least {:d} observations, got {:d}'.format(
                params.r, params.s, need, len(y)))
    if not np.all(np.isfinite(y)):
        raise ValueError('series contains non-finite values')
    return y


def _lagged(x, lags, fill):
    """
    Matrix L with L[n, i - 1] = x[n - i], fill where n - i < 0.
    """
    x = np.asarray(x)
    out = np.empty((len(x), lags) + x.shape[1:])
    for i in range(1, lags + 1):
        out[:i, i - 1] = fill
        out[i:, i - 1] = x[:-i]
    return out


def _ar_filter(u, beta, init):
    """
    out[0] = init, out[n] = u[n] + sum_j beta_j out[n - j] for n >= 1,
    with out[m] = init for m <= 0. Works along axis 0 of any shape.
    """
    u = np.asarray(u, dtype=float)
    init = np.broadcast_to(np.asarray(init, dtype=float), u.shape[1:])
    out = np.empty_like(u)
    out[0] = init
    if len(u) == 1:
        return out
    s = len(beta)
    if s == 0:
        out[1:] = u[1:]
        return out
    b = np.ones(1)
    a = np.concatenate(([1.0], -np.asarray(beta, dtype=float)))
    # zi is linear in the past outputs
    zi_unit = scipy.signal.lfiltic(b, a, np.ones(s))
    zi = np.multiply.outer(zi_unit, init.reshape(-1))
    x = u[1:].reshape(len(u) - 1, -1)
    filtered, _ = scipy.signal.lfilter(b, a, x, axis=0, zi=zi)
    out[1:] = filtered.reshape(u[1:].shape)
    return out


def _sigma2(params, y):
    gamma = params.gamma
    y2_lags = _lagged(y * y, params.r, 0.0)
    sigma2 = _ar_filter(params.alpha0 + y2_lags.dot(params.alpha), params.beta, gamma)
    if not np.all(sigma2 > 0):
        raise NonPositiveVolatility('sigma^2 <= 0 at index {:d}'.format(
            int(np.argmin(sigma2 > 0))))
    return sigma2, y2_lags


def _first_order(params, y):
    sigma2, y2_lags = _sigma2(params, y)
    inputs = np.empty((len(y), params.p))
    inputs[:, 0] = 1.0
    inputs[:, 1:1 + params.r] = y2_lags
    if params.s:
        inputs[:, 1 + params.r:] = _lagged(sigma2, params.s, params.gamma)
    sens2 = _ar_filter(inputs, params.beta, params.gamma_gradient())
    return sigma2, sens2


def invert_volatility(params, y):
    # type: (GarchParams, np.array) -> np.array
    """
    Recover sigma_n^2(theta) from observations by the inverse recursion.
    :param params: GarchParams, stationary
    :param y: observations y_0..y_{N-1}
    :return: sigma^2 array of length N
    """
    y = _check_series(params, y)
    return _sigma2(params, y)[0]


def residuals(params, y):
    """
    Estimated driving noise eps_n = y_n / sigma_n(theta).
    """
    y = _check_series(params, y)
    return y / np.sqrt(_sigma2(params, y)[0])


def sensitivity_filter(params, y):
    """
    Analytic first derivatives of the inverse filter.

    d sigma_n^2 / d theta follows the recursion obtained by differentiating
    the sigma^2 recursion, started from d gamma / d theta for n <= 0.
    :param params: GarchParams in the interior of the stationary domain
    :param y: observations
    :return: (sigma2, sens_sigma2, sens_sigma) with sens arrays N x p
    """
    y = _check_series(params, y)
    sigma2, sens2 = _first_order(params, y)
    return sigma2, sens2, sens2 / (2.0 * np.sqrt(sigma2))[:, None]


def second_sensitivity_filter(params, y):
    """
    Second derivatives d^2 sigma_n^2 / d theta d theta, shape N x p x p.
    """
    y = _check_series(params, y)
    return _second_order(params, y)[2]


def _second_order(params, y):
    sigma2, sens2 = _first_order(params, y)
    N, p, r = len(y), params.p, params.r
    inputs = np.zeros((N, p, p))
    if params.s:
        sens2_lags = _lagged(sens2, params.s, params.gamma_gradient())
        for j in range(params.s):
            k = 1 + r + j
            inputs[:, k, :] += sens2_lags[:, j]
            inputs[:, :, k] += sens2_lags[:, j]
    hess = _ar_filter(inputs, params.beta, params.gamma_hessian())
    return sigma2, sens2, hess


def filter_series(params, y, second_order=False):
    """
    Run the inverse filter once and return a SeriesBundle.

    With second_order=True the tuple (bundle, sens_sigma2, hess_sigma2) is
    returned for callers that need the raw sigma^2 derivatives.
    """
    y = _check_series(params, y)
    if second_order:
        sigma2, sens2, hess = _second_order(params, y)
    else:
        sigma2, sens2 = _first_order(params, y)
    sigma = np.sqrt(sigma2)
    bundle = SeriesBundle(y=y, sigma2=sigma2, sens=sens2 / (2.0 * sigma)[:, None],
                          eps=y / sigma)
    if second_order:
        return bundle, sens2, hess
    return bundle


def simulate(params, noise, n, burn_in=1000, seed=0, innovations=None):
    """
    Simulate a GARCH path started at the stationary mean.

    :param params: stationary GarchParams
    :param noise: NoiseModel of the driving increments
    :param n: number of samples returned
    :param burn_in: leading samples discarded
    :param seed: non-negative integer seed or numpy Generator
    :param innovations: optional pre-drawn increments of length n + burn_in,
        used instead of sampling the noise model
    :return: (y, sigma2_true), each of length n
    """
    gamma = params.gamma
    if int(n) < 1 or int(burn_in) < 0:
        raise ValueError('need n >= 1 and burn_in >= 0, got {!r}, {!r}'.format(n, burn_in))
    n, burn_in = int(n), int(burn_in)
    total = n + burn_in
    if innovations is None:
        dl = _noise.sample(noise, total, seed)
    else:
        dl = np.asarray(innovations, dtype=float)
        if dl.shape != (total,):
            raise ValueError('innovations must have length n + burn_in = {:d}'.format(total))

    alpha0 = params.alpha0
    a, b = params.alpha, params.beta
    r, s = params.r, params.s
    y2_lags = [gamma] * r
    s2_lags = [gamma] * s
    y = np.empty(total)
    sigma2 = np.empty(total)
    for k in range(total):
        v = alpha0
        for i in range(r):
            v += a[i] * y2_lags[i]
        for j in range(s):
            v += b[j] * s2_lags[j]
        if not v > 0:
            raise NonPositiveVolatility('sigma^2 = {!r} at step {:d}'.format(v, k))
        yk = math.sqrt(v) * dl[k]
        y[k] = yk
        sigma2[k] = v
        y2_lags = [yk * yk] + y2_lags[:-1]
        if s:
            s2_lags = [v] + s2_lags[:-1]
    return y[burn_in:], sigma2[burn_in:]

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
