"""
Standardized Levy-increment noise laws.

Two families are provided, both with mean 0 and variance 1:

* ``gaussian``: characteristic function exp(-u^2/2), closed form density.
* ``vg``: symmetric Variance-Gamma with shape nu, drawn as sqrt(G) Z where
  G ~ Gamma(1/nu, nu) and Z ~ N(0, 1). Its characteristic function is
  (1 + nu u^2 / 2)^(-1/nu). Its density is obtained by Fourier inversion,
  and the scale Fisher information from the Bessel form of the density.
"""

import logging
import numbers
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special

from . import rng
from .errors import DensityUnavailable, QuadratureError

# pylint: disable=invalid-name, too-many-arguments

logger = logging.getLogger(__name__)

FAMILIES = ('gaussian', 'vg')

# trapezoidal Fourier inversion grid
INVERSION_U_MAX = 50.0
INVERSION_POINTS = 2 ** 14

_LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


@dataclass(frozen=True)
class NoiseModel:
    """
    A standardized noise law.

    :param family: 'gaussian' or 'vg'
    :param shape: Variance-Gamma nu, ignored (stored as 0) for gaussian
    """
    family: str = 'gaussian'
    shape: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError('unknown noise family {!r}, expected one of {}'.format(
                self.family, FAMILIES))
        if self.family == 'gaussian':
            object.__setattr__(self, 'shape', 0.0)
        else:
            shape = float(self.shape)
            if not np.isfinite(shape) or shape <= 0:
                raise ValueError('vg shape nu must be positive, got {!r}'.format(self.shape))
            object.__setattr__(self, 'shape', shape)

    @classmethod
    def gaussian(cls):
        return cls('gaussian')

    @classmethod
    def vg(cls, nu):
        return cls('vg', nu)

    @classmethod
    def from_config(cls, cfg):
        # type: (dict) -> NoiseModel
        """
        Build from {"family": "gaussian"} or {"family": "vg", "nu": 0.5}.
        """
        if not isinstance(cfg, dict) or 'family' not in cfg:
            raise ValueError('noise config needs a "family" key: {!r}'.format(cfg))
        family = str(cfg['family']).lower()
        if family == 'vg':
            if 'nu' not in cfg:
                raise ValueError('vg noise config needs "nu"')
            return cls.vg(cfg['nu'])
        return cls(family)

    def to_config(self):
        if self.family == 'vg':
            return {'family': 'vg', 'nu': self.shape}
        return {'family': self.family}

    @property
    def has_density(self):
        """
        True when a closed form density is implemented.
        """
        return self.family == 'gaussian'

    @property
    def m4(self):
        return self.moment(4)

    def moment(self, order):
        # type: (int) -> float
        """
        Raw moment E[X^order].
        """
        order = int(order)
        if order < 0:
            raise ValueError('moment order must be non-negative')
        if order % 2:
            return 0.0
        j = order // 2
        # E[Z^2j] = (2j - 1)!!
        value = float(np.prod(np.arange(2 * j - 1, 0, -2))) if j else 1.0
        if self.family == 'vg':
            # E[G^j] for G ~ Gamma(1/nu, nu)
            value *= float(np.prod([1.0 + i * self.shape for i in range(j)]))
        return value

    def __str__(self):
        if self.family == 'vg':
            return 'vg(nu={:g})'.format(self.shape)
        return self.family


def cf(u, model):
    """
    Characteristic function phi(u).
    :param u: real scalar or array
    :param model: NoiseModel
    :return: complex scalar or array
    """
    u = np.asarray(u, dtype=float)
    if model.family == 'gaussian':
        return np.exp(-0.5 * u * u) + 0j
    nu = model.shape
    return (1.0 + 0.5 * nu * u * u) ** (-1.0 / nu) + 0j


def cf_deriv(u, model):
    """
    Derivative d phi / du.
    """
    u = np.asarray(u, dtype=float)
    if model.family == 'gaussian':
        return -u * np.exp(-0.5 * u * u) + 0j
    nu = model.shape
    return -u * (1.0 + 0.5 * nu * u * u) ** (-1.0 / nu - 1.0) + 0j


def empirical_cf(u, x):
    """
    Empirical characteristic function (1/N) sum exp(i u x_n).
    :param u: real scalar or array of frequencies
    :param x: sample
    :return: complex value(s) shaped like u
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.exp(1j * np.multiply.outer(u, x)).mean(axis=-1)


def sample(model, n, seed):
    # type: (NoiseModel, int, int) -> np.array
    """
    Draw n i.i.d. standardized increments.
    :param model: NoiseModel
    :param n: sample size >= 1
    :param seed: non-negative integer seed or numpy Generator
    :return: array of length n
    """
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, numbers.Integral) or n < 1:
        raise ValueError('sample size must be a positive integer, got {!r}'.format(n))
    gen = rng.as_generator(seed)
    if model.family == 'gaussian':
        return gen.standard_normal(n)
    nu = model.shape
    g = gen.gamma(1.0 / nu, nu, n)
    return np.sqrt(g) * gen.standard_normal(n)


def log_density_score(x, model):
    """
    Log density and score f'/f.
    :param x: real scalar or array
    :return: (log f(x), f'(x)/f(x))
    """
    if not model.has_density:
        raise DensityUnavailable(
            'no closed form density for {:s} noise'.format(str(model)))
    x = np.asarray(x, dtype=float)
    return -0.5 * x * x - _LOG_SQRT_2PI, -x


def density_ratios(x, model):
    """
    Ratios (f'/f, f''/f) of a closed form density.
    """
    if not model.has_density:
        raise DensityUnavailable(
            'no closed form density for {:s} noise'.format(str(model)))
    x = np.asarray(x, dtype=float)
    return -x, x * x - 1.0


def _inversion_grid():
    return np.linspace(-INVERSION_U_MAX, INVERSION_U_MAX, INVERSION_POINTS)


def _invert(x, model, weight, chunk=256):
    """
    Re (1/2pi) int weight(u) phi(u) exp(-iux) du on the trapezoid grid.
    """
    u = _inversion_grid()
    phi_w = cf(u, model) * weight(u)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    flat = x.ravel()
    res = out.reshape(-1)
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk]
        kernel = np.exp(-1j * np.multiply.outer(xs, u))
        integral = scipy.integrate.trapezoid(kernel * phi_w, u, axis=-1)
        res[start:start + chunk] = integral.real / (2 * np.pi)
    return out


def density(x, model):
    """
    Density f(x): closed form for gaussian, Fourier inversion otherwise.
    """
    if model.has_density:
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x - _LOG_SQRT_2PI)
    out = _invert(x, model, lambda u: 1.0)
    return out if np.ndim(x) else float(out[0])


def density_deriv(x, model):
    """
    Derivative f'(x).
    """
    if model.has_density:
        x = np.asarray(x, dtype=float)
        return -x * np.exp(-0.5 * x * x - _LOG_SQRT_2PI)
    out = _invert(x, model, lambda u: -1j * u)
    return out if np.ndim(x) else float(out[0])


def inversion_normalization(model, half_width=40.0):
    # type: (NoiseModel, float) -> float
    """
    Mass of the inverted density on [-half_width, half_width].

    The x integral is done in closed form, int exp(-iux) dx = 2 sin(uL)/u,
    so only the trapezoid error in u is measured.
    """
    u = _inversion_grid()
    L = float(half_width)
    kernel = 2 * L * np.sinc(u * L / np.pi)
    return float(scipy.integrate.trapezoid(cf(u, model) * kernel, u).real / (2 * np.pi))


def quad(fun, a, b, tol=1e-7, **kwargs):
    """
    scipy.integrate.quad that raises QuadratureError on an inaccurate result.
    """
    res = scipy.integrate.quad(fun, a, b, full_output=1, **kwargs)
    value, abserr = res[0], res[1]
    if len(res) > 3:
        logger.debug('quad on [%s, %s]: %s', a, b, res[3])
    if not np.isfinite(value) or abserr > tol * max(1.0, abs(value)):
        raise QuadratureError('quadrature on [{}, {}] did not converge'.format(a, b), abserr)
    return value


def _vg_log_density(x, nu):
    """
    log f(x) of the standardized VG law from its normal variance-mixture form
    f(x) = 2 (nu x^2 / 2)^(a/2) K_a(c|x|) / (sqrt(2 pi) Gamma(1/nu) nu^(1/nu))
    with a = 1/nu - 1/2 and c = sqrt(2/nu). Valid for x != 0.
    """
    a, c = 1.0 / nu - 0.5, np.sqrt(2.0 / nu)
    z = c * np.abs(x)
    return (np.log(2.0) + 0.5 * a * np.log(0.5 * nu * x * x) + np.log(scipy.special.kve(a, z))
            - z - _LOG_SQRT_2PI - scipy.special.gammaln(1.0 / nu) - np.log(nu) / nu)


def _vg_score(x, nu):
    """
    f'(x)/f(x) = -sign(x) c K_{a-1}(c|x|) / K_a(c|x|).
    """
    a, c = 1.0 / nu - 0.5, np.sqrt(2.0 / nu)
    z = c * np.abs(x)
    return -np.sign(x) * c * scipy.special.kve(a - 1.0, z) / scipy.special.kve(a, z)


def fisher_scale(model):
    # type: (NoiseModel) -> float
    """
    Scale Fisher information mu = E[(f'/f)^2 X^2] - 1.

    Gaussian uses the closed form score. Variance-Gamma uses the Bessel
    form of its density and score on the half line, doubled by symmetry;
    [0, 1] is integrated separately since f is singular at 0 for nu > 2.
    :param model: NoiseModel
    :return: mu > 0
    """
    if model.has_density:
        def integrand(x):
            ratio = density_ratios(x, model)[0]
            return float(ratio * ratio * x * x * density(x, model))
        mu = quad(integrand, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12) - 1.0
        logger.debug('fisher_scale(%s) = %.12g', model, mu)
        return mu

    nu = model.shape

    def vg_integrand(x):
        if x == 0:
            return 0.0
        ratio = _vg_score(x, nu)
        return float(ratio * ratio * x * x * np.exp(_vg_log_density(x, nu)))

    half = (quad(vg_integrand, 0.0, 1.0, tol=1e-9, limit=200, epsabs=1e-13, epsrel=1e-11) +
            quad(vg_integrand, 1.0, np.inf, tol=1e-9, limit=200, epsabs=1e-13, epsrel=1e-11))
    mu = 2.0 * half - 1.0
    logger.debug('fisher_scale(%s) = %.12g', model, mu)
    if mu <= 0:
        raise QuadratureError('non-positive scale information {:g}'.format(mu), None)
    return mu


def fit_shape(x, family, grid=(0.5, 1.0, 1.5, 2.0), bounds=(1e-3, 10.0)):
    """
    i.i.d. ECF fit of the family shape parameter.

    Minimizes sum_k |ecf(u_k) - phi(u_k, eta)|^2 over the shape.
    :param x: i.i.d. sample, e.g. GARCH residuals
    :param family: noise family name
    :param grid: frequencies u_k
    :param bounds: search interval for the shape
    :return: fitted NoiseModel
    """
    if family == 'gaussian':
        return NoiseModel.gaussian()
    u = np.asarray(grid, dtype=float)
    target = empirical_cf(u, x)

    def cost(nu):
        return float(np.sum(np.abs(target - cf(u, NoiseModel.vg(nu))) ** 2))

    res = scipy.optimize.minimize_scalar(cost, bounds=bounds, method='bounded',
                                         options={'xatol': 1e-8})
    if not res.success:
        logger.warning('shape fit did not converge: %s', res.message)
    return NoiseModel.vg(res.x)

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
