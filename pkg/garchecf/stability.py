"""
Random-matrix stability diagnostics of the GARCH state equation.

The state X_n = (y_n^2 .. y_{n-r+1}^2, sigma_n^2 .. sigma_{n-s+1}^2) obeys
X_{n+1} = A_{n+1} X_n + const with A_n = A0 + dL_n^2 A1: the first rows of
the (1,1) and (1,2) blocks carry alpha dL^2 and beta dL^2, the first row of
the sigma block carries (alpha, beta), the rest are shift matrices.
"""

import itertools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.special
import scipy.stats

from . import noise as _noise
from . import rng
from .errors import MomentUnavailable, SpectralRadiusError
from .garch_core import GarchParams

# pylint: disable=invalid-name, too-many-arguments, too-many-locals

logger = logging.getLogger(__name__)

POWER_CHECK_DIM = 64


@dataclass(frozen=True)
class StateMatrixSpec:
    """
    GARCH parameters together with the even noise moments m_2, m_4, ...
    """
    params: GarchParams
    noise_moments: dict = field(default_factory=dict)

    @classmethod
    def from_noise(cls, params, noise, max_order=8):
        # type: (GarchParams, _noise.NoiseModel, int) -> StateMatrixSpec
        moments = {k: noise.moment(k) for k in range(2, max_order + 1, 2)}
        return cls(params, moments)

    @property
    def dimension(self):
        return self.params.r + self.params.s

    def moment(self, order):
        """
        m_order, with m_0 = 1.
        """
        if order == 0:
            return 1.0
        try:
            return float(self.noise_moments[order])
        except KeyError:
            raise MomentUnavailable('noise moment m{:d} is not available'.format(order))

    def blocks(self):
        """
        (A0, A1) with A_n = A0 + dL_n^2 A1.
        """
        return _state_blocks(self.params)


def _state_blocks(params):
    r, s = params.r, params.s
    d = r + s
    w = np.concatenate((params.alpha, params.beta))
    A1 = np.zeros((d, d))
    A1[0, :] = w
    A0 = np.zeros((d, d))
    for i in range(1, r):
        A0[i, i - 1] = 1.0
    if s:
        A0[r, :] = w
        for j in range(1, s):
            A0[r + j, r + j - 1] = 1.0
    return A0, A1


def assemble_state_matrix(spec, dl2):
    """
    A_n for a given squared increment dL_n^2.
    """
    A0, A1 = spec.blocks()
    return A0 + dl2 * A1


def _kron_all(factors):
    out = np.ones((1, 1))
    for f in factors:
        out = np.kron(out, f)
    return out


def _expected_kron(A0, A1, q, moment):
    """
    E[(A0 + L A1)^{kron q}] with E[L^j] = moment(2 j).
    """
    d = A0.shape[0]
    out = np.zeros((d ** q, d ** q))
    for pattern in itertools.product((0, 1), repeat=q):
        j = sum(pattern)
        coef = moment(2 * j)
        if coef == 0:
            continue
        out += coef * _kron_all([A1 if bit else A0 for bit in pattern])
    return out


def _check_q(q):
    if q not in (1, 2, 4):
        raise ValueError('kronecker power q must be 1, 2 or 4, got {!r}'.format(q))


def expected_kron_power(spec, q):
    # type: (StateMatrixSpec, int) -> np.array
    """
    E[A^{kron q}], monomials (dL^2)^j replaced by the moment m_{2j}.
    :param spec: StateMatrixSpec
    :param q: 1, 2 or 4
    :return: (r+s)^q square matrix
    """
    _check_q(q)
    for j in range(1, q + 1):
        spec.moment(2 * j)
    A0, A1 = spec.blocks()
    return _expected_kron(A0, A1, q, spec.moment)


def _gelfand_radius(m, squarings=30):
    """
    Power-iteration estimate lim ||M^k||^(1/k) by repeated squaring.
    """
    b = np.array(m, dtype=float)
    # invariant: M^(2^i) = exp(log_scale) * b
    log_scale = 0.0
    for _ in range(squarings):
        nrm = np.linalg.norm(b)
        if nrm == 0:
            return 0.0
        b = b / nrm
        log_scale = 2.0 * (log_scale + np.log(nrm))
        b = b.dot(b)
    nrm = np.linalg.norm(b)
    if nrm == 0:
        return 0.0
    return float(np.exp((log_scale + np.log(nrm)) / 2.0 ** squarings))


def spectral_radius(m):
    # type: (np.array) -> float
    """
    Largest eigenvalue modulus.

    Matrices larger than 64 x 64 are cross-checked by power iteration and a
    disagreement is logged.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError('spectral radius needs a square matrix, got shape {}'.format(m.shape))
    if m.size == 0:
        return 0.0
    if not np.all(np.isfinite(m)):
        raise SpectralRadiusError('matrix has non-finite entries')
    try:
        rho = float(np.max(np.abs(np.linalg.eigvals(m))))
    except np.linalg.LinAlgError as ex:
        raise SpectralRadiusError('eigensolver failed on {}x{} matrix: {}'.format(
            m.shape[0], m.shape[1], ex))
    if m.shape[0] > POWER_CHECK_DIM:
        check = _gelfand_radius(m)
        if abs(check - rho) > 1e-4 * max(1.0, rho):
            logger.warning('spectral radius %.10g disagrees with power iteration %.10g',
                           rho, check)
    return rho


def _as_samples(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise ValueError('{:s} must be a matrix or a stack of matrices, got shape {}'.format(
            name, x.shape))
    return x


def _mean_kron_power(samples, q, chunk=4096):
    n, d, _ = samples.shape
    out = np.zeros((d ** q, d ** q))
    for start in range(0, n, chunk):
        batch = samples[start:start + chunk]
        power = batch
        for _ in range(q - 1):
            k = power.shape[1]
            power = np.einsum('nij,nkl->nikjl', power, batch).reshape(
                len(batch), k * d, k * d)
        out += power.sum(axis=0)
    return out / n


def block_triangular_radius_check(p1, p2, coupling, q):
    """
    Both sides of rho(E[P^{kron q}]) = max(rho(E[P1^{kron q}]), rho(E[P2^{kron q}]))
    for P = [[P1, 0], [coupling, P2]].

    Each argument is a single matrix (deterministic) or a stack of samples;
    expectations are sample means.
    :return: (lhs, rhs)
    """
    _check_q(q)
    p1 = _as_samples(p1, 'p1')
    p2 = _as_samples(p2, 'p2')
    coupling = _as_samples(coupling, 'coupling')
    d1, d2 = p1.shape[1], p2.shape[1]
    if p1.shape[1:] != (d1, d1) or p2.shape[1:] != (d2, d2):
        raise ValueError('diagonal blocks must be square: {} {}'.format(p1.shape, p2.shape))
    if coupling.shape[1:] != (d2, d1):
        raise ValueError('coupling must be {:d}x{:d}, got {}'.format(d2, d1, coupling.shape[1:]))
    counts = set(len(x) for x in (p1, p2, coupling)) - {1}
    if len(counts) > 1:
        raise ValueError('sample stacks have different lengths: {}'.format(sorted(counts)))
    n = counts.pop() if counts else 1

    full = np.zeros((n, d1 + d2, d1 + d2))
    full[:, :d1, :d1] = p1
    full[:, d1:, d1:] = p2
    full[:, d1:, :d1] = coupling
    lhs = spectral_radius(_mean_kron_power(full, q))
    rhs = max(spectral_radius(_mean_kron_power(p1, q)),
              spectral_radius(_mean_kron_power(p2, q)) if d2 else 0.0)
    return lhs, rhs


def _expanded_blocks(spec, theta):
    params = spec.params
    if (theta.r, theta.s) != (params.r, params.s):
        raise ValueError('theta order ({:d},{:d}) differs from the model ({:d},{:d})'.format(
            theta.r, theta.s, params.r, params.s))
    r, s = params.r, params.s
    d = r + s
    A0, A1 = spec.blocks()
    big0 = np.zeros((d + s, d + s))
    big1 = np.zeros((d + s, d + s))
    big0[:d, :d] = A0
    big1[:d, :d] = A1
    if s:
        big0[d, :r] = theta.alpha
        big0[d, d:] = theta.beta
        for j in range(1, s):
            big0[d + j, d + j - 1] = 1.0
    return big0, big1


def expanded_state_matrix(spec, theta, dl2):
    """
    Expanded transition [[A_n, 0], [M21(theta), M22(theta)]] of the state
    augmented with sigma_n^2(theta) .. sigma_{n-s+1}^2(theta).
    """
    big0, big1 = _expanded_blocks(spec, theta)
    return big0 + dl2 * big1


def expected_expanded_kron_power(spec, theta, q):
    _check_q(q)
    big0, big1 = _expanded_blocks(spec, theta)
    return _expected_kron(big0, big1, q, spec.moment)


def expanded_radius_check(spec, theta, q):
    """
    Exact block-triangular identity on the expanded transition.
    :return: (lhs, rhs) with rhs = max(rho(E[A^{kron q}]), rho(M22(theta))^q)
    """
    lhs = spectral_radius(expected_expanded_kron_power(spec, theta, q))
    rho_a = spectral_radius(expected_kron_power(spec, q))
    if spec.params.s:
        big0 = _expanded_blocks(spec, theta)[0]
        d = spec.dimension
        rho_m22 = spectral_radius(big0[d:, d:]) ** q
    else:
        rho_m22 = 0.0
    return lhs, max(rho_a, rho_m22)


@dataclass(frozen=True, eq=False)
class LyapunovFit:
    """
    Fitted decay rate of log E||P_n ... P_1||^q.
    """
    slope: float
    intercept: float
    rvalue: float
    stderr: float
    rho: float
    log_moments: np.ndarray


def estimate_lambda_q(spec, noise, q, n_max=60, reps=2000, seed=0, fit_start=None):
    """
    Monte Carlo estimate of lambda_q = lim (1/n) log E||A_n ... A_1||^q.

    Products are renormalized at every step and the log norms accumulated,
    so large n cannot overflow. The Frobenius norm is used.
    :param spec: StateMatrixSpec
    :param noise: NoiseModel driving dL_n
    :param q: moment order
    :param n_max: longest product
    :param reps: independent products
    :param seed: non-negative integer seed
    :param fit_start: first n used in the slope fit (default n_max // 5)
    :return: LyapunovFit, slope -inf when the products vanish
    """
    rho = spectral_radius(expected_kron_power(spec, q))
    if rho >= 1:
        warnings.warn('rho(E[A^kron {:d}]) = {:.4f} >= 1, the products do not decay '
                      'in q-th mean'.format(q, rho))
    A0, A1 = spec.blocks()
    d = spec.dimension
    dl = _noise.sample(noise, n_max * reps, rng.stream(seed))
    dl2 = (dl * dl).reshape(n_max, reps)

    prod = np.broadcast_to(np.eye(d), (reps, d, d)).copy()
    log_norm = np.zeros(reps)
    log_moments = np.empty(n_max)
    for n in range(n_max):
        prod = np.matmul(A0 + dl2[n][:, None, None] * A1, prod)
        nrm = np.linalg.norm(prod, axis=(1, 2))
        with np.errstate(divide='ignore'):
            log_norm = log_norm + np.log(nrm)
        alive = nrm > 0
        prod[alive] /= nrm[alive][:, None, None]
        log_moments[n] = scipy.special.logsumexp(q * log_norm) - np.log(reps)

    steps = np.arange(1, n_max + 1)
    if np.isneginf(log_moments[-1]):
        return LyapunovFit(-np.inf, -np.inf, 0.0, 0.0, rho, log_moments)
    start = n_max // 5 if fit_start is None else int(fit_start)
    fit = scipy.stats.linregress(steps[start:], log_moments[start:])
    logger.debug('lambda_%d fit: slope %.5g, r %.4f', q, fit.slope, fit.rvalue)
    return LyapunovFit(float(fit.slope), float(fit.intercept), float(fit.rvalue),
                       float(fit.stderr), rho, log_moments)


def polynomials_coprime(c, d, tol=1e-10):
    """
    Sylvester-resultant coprimality test.
    :param c: coefficients in ascending powers
    :param d: coefficients in ascending powers
    :param tol: relative tolerance on |resultant|
    :return: True when the resultant is non-zero beyond tolerance
    """
    c = np.trim_zeros(np.asarray(c, dtype=float), 'b')
    d = np.trim_zeros(np.asarray(d, dtype=float), 'b')
    if c.size == 0 or d.size == 0:
        return False
    m, n = c.size - 1, d.size - 1
    if m == 0 or n == 0:
        return True
    a, b = c[::-1], d[::-1]
    syl = np.zeros((m + n, m + n))
    for i in range(n):
        syl[i, i:i + m + 1] = a
    for i in range(m):
        syl[n + i, i:i + n + 1] = b
    scale = np.max(np.abs(a)) ** n * np.max(np.abs(b)) ** m
    return bool(abs(np.linalg.det(syl)) > tol * scale)


def check_coprime(params, tol=1e-10):
    # type: (GarchParams, float) -> bool
    """
    Coprimality of the alpha and beta polynomials of the backshift operator.

    With w the backshift, C(w) = alpha_1 w + .. + alpha_r w^r and
    D(w) = 1 - beta_1 w - .. - beta_s w^s. D(0) = 1, so the factor w of C
    never cancels and the test runs on C(w) / w. alpha = 0 is not coprime.
    """
    return polynomials_coprime(params.alpha,
                               np.concatenate(([1.0], -np.asarray(params.beta))), tol)


def stability_report(params, noise, n_max=60, reps=2000, seed=0):
    """
    Summary used by the command line ``stability`` subcommand.
    """
    spec = StateMatrixSpec.from_noise(params, noise)
    fit = estimate_lambda_q(spec, noise, 2, n_max=n_max, reps=reps, seed=seed)
    return {
        'rho_q1': spectral_radius(expected_kron_power(spec, 1)),
        'rho_q2': spectral_radius(expected_kron_power(spec, 2)),
        'rho_q4': spectral_radius(expected_kron_power(spec, 4)),
        'lambda2_hat': fit.slope,
        'lambda2_stderr': fit.stderr,
        'coprime': check_coprime(params),
    }

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
