"""
Monte Carlo studies and experiments.

Replication k of a study with master seed s simulates its series from
rng.stream(s, k), so results do not depend on the worker count. Studies
write estimates.csv, report.json (byte-deterministic) and report.meta.json
(timestamp and version) into the configured output directory.
"""

import datetime
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np
import pandas
from joblib import Parallel, delayed

from . import ecf, mle, rng
from . import noise as _noise
from ._version import __version__
from .config import StudyConfig
from .errors import ConfigError, GarchEcfError, StudyFailure
from .garch_core import residuals, simulate

# pylint: disable=invalid-name, too-many-arguments, too-many-locals

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.2
SHAPE_GRID = (0.5, 1.0, 1.5, 2.0)
FLOAT_FORMAT = '%.17g'


def _dump_json(obj, path):
    with open(path, 'w') as f:
        json.dump(obj, f, sort_keys=True, indent=2)
        f.write('\n')


def _write_meta(path, cfg=None, **extra):
    meta = {
        'created': datetime.datetime.now(datetime.timezone.utc).isoformat(),
        'version': __version__,
    }
    if cfg is not None:
        meta['config'] = cfg.to_dict()
    meta.update(extra)
    _dump_json(meta, path)


def load_series(path):
    # type: (str) -> np.array
    """
    Read the y column of a series CSV written by cli_simulate, or the only
    column of a single-column CSV.
    """
    df = pandas.read_csv(path)
    if 'y' in df.columns:
        return df['y'].values.astype(float)
    if len(df.columns) == 1:
        return df.iloc[:, 0].values.astype(float)
    raise ValueError('{:s} has no "y" column: {}'.format(path, list(df.columns)))


def cli_simulate(cfg, out, n=None, seed=None):
    """
    Simulate one series of the configured model and write it as CSV
    (columns n, y, sigma2_true) with a sidecar out + '.meta.json'.
    :param cfg: StudyConfig
    :param out: CSV path
    :param n: sample size, default cfg.N
    :param seed: seed, default cfg.seed
    :return: out
    """
    n = cfg.N if n is None else n
    seed = cfg.seed if seed is None else seed
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ConfigError('sample size must be a positive integer, got {!r}'.format(n))
    try:
        seed = rng.check_seed(seed)
    except ValueError as ex:
        raise ConfigError(str(ex))
    y, sigma2_true = simulate(cfg.model, cfg.noise_true, n, cfg.burn_in, rng.stream(seed))
    df = pandas.DataFrame({'n': np.arange(n), 'y': y, 'sigma2_true': sigma2_true})
    df.to_csv(out, index=False, float_format=FLOAT_FORMAT)
    _dump_json({
        'model': cfg.model.to_config(),
        'noise': cfg.noise_true.to_config(),
        'n': int(n),
        'burn_in': cfg.burn_in,
        'seed': seed,
        'version': __version__,
    }, out + '.meta.json')
    logger.info('wrote %d samples to %s', n, out)
    return out


def _ml_noise(noise):
    if noise.has_density:
        return noise
    logger.warning('no closed form density for %s, ML runs as Gaussian quasi-ML', noise)
    return _noise.NoiseModel.gaussian()


def estimate_series(cfg, y, method, noise=None):
    """
    Run one estimator on a series.
    :param cfg: StudyConfig supplying order, grid and solver options
    :param y: observations
    :param method: 'ecf' or 'ml'
    :param noise: assumed noise, default cfg.noise_assumed
    :return: EstimationResult or MlResult
    """
    noise = cfg.noise_assumed if noise is None else noise
    if method == 'ecf':
        return ecf.estimate(y, noise, cfg.grid, cfg.ecf_options, cfg.order)
    if method == 'ml':
        return mle.ml_estimate(y, _ml_noise(noise), cfg.ml_options, cfg.order)
    raise ValueError('unknown method {!r}'.format(method))


def _row(cfg, k, method, res=None, error=None, **extra):
    row = {'rep': k, 'method': method, 'ok': res is not None}
    names = cfg.model.names
    if res is None:
        row.update({'converged': False, 'boundary_stall': False,
                    'condition1_violation': False, 'iterations': 0,
                    'objective': np.nan, 'error': str(error)})
        row.update({name: np.nan for name in names})
    else:
        row.update({'converged': bool(res.converged),
                    'boundary_stall': bool(res.boundary_stall),
                    'condition1_violation': bool(res.condition1_violation),
                    'iterations': int(res.iterations),
                    'objective': float(res.objective), 'error': ''})
        row.update(dict(zip(names, res.theta.as_array())))
    row.update(extra)
    return row


def _replicate(cfg, k):
    y, _ = simulate(cfg.model, cfg.noise_true, cfg.N, cfg.burn_in, rng.stream(cfg.seed, k))
    try:
        m_star = ecf.m_hat(cfg.model, y, cfg.ecf_options.transient)
    except GarchEcfError as ex:
        logger.warning('replication %d: M at the true parameter failed: %s', k, ex)
        m_star = None
    rows = []
    for method in cfg.methods:
        try:
            rows.append(_row(cfg, k, method, estimate_series(cfg, y, method)))
        except GarchEcfError as ex:
            logger.warning('replication %d, %s failed: %s', k, method, ex)
            rows.append(_row(cfg, k, method, error=ex))
    return {'rep': k, 'rows': rows, 'm_star': m_star}


def _run_replications(cfg, fun):
    job_pool = Parallel(n_jobs=cfg.workers)
    return job_pool(delayed(fun)(cfg, k) for k in range(cfg.replications))


def _columns(cfg, extra=()):
    return ['rep', 'method', 'ok', 'converged', 'boundary_stall', 'condition1_violation'] + \
        list(cfg.model.names) + ['iterations', 'objective'] + list(extra) + ['error']


def _matrix(x):
    return None if x is None else np.asarray(x).tolist()


def _error_summary(theta_hat, theta_true, n_obs):
    """
    Mean, bias, Monte Carlo SE, N Cov and lag-one correlation of errors.
    """
    count = len(theta_hat)
    out = {'successes': count}
    if count == 0:
        out.update({'mean': None, 'bias': None, 'mc_se': None, 'empirical_cov': None,
                    'lag1_error_correlation': None})
        return out
    mean = theta_hat.mean(axis=0)
    out['mean'] = mean.tolist()
    out['bias'] = (mean - theta_true).tolist()
    if count < 2:
        out.update({'mc_se': None, 'empirical_cov': None, 'lag1_error_correlation': None})
        return out
    out['mc_se'] = (theta_hat.std(axis=0, ddof=1) / np.sqrt(count)).tolist()
    out['empirical_cov'] = (n_obs * np.atleast_2d(np.cov(theta_hat.T))).tolist()
    if count > 2:
        err = theta_hat - theta_true
        out['lag1_error_correlation'] = [
            float(np.corrcoef(err[:-1, j], err[1:, j])[0, 1]) for j in range(err.shape[1])]
    else:
        out['lag1_error_correlation'] = None
    return out


@dataclass
class StudyReport:
    """
    Estimates table plus the covariance comparison per method.
    """
    estimates: pandas.DataFrame
    methods: dict
    efficiency_ratio: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    m_star_mean: np.ndarray = None

    def to_dict(self):
        return {
            'methods': self.methods,
            'efficiency_ratio': self.efficiency_ratio,
            'failures': self.failures,
            'm_star_mean': _matrix(self.m_star_mean),
        }

    def write(self, output_dir, cfg=None):
        """
        Write estimates.csv, report.json and report.meta.json.
        """
        if not os.path.isdir(output_dir):
            os.makedirs(output_dir)
        self.estimates.to_csv(os.path.join(output_dir, 'estimates.csv'), index=False,
                              float_format=FLOAT_FORMAT)
        report = self.to_dict()
        if cfg is not None:
            report['config'] = cfg.to_dict()
        _dump_json(report, os.path.join(output_dir, 'report.json'))
        _write_meta(os.path.join(output_dir, 'report.meta.json'), cfg)


def _theoretical_cov(cfg, method, m_star):
    if m_star is None:
        return None, None
    try:
        if method == 'ecf':
            opts = cfg.ecf_options
            if opts.weighting == 'optimal':
                return ecf.asymptotic_covariance(cfg.grid, cfg.noise_assumed, m_star,
                                                 opts.ridge)[0], cfg.N - opts.transient
            weight = ecf.WeightMatrix.identity(cfg.grid.size * cfg.model.p)
            return ecf.sandwich_covariance(cfg.grid, cfg.noise_assumed, m_star, weight), \
                cfg.N - opts.transient
        mu = _noise.fisher_scale(_ml_noise(cfg.noise_assumed))
        return np.linalg.inv(m_star) / mu, cfg.N - cfg.ml_options.transient
    except (GarchEcfError, np.linalg.LinAlgError) as ex:
        logger.warning('theoretical %s covariance unavailable: %s', method, ex)
        return None, None


def _check_failures(cfg, failures, df, label):
    for method, count in failures.items():
        if count > MAX_FAILURE_FRACTION * cfg.replications:
            if cfg.output_dir:
                if not os.path.isdir(cfg.output_dir):
                    os.makedirs(cfg.output_dir)
                df.to_csv(os.path.join(cfg.output_dir, 'estimates.csv'), index=False,
                          float_format=FLOAT_FORMAT)
            raise StudyFailure('{:s}: {:d} of {:d} {:s} replications failed'.format(
                label, count, cfg.replications, method))


def run_mc_study(cfg, write=True):
    # type: (StudyConfig, bool) -> StudyReport
    """
    Simulate cfg.replications series, estimate each with the configured
    method(s) and compare N Cov(theta_hat) with the theoretical covariance.

    Failed replications are recorded and the study continues; more than 20%
    failures of a method raise StudyFailure.
    :param cfg: StudyConfig
    :param write: write the report files into cfg.output_dir
    :return: StudyReport
    """
    logger.info('mc study: %d replications of N = %d, method %s', cfg.replications, cfg.N,
                cfg.method)
    results = _run_replications(cfg, _replicate)
    rows = [row for res in results for row in res['rows']]
    df = pandas.DataFrame(rows, columns=_columns(cfg))
    failures = {m: int((~df[df.method == m].ok).sum()) for m in cfg.methods}
    _check_failures(cfg, failures, df, 'mc study')

    m_stars = [res['m_star'] for res in results if res['m_star'] is not None]
    m_star = np.mean(m_stars, axis=0) if m_stars else None
    theta_true = cfg.model.as_array()
    methods = {}
    for method in cfg.methods:
        ok = df[(df.method == method) & df.ok]
        theta_hat = ok[list(cfg.model.names)].values
        theo, n_obs = _theoretical_cov(cfg, method, m_star)
        summary = _error_summary(theta_hat, theta_true, n_obs or cfg.N)
        summary['theoretical_cov'] = _matrix(theo)
        summary['converged'] = int(ok.converged.sum())
        summary['boundary_stall'] = int(ok.boundary_stall.sum())
        summary['condition1_violation'] = int(ok.condition1_violation.sum())
        if theo is not None and summary['empirical_cov'] is not None:
            summary['cov_ratio'] = (np.diag(summary['empirical_cov']) / np.diag(theo)).tolist()
        else:
            summary['cov_ratio'] = None
        methods[method] = summary

    efficiency = {}
    if cfg.method == 'both':
        e, m = methods['ecf'], methods['ml']
        if e['theoretical_cov'] is not None and m['theoretical_cov'] is not None:
            efficiency['theoretical'] = (np.diag(e['theoretical_cov']) /
                                         np.diag(m['theoretical_cov'])).tolist()
        if e['empirical_cov'] is not None and m['empirical_cov'] is not None:
            efficiency['empirical'] = (np.diag(e['empirical_cov']) /
                                       np.diag(m['empirical_cov'])).tolist()

    report = StudyReport(estimates=df, methods=methods, efficiency_ratio=efficiency,
                         failures=failures, m_star_mean=m_star)
    if write:
        report.write(cfg.output_dir, cfg)
    return report


def run_efficiency_curve(noise, grid_family, out=None):
    """
    phi^* C^{-1} phi against mu over nested grids.
    :param noise: NoiseModel
    :param grid_family: nested UGrids
    :param out: optional CSV path (columns M, score, mu, ratio, ridge, condition)
    :return: pandas DataFrame
    """
    mu = _noise.fisher_scale(noise)
    df = pandas.DataFrame(ecf.efficiency_table(noise, grid_family))
    df['mu'] = mu
    df['ratio'] = df['score'] / mu
    df = df[['M', 'score', 'mu', 'ratio', 'ridge', 'condition']]
    if out is not None:
        df.to_csv(out, index=False, float_format=FLOAT_FORMAT)
        logger.info('wrote efficiency curve to %s', out)
    return df


def _three_stage_replicate(cfg, k):
    y, _ = simulate(cfg.model, cfg.noise_true, cfg.N, cfg.burn_in, rng.stream(cfg.seed, k))
    rows = []
    nu_hat = np.nan
    stage = 'qml'
    try:
        qml = mle.ml_estimate(y, _noise.NoiseModel.gaussian(), cfg.ml_options, cfg.order)
        stage = 'shape'
        eta = _noise.fit_shape(residuals(qml.theta, y), cfg.noise_assumed.family, SHAPE_GRID)
        nu_hat = eta.shape if eta.family == 'vg' else np.nan
        stage = 'ecf'
        res = ecf.estimate(y, eta, cfg.grid, cfg.ecf_options, cfg.order)
        rows.append(_row(cfg, k, 'three_stage', res, failed_stage='', nu_hat=nu_hat))
    except GarchEcfError as ex:
        logger.warning('replication %d: three-stage failed in %s: %s', k, stage, ex)
        rows.append(_row(cfg, k, 'three_stage', error=ex, failed_stage=stage, nu_hat=nu_hat))
    try:
        res = ecf.estimate(y, cfg.noise_true, cfg.grid, cfg.ecf_options, cfg.order)
        rows.append(_row(cfg, k, 'control', res, failed_stage='', nu_hat=np.nan))
    except GarchEcfError as ex:
        logger.warning('replication %d: control arm failed: %s', k, ex)
        rows.append(_row(cfg, k, 'control', error=ex, failed_stage='ecf', nu_hat=np.nan))
    return {'rep': k, 'rows': rows}


def run_three_stage_experiment(cfg, write=True):
    """
    Misspecification experiment.

    Each replication runs Gaussian quasi-ML, fits the assumed family's shape
    to the QML residuals by the i.i.d. c.f. fit (skipped for a Gaussian
    family), and re-estimates by ECF under the fitted noise. The control arm
    runs ECF with the true noise on the same series. The report gives bias,
    Monte Carlo SE and t statistics of both arms and the fitted shapes.
    :param cfg: StudyConfig with noise_true and noise_assumed
    :param write: write estimates.csv and report files into cfg.output_dir
    :return: report dict
    """
    if cfg.noise_true == cfg.noise_assumed:
        logger.info('three-stage with noise_true == noise_assumed, both arms are correctly '
                    'specified')
    results = _run_replications(cfg, _three_stage_replicate)
    rows = [row for res in results for row in res['rows']]
    df = pandas.DataFrame(rows, columns=_columns(cfg, ('failed_stage', 'nu_hat')))
    failures = {arm: int((~df[df.method == arm].ok).sum()) for arm in ('three_stage', 'control')}
    _check_failures(cfg, failures, df, 'three-stage')

    theta_true = cfg.model.as_array()
    arms = {}
    for arm in ('three_stage', 'control'):
        ok = df[(df.method == arm) & df.ok]
        summary = _error_summary(ok[list(cfg.model.names)].values, theta_true,
                                 cfg.N - cfg.ecf_options.transient)
        if summary['mc_se'] is not None:
            t = np.array(summary['bias']) / np.array(summary['mc_se'])
            summary['t_stat'] = t.tolist()
            summary['significant_bias'] = bool(np.any(np.abs(t) > 3.0))
        else:
            summary['t_stat'] = None
            summary['significant_bias'] = None
        summary['failed_stages'] = {
            str(k): int(v) for k, v in df[(df.method == arm) & ~df.ok].failed_stage
            .value_counts().items()}
        arms[arm] = summary

    nu = df[df.method == 'three_stage'].nu_hat.dropna().values
    report = {
        'arms': arms,
        'failures': failures,
        'noise_true': cfg.noise_true.to_config(),
        'noise_assumed': cfg.noise_assumed.to_config(),
        'shape_fit': {
            'count': int(len(nu)),
            'mean': float(nu.mean()) if len(nu) else None,
            'sd': float(nu.std(ddof=1)) if len(nu) > 1 else None,
        },
    }
    if write:
        if not os.path.isdir(cfg.output_dir):
            os.makedirs(cfg.output_dir)
        df.to_csv(os.path.join(cfg.output_dir, 'estimates.csv'), index=False,
                  float_format=FLOAT_FORMAT)
        _dump_json(dict(report, config=cfg.to_dict()),
                   os.path.join(cfg.output_dir, 'report.json'))
        _write_meta(os.path.join(cfg.output_dir, 'report.meta.json'), cfg)
    return report

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
