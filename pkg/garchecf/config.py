"""
JSON study configuration.

Example::

    {
      "model": {"alpha0": 0.1, "alpha": [0.2], "beta": [0.7]},
      "noise": {"family": "gaussian"},
      "N": 40000, "replications": 500, "seed": 1,
      "grid": "default", "method": "ecf", "output_dir": "study-out"
    }
"""

import json
import os
from dataclasses import dataclass, field

from . import rng
from .ecf import EcfOptions, MIN_OBSERVATIONS, UGrid
from .errors import ConfigError, NonStationary
from .garch_core import GarchParams
from .mle import MlOptions
from .noise import NoiseModel

# pylint: disable=invalid-name, too-many-instance-attributes

METHODS = ('ecf', 'ml', 'both')

_TOP_KEYS = {'model', 'noise', 'noise_true', 'noise_assumed', 'N', 'replications', 'seed',
             'burn_in', 'grid', 'method', 'output_dir', 'workers', 'solver'}
_SOLVER_KEYS = {'weighting', 'gtol', 'max_iter', 'ridge', 'n_starts', 'transient', 'strict'}


@dataclass(frozen=True)
class StudyConfig:
    """
    Everything a Monte Carlo study needs, validated.
    """
    model: GarchParams
    noise_true: NoiseModel
    noise_assumed: NoiseModel = None
    N: int = 20000
    replications: int = 1
    grid: UGrid = field(default_factory=UGrid.default)
    method: str = 'ecf'
    seed: int = 0
    output_dir: str = 'garchecf-out'
    burn_in: int = 1000
    workers: int = 1
    ecf_options: EcfOptions = field(default_factory=EcfOptions)
    ml_options: MlOptions = field(default_factory=MlOptions)

    def __post_init__(self):
        if self.noise_assumed is None:
            object.__setattr__(self, 'noise_assumed', self.noise_true)
        if self.method not in METHODS:
            raise ConfigError('method must be one of {}, got {!r}'.format(METHODS, self.method))
        for key, low in (('N', MIN_OBSERVATIONS), ('replications', 1), ('burn_in', 0),
                         ('workers', 1)):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, int) or value < low:
                raise ConfigError('{:s} must be an integer >= {:d}, got {!r}'.format(
                    key, low, value))
        try:
            rng.check_seed(self.seed)
            self.model.check_stationary()
        except (ValueError, NonStationary) as ex:
            raise ConfigError(str(ex))

    @property
    def order(self):
        return self.model.r, self.model.s

    @property
    def methods(self):
        return ('ecf', 'ml') if self.method == 'both' else (self.method,)

    def to_dict(self):
        """
        JSON form, the inverse of study_config_from_dict.
        """
        solver = {k: getattr(self.ecf_options, k) for k in sorted(_SOLVER_KEYS)}
        return {
            'model': self.model.to_config(),
            'noise': self.noise_true.to_config(),
            'noise_assumed': self.noise_assumed.to_config(),
            'N': self.N,
            'replications': self.replications,
            'seed': self.seed,
            'burn_in': self.burn_in,
            'grid': self.grid.to_config(),
            'method': self.method,
            'output_dir': self.output_dir,
            'workers': self.workers,
            'solver': solver,
        }


def parse_model(cfg):
    try:
        return GarchParams.from_config(cfg)
    except (KeyError, TypeError, ValueError) as ex:
        raise ConfigError('invalid "model": {}'.format(ex))


def parse_noise(cfg, key='noise'):
    try:
        return NoiseModel.from_config(cfg)
    except (TypeError, ValueError) as ex:
        raise ConfigError('invalid "{:s}": {}'.format(key, ex))


def parse_grid(cfg):
    """
    "default", a list of points (mirrored) or {"points": [...], "mirror": bool}.
    """
    try:
        if cfg is None or cfg == 'default':
            return UGrid.default()
        if isinstance(cfg, dict):
            unknown = set(cfg) - {'points', 'mirror'}
            if unknown:
                raise ConfigError('unknown "grid" keys: {}'.format(sorted(unknown)))
            return UGrid(cfg['points'], cfg.get('mirror', True))
        if isinstance(cfg, (list, tuple)):
            return UGrid(cfg, mirror=True)
    except (KeyError, TypeError, ValueError) as ex:
        raise ConfigError('invalid "grid": {}'.format(ex))
    raise ConfigError('invalid "grid": {!r}'.format(cfg))


def parse_solver(cfg, seed=0):
    # type: (dict, int) -> (EcfOptions, MlOptions)
    """
    Solver block shared by both estimators; weighting, ridge and transient
    only apply to ECF.
    """
    cfg = dict(cfg or {})
    unknown = set(cfg) - _SOLVER_KEYS
    if unknown:
        raise ConfigError('unknown "solver" keys: {}'.format(sorted(unknown)))
    try:
        ecf_opts = EcfOptions(seed=seed, **cfg)
        ml_opts = MlOptions(seed=seed, **{k: v for k, v in cfg.items()
                                          if k in ('gtol', 'max_iter', 'n_starts', 'strict')})
    except (TypeError, ValueError) as ex:
        raise ConfigError('invalid "solver": {}'.format(ex))
    return ecf_opts, ml_opts


def study_config_from_dict(cfg, base_dir=None):
    # type: (dict, str) -> StudyConfig
    """
    Validate a parsed JSON document.
    :param cfg: dict
    :param base_dir: directory relative output_dir paths are resolved against
    :return: StudyConfig
    """
    if not isinstance(cfg, dict):
        raise ConfigError('configuration must be a JSON object')
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError('unknown configuration keys: {}'.format(sorted(unknown)))
    for key in ('model',):
        if key not in cfg:
            raise ConfigError('missing "{:s}"'.format(key))
    noise_key = 'noise' if 'noise' in cfg else 'noise_true'
    if noise_key not in cfg:
        raise ConfigError('missing "noise"')
    seed = cfg.get('seed', 0)
    noise_true = parse_noise(cfg[noise_key], noise_key)
    noise_assumed = parse_noise(cfg['noise_assumed'], 'noise_assumed') \
        if 'noise_assumed' in cfg else noise_true
    ecf_opts, ml_opts = parse_solver(cfg.get('solver'), seed if isinstance(seed, int) else 0)
    output_dir = str(cfg.get('output_dir', 'garchecf-out'))
    if base_dir is not None and not os.path.isabs(output_dir):
        output_dir = os.path.join(base_dir, output_dir)
    return StudyConfig(
        model=parse_model(cfg['model']),
        noise_true=noise_true,
        noise_assumed=noise_assumed,
        N=cfg.get('N', 20000),
        replications=cfg.get('replications', 1),
        grid=parse_grid(cfg.get('grid')),
        method=cfg.get('method', 'ecf'),
        seed=seed,
        output_dir=output_dir,
        burn_in=cfg.get('burn_in', 1000),
        workers=cfg.get('workers', 1),
        ecf_options=ecf_opts,
        ml_options=ml_opts)


def load_config(path):
    # type: (str) -> StudyConfig
    """
    Read and validate a JSON configuration file.
    """
    try:
        with open(path, 'r') as f:
            cfg = json.load(f)
    except (IOError, OSError) as ex:
        raise ConfigError('cannot read configuration {:s}: {}'.format(path, ex))
    except ValueError as ex:
        raise ConfigError('configuration {:s} is not valid JSON: {}'.format(path, ex))
    return study_config_from_dict(cfg, base_dir=os.path.dirname(os.path.abspath(path)))

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
