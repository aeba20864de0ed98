#!/usr/bin/env python
"""
Command line entry point.

Exit codes: 0 on success, 2 on configuration or usage errors, 3 when a
study fails, 1 on any other estimation error.
"""

from __future__ import print_function

import argparse
import json
import logging
import sys

from . import harness, stability
from .ecf import UGrid
from .config import load_config
from .errors import ConfigError, GarchEcfError, StudyFailure
from .noise import NoiseModel

# pylint: disable=invalid-name

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_STUDY = 3


def _write_json(obj, out):
    text = json.dumps(obj, sort_keys=True, indent=2)
    if out:
        with open(out, 'w') as f:
            f.write(text + '\n')
    else:
        print(text)


def cmd_simulate(args):
    cfg = load_config(args.config)
    harness.cli_simulate(cfg, args.out, n=args.n, seed=args.seed)


def cmd_estimate(args):
    cfg = load_config(args.config)
    y = harness.load_series(args.data)
    res = harness.estimate_series(cfg, y, args.method)
    _write_json(res.to_dict(), args.out)


def cmd_mc_study(args):
    cfg = load_config(args.config)
    report = harness.run_mc_study(cfg)
    logger.info('report written to %s', cfg.output_dir)
    if args.verbose:
        _write_json(report.to_dict(), None)


def cmd_efficiency_curve(args):
    if args.noise == 'vg' and args.nu is None:
        raise ConfigError('--nu is required for vg noise')
    try:
        noise = NoiseModel.vg(args.nu) if args.noise == 'vg' else NoiseModel.gaussian()
        grids = [UGrid.uniform(args.step, k, mirror=args.mirror)
                 for k in range(1, args.count + 1)]
    except ValueError as ex:
        raise ConfigError(str(ex))
    df = harness.run_efficiency_curve(noise, grids, args.out)
    if not args.out:
        print(df.to_string(index=False))


def cmd_three_stage(args):
    cfg = load_config(args.config)
    _write_json(harness.run_three_stage_experiment(cfg), args.out)


def cmd_stability(args):
    cfg = load_config(args.config)
    report = stability.stability_report(cfg.model, cfg.noise_true, n_max=args.n_max,
                                        reps=args.reps, seed=args.seed)
    _write_json(report, args.out)


def build_parser():
    """
    argparse parser with one sub-parser per command.
    """
    parser = argparse.ArgumentParser(
        prog='garchecf',
        description='ECF and ML estimation of GARCH models driven by Levy noise')
    parser.add_argument('-v', '--verbose', help='debug logging', action='store_true')
    parser.set_defaults(verbose=False)
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('simulate', help='simulate a series to CSV')
    p.add_argument('--config', required=True, help='study configuration JSON')
    p.add_argument('--n', type=int, help='sample size (default: config N)')
    p.add_argument('--seed', type=int, help='seed (default: config seed)')
    p.add_argument('--out', required=True, help='output CSV')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('estimate', help='estimate GARCH parameters of a series')
    p.add_argument('--method', choices=['ecf', 'ml'], help='estimator')
    p.add_argument('--config', required=True, help='study configuration JSON')
    p.add_argument('--data', required=True, help='series CSV')
    p.add_argument('--out', help='result JSON (default: stdout)')
    p.set_defaults(func=cmd_estimate, method='ecf')

    p = sub.add_parser('mc-study', help='Monte Carlo covariance study')
    p.add_argument('--config', required=True, help='study configuration JSON')
    p.set_defaults(func=cmd_mc_study)

    p = sub.add_parser('efficiency-curve', help='phi* C^-1 phi over nested grids')
    p.add_argument('--noise', choices=['gaussian', 'vg'], help='noise family')
    p.add_argument('--nu', type=float, help='Variance-Gamma shape')
    p.add_argument('--step', type=float, help='grid spacing')
    p.add_argument('--count', type=int, help='largest number of grid points')
    p.add_argument('--no-mirror', dest='mirror', action='store_false',
                   help='positive frequencies only')
    p.add_argument('--out', help='output CSV (default: print table)')
    p.set_defaults(func=cmd_efficiency_curve, noise='gaussian', nu=None, step=0.25,
                   count=40, mirror=True)

    p = sub.add_parser('three-stage', help='misspecification experiment')
    p.add_argument('--config', required=True, help='study configuration JSON')
    p.add_argument('--out', help='report JSON (default: stdout)')
    p.set_defaults(func=cmd_three_stage)

    p = sub.add_parser('stability', help='moment stability diagnostics')
    p.add_argument('--config', required=True, help='study configuration JSON')
    p.add_argument('--n-max', type=int, help='longest matrix product')
    p.add_argument('--reps', type=int, help='products per length')
    p.add_argument('--seed', type=int, help='seed')
    p.add_argument('--out', help='report JSON (default: stdout)')
    p.set_defaults(func=cmd_stability, n_max=60, reps=2000, seed=0)
    return parser


def main(argv=None):
    """
    Entry point for commandline.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s')
    try:
        args.func(args)
    except ConfigError as ex:
        print('configuration error: {}'.format(ex), file=sys.stderr)
        return EXIT_CONFIG
    except (IOError, OSError) as ex:
        print('{}'.format(ex), file=sys.stderr)
        return EXIT_CONFIG
    except StudyFailure as ex:
        print('study failed: {}'.format(ex), file=sys.stderr)
        return EXIT_STUDY
    except (GarchEcfError, ValueError) as ex:
        print('error: {}'.format(ex), file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
