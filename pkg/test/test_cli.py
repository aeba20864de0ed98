import os
import inspect
import json
import shutil
import tempfile
import unittest
from unittest import mock

from garchecf import cli
from garchecf.errors import NoConvergence

TEST_PATH = os.path.dirname(os.path.abspath(
    inspect.getfile(inspect.currentframe())))

STUDY = {
    'model': {'alpha0': 0.1, 'alpha': [0.2], 'beta': [0.7]},
    'noise': {'family': 'gaussian'},
    'N': 800,
    'replications': 2,
    'seed': 3,
    'burn_in': 200,
    'output_dir': 'out',
    'solver': {'n_starts': 1},
}


class Test(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp(prefix='garchecf-cli-')
        self.cfg = self.path('study.json')
        with open(self.cfg, 'w') as f:
            json.dump(STUDY, f)

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def test_simulate_and_estimate(self):
        data = self.path('series.csv')
        self.assertEqual(cli.main(['simulate', '--config', self.cfg, '--n', '800',
                                   '--seed', '1', '--out', data]), 0)
        self.assertTrue(os.path.exists(data + '.meta.json'))
        with open(data) as f:
            self.assertEqual(f.readline().strip(), 'n,y,sigma2_true')
        out = self.path('estimate.json')
        self.assertEqual(cli.main(['estimate', '--config', self.cfg, '--data', data,
                                   '--out', out]), 0)
        with open(out) as f:
            res = json.load(f)
        self.assertEqual(res['method'], 'ecf')
        self.assertEqual(sorted(res['theta']), ['alpha0', 'alpha1', 'beta1'])

    def test_simulate_errors(self):
        data = self.path('series.csv')
        self.assertEqual(cli.main(['simulate', '--config', self.cfg, '--n', '0',
                                   '--out', data]), 2)
        self.assertEqual(cli.main(['simulate', '--config', self.path('missing.json'),
                                   '--out', data]), 2)
        with self.assertRaises(SystemExit) as ctx:
            cli.main(['simulate', '--out', data])
        self.assertEqual(ctx.exception.code, 2)

    def test_estimate_short_series(self):
        data = self.path('series.csv')
        cli.main(['simulate', '--config', self.cfg, '--n', '100', '--out', data])
        self.assertEqual(cli.main(['estimate', '--config', self.cfg, '--data', data,
                                   '--method', 'ml']), 1)

    def test_mc_study(self):
        self.assertEqual(cli.main(['mc-study', '--config', self.cfg]), 0)
        self.assertTrue(os.path.exists(self.path(os.path.join('out', 'report.json'))))
        with mock.patch('garchecf.harness.estimate_series', side_effect=NoConvergence('stuck')):
            self.assertEqual(cli.main(['mc-study', '--config', self.cfg]), 3)

    def test_efficiency_curve(self):
        out = self.path('curve.csv')
        self.assertEqual(cli.main(['efficiency-curve', '--count', '8', '--out', out]), 0)
        with open(out) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], 'M,score,mu,ratio,ridge,condition')
        self.assertEqual(len(lines), 9)
        self.assertEqual(cli.main(['efficiency-curve', '--noise', 'vg', '--out', out]), 2)
        self.assertEqual(cli.main(['efficiency-curve', '--step', '-1', '--out', out]), 2)

    def test_stability(self):
        out = self.path('stability.json')
        self.assertEqual(cli.main(['stability', '--config', self.cfg, '--n-max', '20',
                                   '--reps', '200', '--out', out]), 0)
        with open(out) as f:
            report = json.load(f)
        self.assertAlmostEqual(report['rho_q2'], 0.89, places=10)
        self.assertTrue(report['coprime'])

    def test_three_stage(self):
        out = self.path('three.json')
        self.assertEqual(cli.main(['three-stage', '--config', self.cfg, '--out', out]), 0)
        with open(out) as f:
            report = json.load(f)
        self.assertIn('control', report['arms'])

# vim: set et fenc=utf-8 ft=python ff=unix sts=4 sw=4 ts=4 :
