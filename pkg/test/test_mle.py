import os
import inspect
import unittest

import numpy as np

from garchecf import ecf, garch_core, mle
from garchecf.ecf import EcfOptions, m_hat
from garchecf.errors import DensityUnavailable, InsufficientData
from garchecf.garch_core import GarchParams
from garchecf.mle import MlOptions
from garchecf.noise import NoiseModel

TEST_PATH = os.path.dirname(os.path.abspath(
    inspect.getfile(inspect.currentframe())))

LONG_TESTS = bool(os.environ.get('GARCHECF_LONG_TESTS'))

GAUSS = NoiseModel.gaussian()
VG = NoiseModel.vg(0.5)
GARCH11 = GarchParams(0.1, (0.2,), (0.7,))


class Test(unittest.TestCase):

    def test_constant_volatility(self):
        y = garch_core.simulate(GARCH11, GAUSS, 500, seed=1)[0]
        alpha0 = 0.8
        value, _ = mle.neg_log_likelihood(GarchParams(alpha0, (0.0,)), y, GAUSS)
        # sigma_n^2 = alpha0 for every n, including sigma_0^2 = gamma
        expected = 0.5 * np.log(2 * np.pi * alpha0) + np.mean(y ** 2) / (2 * alpha0)
        self.assertAlmostEqual(value, expected, places=12)

    def test_gradient_finite_difference(self):
        y = garch_core.simulate(GARCH11, GAUSS, 1000, seed=2)[0]
        h = 1e-6
        for params in (GARCH11, GarchParams(0.2, (0.1, 0.05), (0.5,))):
            _, grad = mle.neg_log_likelihood(params, y, GAUSS)
            theta = params.as_array()
            fd = []
            for j in range(params.p):
                step = np.zeros(params.p)
                step[j] = h
                up = mle.neg_log_likelihood(
                    GarchParams.from_array(theta + step, params.r, params.s), y, GAUSS)[0]
                down = mle.neg_log_likelihood(
                    GarchParams.from_array(theta - step, params.r, params.s), y, GAUSS)[0]
                fd.append((up - down) / (2 * h))
            np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-8)

    def test_hessian_finite_difference(self):
        y = garch_core.simulate(GARCH11, GAUSS, 1000, seed=3)[0]
        params = GarchParams(0.12, (0.15,), (0.65,))
        value, grad, hess = mle.neg_log_likelihood(params, y, GAUSS, hessian=True)
        self.assertEqual(value, mle.neg_log_likelihood(params, y, GAUSS)[0])
        np.testing.assert_allclose(hess, hess.T)
        theta = params.as_array()
        h = 1e-6
        for j in range(3):
            step = np.zeros(3)
            step[j] = h
            up = mle.neg_log_likelihood(GarchParams.from_array(theta + step, 1, 1), y, GAUSS)[1]
            down = mle.neg_log_likelihood(GarchParams.from_array(theta - step, 1, 1), y, GAUSS)[1]
            np.testing.assert_allclose(hess[:, j], (up - down) / (2 * h), rtol=1e-4, atol=1e-7)

    def test_score_contributions(self):
        y = garch_core.simulate(GARCH11, GAUSS, 800, seed=4)[0]
        contrib = mle.score_contributions(GARCH11, y, GAUSS)
        self.assertEqual(contrib.shape, (800, 3))
        np.testing.assert_allclose(contrib.mean(axis=0),
                                   mle.neg_log_likelihood(GARCH11, y, GAUSS)[1])

    def test_information_equality(self):
        n = 5 * 10 ** 4
        y = garch_core.simulate(GARCH11, GAUSS, n, seed=5)[0]
        M = m_hat(GARCH11, y, transient=0)
        _, _, hess = mle.neg_log_likelihood(GARCH11, y, GAUSS, hessian=True)
        np.testing.assert_allclose(hess, 2 * M, rtol=0.15)
        contrib = mle.score_contributions(GARCH11, y, GAUSS)
        np.testing.assert_allclose(contrib.T.dot(contrib) / n, 2 * M, rtol=0.15)

    def test_density_required(self):
        y = garch_core.simulate(GARCH11, VG, 600, seed=6)[0]
        with self.assertRaises(DensityUnavailable):
            mle.neg_log_likelihood(GARCH11, y, VG)
        with self.assertRaises(DensityUnavailable):
            mle.ml_estimate(y, VG)
        with self.assertRaises(DensityUnavailable):
            mle.density_identities(VG)

    def test_density_identities(self):
        first, second = mle.density_identities(GAUSS)
        self.assertAlmostEqual(first, -1.0, delta=1e-8)
        self.assertAlmostEqual(second, 2.0, delta=1e-8)
        lhs, rhs = mle.scale_fisher_identity_check(GAUSS)
        self.assertAlmostEqual(lhs, 2.0, delta=1e-8)
        self.assertAlmostEqual(rhs, 2.0, delta=1e-8)

    def test_options(self):
        with self.assertRaises(ValueError):
            MlOptions(gtol=-1.0)
        with self.assertRaises(ValueError):
            MlOptions(transient=-1)
        with self.assertRaises(InsufficientData):
            mle.ml_estimate(np.ones(100), GAUSS)

    def test_ml_estimate(self):
        y = garch_core.simulate(GARCH11, GAUSS, 10 ** 4, seed=7)[0]
        res = mle.ml_estimate(y, GAUSS, MlOptions(n_starts=2))
        self.assertTrue(res.converged)
        self.assertFalse(res.boundary_stall)
        self.assertAlmostEqual(res.mu, 2.0, delta=1e-8)
        se = np.sqrt(np.diag(res.cov))
        err = np.abs(res.theta.as_array() - GARCH11.as_array())
        self.assertTrue(np.all(err < 5 * se + 0.01), (err, se))
        np.testing.assert_allclose(res.asympt_cov, np.linalg.inv(res.M_star_hat) / 2, rtol=1e-8)
        out = res.to_dict()
        self.assertEqual(out['method'], 'ml')
        self.assertEqual(out['objective'], out['neg_loglik'])

    def test_gradient_rate(self):
        sizes = np.array([1000, 4000, 16000, 64000])
        rms = []
        for i, n in enumerate(sizes):
            sq = []
            for k in range(8):
                y = garch_core.simulate(GARCH11, GAUSS, int(n), seed=4000 + 100 * i + k)[0]
                sq.append(np.sum(mle.neg_log_likelihood(GARCH11, y, GAUSS)[1] ** 2))
            rms.append(np.sqrt(np.mean(sq)))
        slope = np.polyfit(np.log(sizes), np.log(rms), 1)[0]
        self.assertLess(abs(slope + 0.5), 0.1, slope)

    @unittest.skipUnless(LONG_TESTS, 'set GARCHECF_LONG_TESTS to run')
    def test_ml_ecf_difference_rate(self):
        sizes = np.array([2000, 8000, 32000])
        rms = []
        for i, n in enumerate(sizes):
            sq = []
            for k in range(20):
                y = garch_core.simulate(GARCH11, GAUSS, int(n), seed=5000 + 100 * i + k)[0]
                opts = MlOptions(n_starts=2, transient=100)
                ml = mle.ml_estimate(y, GAUSS, opts).theta.as_array()
                fit = ecf.estimate(y, GAUSS, opts=EcfOptions(n_starts=2)).theta.as_array()
                sq.append(np.sum((ml - fit) ** 2))
            rms.append(np.sqrt(np.mean(sq)))
        slope = np.polyfit(np.log(sizes), np.log(rms), 1)[0]
        self.assertLess(abs(slope + 0.5), 0.15, slope)

# vim: set et fenc=utf-8 ft=python ff=unix sts=4 sw=4 ts=4 :
