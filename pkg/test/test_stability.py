import os
import inspect
import unittest
import warnings

import numpy as np

from garchecf import noise, stability
from garchecf.errors import MomentUnavailable, SpectralRadiusError
from garchecf.garch_core import GarchParams
from garchecf.noise import NoiseModel
from garchecf.stability import StateMatrixSpec

TEST_PATH = os.path.dirname(os.path.abspath(
    inspect.getfile(inspect.currentframe())))

GAUSS = NoiseModel.gaussian()
GARCH11 = GarchParams(0.1, (0.2,), (0.7,))


class Test(unittest.TestCase):

    def test_state_matrix(self):
        spec = StateMatrixSpec.from_noise(GARCH11, GAUSS)
        self.assertEqual(spec.dimension, 2)
        np.testing.assert_allclose(stability.assemble_state_matrix(spec, 2.0),
                                   [[0.4, 1.4], [0.2, 0.7]])
        spec = StateMatrixSpec.from_noise(GarchParams(0.1, (0.2, 0.1), (0.3, 0.2)), GAUSS)
        A = stability.assemble_state_matrix(spec, 1.0)
        np.testing.assert_allclose(A, [[0.2, 0.1, 0.3, 0.2],
                                       [1.0, 0.0, 0.0, 0.0],
                                       [0.2, 0.1, 0.3, 0.2],
                                       [0.0, 0.0, 1.0, 0.0]])

    def test_kron_square_radius(self):
        spec = StateMatrixSpec.from_noise(GARCH11, GAUSS)
        m = stability.expected_kron_power(spec, 2)
        self.assertEqual(m.shape, (4, 4))
        self.assertAlmostEqual(stability.spectral_radius(m), 0.89, places=10)
        self.assertAlmostEqual(
            stability.spectral_radius(stability.expected_kron_power(spec, 1)), 0.9, places=10)

    def test_kron_square_without_alpha(self):
        spec = StateMatrixSpec.from_noise(GarchParams(0.1, (0.0,), (0.7,)), GAUSS)
        self.assertAlmostEqual(
            stability.spectral_radius(stability.expected_kron_power(spec, 2)), 0.49, places=10)
        spec = StateMatrixSpec.from_noise(GarchParams(0.1, (0.0,), (0.0,)), GAUSS)
        self.assertEqual(stability.spectral_radius(stability.expected_kron_power(spec, 4)), 0.0)

    def test_kron_power_monte_carlo(self):
        spec = StateMatrixSpec.from_noise(GARCH11, GAUSS)
        n = 2 * 10 ** 5
        dl = noise.sample(GAUSS, n, 21)
        A0, A1 = spec.blocks()
        samples = A0 + (dl * dl)[:, None, None] * A1
        kron = np.einsum('nij,nkl->nikjl', samples, samples).reshape(n, 4, 4)
        mean = kron.mean(axis=0)
        se = kron.std(axis=0) / np.sqrt(n)
        exact = stability.expected_kron_power(spec, 2)
        self.assertTrue(np.all(np.abs(mean - exact) <= 5 * se + 1e-12))

    def test_moment_unavailable(self):
        spec = StateMatrixSpec(GARCH11, {2: 1.0, 4: 3.0})
        self.assertEqual(spec.moment(0), 1.0)
        stability.expected_kron_power(spec, 2)
        with self.assertRaises(MomentUnavailable):
            stability.expected_kron_power(spec, 4)
        with self.assertRaises(ValueError):
            stability.expected_kron_power(spec, 3)

    def test_spectral_radius(self):
        self.assertEqual(stability.spectral_radius(np.zeros((3, 3))), 0.0)
        self.assertAlmostEqual(stability.spectral_radius([[0.7]]), 0.7)
        self.assertAlmostEqual(stability.spectral_radius([[0.0, 1.0], [-0.25, 0.0]]), 0.5)
        with self.assertRaises(ValueError):
            stability.spectral_radius(np.ones((2, 3)))
        with self.assertRaises(SpectralRadiusError):
            stability.spectral_radius([[np.nan, 0.0], [0.0, 1.0]])

    def test_spectral_radius_large(self):
        gen = np.random.default_rng(2)
        m = np.abs(gen.standard_normal((80, 80))) / 80
        self.assertAlmostEqual(stability.spectral_radius(m),
                               np.max(np.abs(np.linalg.eigvals(m))), places=8)

    def test_stationarity_equivalence(self):
        gen = np.random.default_rng(3)
        checked = 0
        while checked < 50:
            r, s = int(gen.integers(1, 3)), int(gen.integers(0, 3))
            coef = gen.dirichlet(np.ones(r + s)) * gen.uniform(0.5, 1.5)
            total = coef.sum()
            if abs(total - 1) < 0.02:
                continue
            params = GarchParams(0.1, tuple(coef[:r]), tuple(coef[r:]))
            spec = StateMatrixSpec.from_noise(params, GAUSS)
            rho = stability.spectral_radius(stability.expected_kron_power(spec, 1))
            self.assertEqual(rho < 1, total < 1, (params, rho))
            checked += 1

    def test_block_triangular_deterministic(self):
        lhs, rhs = stability.block_triangular_radius_check(
            [[0.5, 0.1], [0.2, 0.3]], [[0.9]], [[1.0, 2.0]], 2)
        self.assertAlmostEqual(lhs, rhs, places=10)
        self.assertAlmostEqual(rhs, 0.81, places=10)
        with self.assertRaises(ValueError):
            stability.block_triangular_radius_check(np.eye(2), np.eye(1), np.ones((2, 1)), 2)

    def test_block_triangular_random(self):
        gen = np.random.default_rng(4)
        n = 20000
        p1 = 0.3 + 0.4 * gen.standard_normal((n, 2, 2))
        p2 = 0.2 + 0.5 * gen.standard_normal((n, 2, 2))
        coupling = gen.standard_normal((n, 2, 2))
        for q in (1, 2):
            lhs, rhs = stability.block_triangular_radius_check(p1, p2, coupling, q)
            self.assertLess(abs(lhs - rhs), 1e-2 * rhs)

    def test_block_triangular_garch_samples(self):
        spec = StateMatrixSpec.from_noise(GARCH11, GAUSS)
        dl = noise.sample(GAUSS, 10 ** 5, 5)
        samples = np.array([stability.assemble_state_matrix(spec, v * v) for v in dl[:20000]])
        lhs, rhs = stability.block_triangular_radius_check(
            samples, [[0.5]], np.zeros((1, 2)), 2)
        self.assertAlmostEqual(lhs, rhs, places=8)
        self.assertLess(abs(rhs - 0.89), 0.05)

    def test_expanded_radius(self):
        spec = StateMatrixSpec.from_noise(GARCH11, GAUSS)
        theta = GarchParams(0.2, (0.1,), (0.5,))
        big = stability.expanded_state_matrix(spec, theta, 1.0)
        self.assertEqual(big.shape, (3, 3))
        np.testing.assert_allclose(big[2], [0.1, 0.0, 0.5])
        lhs, rhs = stability.expanded_radius_check(spec, theta, 2)
        self.assertAlmostEqual(rhs, 0.89, places=10)
        self.assertAlmostEqual(lhs, rhs, places=10)
        with self.assertRaises(ValueError):
            stability.expanded_radius_check(spec, GarchParams(0.1, (0.1, 0.1), (0.5,)), 2)

    def test_lambda_deterministic_slope(self):
        spec = StateMatrixSpec.from_noise(GarchParams(0.1, (0.0,), (0.7,)), GAUSS)
        fit = stability.estimate_lambda_q(spec, GAUSS, 2, n_max=60, reps=2000, seed=1)
        self.assertLess(abs(fit.slope - 2 * np.log(0.7)), 0.02 * abs(2 * np.log(0.7)))
        self.assertAlmostEqual(fit.rho, 0.49, places=10)
        self.assertEqual(len(fit.log_moments), 60)

    def test_lambda_garch(self):
        spec = StateMatrixSpec.from_noise(GARCH11, GAUSS)
        fit = stability.estimate_lambda_q(spec, GAUSS, 2, n_max=60, reps=2000, seed=2)
        self.assertLessEqual(fit.slope, np.log(0.89) + 0.05)
        again = stability.estimate_lambda_q(spec, GAUSS, 2, n_max=60, reps=2000, seed=2)
        self.assertEqual(fit.slope, again.slope)

    def test_lambda_vanishing_products(self):
        spec = StateMatrixSpec.from_noise(GarchParams(0.1, (0.0,), (0.0,)), GAUSS)
        fit = stability.estimate_lambda_q(spec, GAUSS, 2, n_max=10, reps=50)
        self.assertTrue(np.isneginf(fit.slope))

    def test_lambda_warns_when_unstable(self):
        spec = StateMatrixSpec.from_noise(GarchParams(0.1, (0.6,), (0.39,)), GAUSS)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            stability.estimate_lambda_q(spec, GAUSS, 2, n_max=10, reps=50)
        self.assertTrue(any('do not decay' in str(w.message) for w in caught))

    def test_coprime(self):
        self.assertTrue(stability.check_coprime(GARCH11))
        self.assertFalse(stability.check_coprime(GarchParams(0.1, (0.0,), (0.7,))))
        # both polynomials vanish at w = -4
        self.assertFalse(stability.check_coprime(GarchParams(0.1, (0.1, 0.025), (0.25, 0.125))))
        self.assertTrue(stability.check_coprime(GarchParams(0.1, (0.1, 0.025), (0.25, 0.1))))
        self.assertFalse(stability.polynomials_coprime([-0.5, 1.0], [0.25, -1.0, 1.0]))
        self.assertTrue(stability.polynomials_coprime([-0.5, 1.0], [0.5, 1.0]))

    def test_stability_report(self):
        report = stability.stability_report(GARCH11, GAUSS, n_max=20, reps=200)
        self.assertAlmostEqual(report['rho_q2'], 0.89, places=10)
        self.assertAlmostEqual(report['rho_q1'], 0.9, places=10)
        self.assertTrue(report['coprime'])
        self.assertEqual(set(report), {'rho_q1', 'rho_q2', 'rho_q4', 'lambda2_hat',
                                       'lambda2_stderr', 'coprime'})

# vim: set et fenc=utf-8 ft=python ff=unix sts=4 sw=4 ts=4 :
