import os
import inspect
import unittest

import numpy as np
import scipy.special

from garchecf import noise
from garchecf.errors import DensityUnavailable
from garchecf.noise import NoiseModel

TEST_PATH = os.path.dirname(os.path.abspath(
    inspect.getfile(inspect.currentframe())))

GAUSS = NoiseModel.gaussian()
VG = NoiseModel.vg(0.5)


def vg_half_density(x):
    # nu = 0.5 is the sum of two Laplace(1/2) variables
    x = np.abs(x)
    return 0.5 * (1 + 2 * x) * np.exp(-2 * x)


class Test(unittest.TestCase):

    def test_model_validation(self):
        self.assertEqual(NoiseModel('gaussian', 3.0).shape, 0.0)
        with self.assertRaises(ValueError):
            NoiseModel.vg(-1.0)
        with self.assertRaises(ValueError):
            NoiseModel('student')
        self.assertEqual(NoiseModel.from_config({'family': 'vg', 'nu': 0.5}), VG)
        self.assertEqual(NoiseModel.from_config(VG.to_config()), VG)
        with self.assertRaises(ValueError):
            NoiseModel.from_config({'family': 'vg'})

    def test_moments(self):
        self.assertEqual(GAUSS.m4, 3.0)
        self.assertEqual(GAUSS.moment(6), 15.0)
        self.assertAlmostEqual(VG.m4, 4.5)
        self.assertAlmostEqual(VG.moment(8), 105 * 1.5 * 2.0 * 2.5)
        self.assertEqual(VG.moment(3), 0.0)
        self.assertEqual(VG.moment(2), 1.0)

    def test_cf_values(self):
        self.assertEqual(noise.cf(0.0, GAUSS), 1 + 0j)
        self.assertAlmostEqual(noise.cf(1.0, GAUSS).real, 0.6065306597126334, places=14)
        self.assertAlmostEqual(noise.cf(1.0, VG).real, 0.64, places=14)
        self.assertEqual(noise.cf_deriv(0.0, VG), 0j)
        self.assertAlmostEqual(noise.cf_deriv(1.0, GAUSS).real, -0.6065306597126334, places=14)

    def test_cf_symmetry_and_bound(self):
        u = np.linspace(-20, 20, 1000)
        for model in (GAUSS, VG, NoiseModel.vg(2.0)):
            phi = noise.cf(u, model)
            self.assertTrue(np.all(np.abs(phi) <= 1.0 + 1e-15))
            np.testing.assert_allclose(noise.cf(-u, model), np.conj(phi))

    def test_cf_deriv_finite_difference(self):
        u = np.linspace(-5, 5, 41)
        h = 1e-6
        for model in (GAUSS, VG):
            fd = (noise.cf(u + h, model) - noise.cf(u - h, model)) / (2 * h)
            np.testing.assert_allclose(noise.cf_deriv(u, model), fd, rtol=1e-6, atol=1e-9)

    def test_sample_gaussian(self):
        x = noise.sample(GAUSS, 10 ** 5, 42)
        self.assertLess(abs(x.mean()), 0.02)
        self.assertLess(abs(x.var() - 1), 0.02)
        np.testing.assert_array_equal(x, noise.sample(GAUSS, 10 ** 5, 42))
        self.assertFalse(np.array_equal(x, noise.sample(GAUSS, 10 ** 5, 43)))

    def test_sample_vg_kurtosis(self):
        x = noise.sample(VG, 10 ** 5, 7)
        kurt = np.mean(x ** 4) / np.mean(x ** 2) ** 2
        self.assertLess(abs(kurt - 4.5), 0.45)
        self.assertLess(abs(x.var() - 1), 0.03)

    def test_sample_rejects_bad_arguments(self):
        with self.assertRaises(ValueError):
            noise.sample(GAUSS, 0, 1)
        with self.assertRaises(ValueError):
            noise.sample(GAUSS, 10, -1)
        with self.assertRaises(ValueError):
            noise.sample(GAUSS, 10, 1.5)

    def test_empirical_cf(self):
        n = 10 ** 5
        u = np.array([0.5, 1.0, 2.0])
        for model in (GAUSS, VG):
            x = noise.sample(model, n, 3)
            err = np.abs(noise.empirical_cf(u, x) - noise.cf(u, model))
            self.assertTrue(np.all(err < 4 / np.sqrt(n)), err)

    def test_log_density_score(self):
        log_f, score = noise.log_density_score(0.0, GAUSS)
        self.assertAlmostEqual(log_f, -0.9189385332046727, places=12)
        self.assertEqual(score, 0.0)
        log_f, score = noise.log_density_score(2.0, GAUSS)
        self.assertAlmostEqual(log_f, -2.9189385332046727, places=12)
        self.assertEqual(score, -2.0)
        with self.assertRaises(DensityUnavailable):
            noise.log_density_score(1.0, VG)
        with self.assertRaises(DensityUnavailable):
            noise.density_ratios(1.0, VG)

    def test_vg_inverted_density(self):
        x = np.array([0.0, 0.3, 1.0, 2.5])
        np.testing.assert_allclose(noise.density(x, VG), vg_half_density(x), atol=1e-4)
        self.assertAlmostEqual(noise.inversion_normalization(VG), 1.0, delta=1e-5)
        # f'(x) = -2 x exp(-2x) on x > 0
        np.testing.assert_allclose(noise.density_deriv(x[1:], VG),
                                   -2 * x[1:] * np.exp(-2 * x[1:]), atol=1e-3)

    def test_vg_bessel_form(self):
        x = np.array([-1.7, 0.3, 1.0, 2.5, 9.0])
        np.testing.assert_allclose(np.exp(noise._vg_log_density(x, 0.5)), vg_half_density(x),
                                   rtol=1e-10)
        np.testing.assert_allclose(noise._vg_score(x, 0.5), -4 * x / (1 + 2 * np.abs(x)),
                                   rtol=1e-10)
        # nu = 1 is the unit variance Laplace law
        np.testing.assert_allclose(np.exp(noise._vg_log_density(x, 1.0)),
                                   np.exp(-np.sqrt(2) * np.abs(x)) / np.sqrt(2), rtol=1e-10)

    def test_fisher_scale_gaussian(self):
        self.assertAlmostEqual(noise.fisher_scale(GAUSS), 2.0, delta=1e-8)

    def test_fisher_scale_vg(self):
        # mu = (4 + e E1(1)) / 2 - 1 for nu = 0.5
        exact = 0.5 * (4 + np.e * scipy.special.exp1(1.0)) - 1.0
        mu = noise.fisher_scale(VG)
        self.assertGreater(mu, 0)
        self.assertAlmostEqual(mu, exact, delta=1e-8)
        # Laplace score is -sqrt(2) sign(x), so mu = 2 E[X^2] - 1
        self.assertAlmostEqual(noise.fisher_scale(NoiseModel.vg(1.0)), 1.0, delta=1e-8)
        for nu in (0.25, 3.0):
            self.assertGreater(noise.fisher_scale(NoiseModel.vg(nu)), 0)

    def test_fit_shape(self):
        x = noise.sample(NoiseModel.vg(1.0), 5 * 10 ** 4, 11)
        fitted = noise.fit_shape(x, 'vg')
        self.assertEqual(fitted.family, 'vg')
        self.assertLess(abs(fitted.shape - 1.0), 0.2)
        self.assertEqual(noise.fit_shape(x, 'gaussian'), GAUSS)

# vim: set et fenc=utf-8 ft=python ff=unix sts=4 sw=4 ts=4 :
