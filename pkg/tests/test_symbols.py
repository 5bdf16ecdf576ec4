import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from cnskspectral import symbols, exceptions


def params(nu=0.5, nu_tilde=0.5, gamma=1.0, kappa0=0.25):
    return symbols.derive_params(nu, nu_tilde, gamma, kappa0)


class DeriveParamsTest(unittest.TestCase):
    def test_critical_parameters(self):
        p = params()
        self.assertEqual(p.A, 0.5)
        self.assertEqual(p.B, 2.0)
        self.assertEqual(p.K, 1.0)
        self.assertIs(p.regime, symbols.Regime.CRITICAL)

    def test_kappa_zero_is_subcritical(self):
        p = params(nu=1.0, nu_tilde=0.0, kappa0=0.0)
        self.assertEqual((p.A, p.B, p.K), (0.5, 2.0, 0.0))
        self.assertIs(p.regime, symbols.Regime.SUB_CRITICAL)

    def test_supercritical(self):
        p = params(kappa0=1.0)
        self.assertAlmostEqual(p.K, 2.0)
        self.assertIs(p.regime, symbols.Regime.SUPER_CRITICAL)

    def test_rejects_invalid_domain(self):
        for kwargs in ({"nu": 0.0}, {"gamma": -1.0}, {"kappa0": -1.0}, {"nu_tilde": -2.0}):
            with self.subTest(**kwargs):
                self.assertRaises(exceptions.ParameterDomainError, params, **kwargs)

    def test_error_message_names_all_problems(self):
        with self.assertRaises(exceptions.ParameterDomainError) as ctx:
            params(nu=-1.0, kappa0=-1.0)
        self.assertIn("nu must be positive", str(ctx.exception))
        self.assertIn("kappa0 must be non-negative", str(ctx.exception))

    def test_as_dict(self):
        self.assertEqual(params().as_dict()["regime"], "critical")


class NormalizeParamsTest(unittest.TestCase):
    def test_normalized_parameters_are_unchanged(self):
        p, rescaling = symbols.normalize_params(params())
        self.assertTrue(symbols.is_normalized(p))
        self.assertEqual(rescaling.as_dict(), {"time": 1.0, "length": 1.0})

    def test_K_is_invariant(self):
        original = params(nu=2.0, nu_tilde=1.0, gamma=3.0, kappa0=0.7)
        p, rescaling = symbols.normalize_params(original)
        self.assertTrue(symbols.is_normalized(p))
        self.assertAlmostEqual(p.K, original.K)
        self.assertAlmostEqual(rescaling.time, 3.0 / 9.0)
        self.assertAlmostEqual(rescaling.length, 1.0)
        self.assertAlmostEqual(rescaling.horizon(3.0), 9.0)

    def test_is_normalized_rejects_general_parameters(self):
        self.assertFalse(symbols.is_normalized(params(gamma=2.0)))


class LambdaPmTest(unittest.TestCase):
    def test_zero_wavenumber(self):
        roots = symbols.lambda_pm(0.0, params())
        self.assertEqual(roots.lambda_plus, 0)
        self.assertEqual(roots.lambda_minus, 0)

    def test_complex_pair(self):
        roots = symbols.lambda_pm(1.0, params(nu=1.0, nu_tilde=0.0, kappa0=0.0))
        pair = sorted([roots.lambda_plus, roots.lambda_minus], key=lambda z: z.imag)
        assert_allclose(pair, [(-1 - 1j * math.sqrt(3)) / 2, (-1 + 1j * math.sqrt(3)) / 2], atol=1e-15)

    def test_double_root(self):
        p = params(nu=1.0, nu_tilde=0.0, kappa0=0.0)
        roots = symbols.lambda_pm(4.0, p)
        self.assertAlmostEqual(complex(roots.lambda_plus), -2.0)
        self.assertAlmostEqual(complex(roots.lambda_minus), -2.0)
        self.assertAlmostEqual(abs(symbols.characteristic_residual(-2.0, 4.0, p)), 0.0)

    def test_residual_of_roots(self):
        p = params(kappa0=0.1)
        x = np.linspace(0.0, 400.0, 2001)
        roots = symbols.lambda_pm(x, p)
        for z in roots.lambda_plus, roots.lambda_minus:
            scale = np.abs(z) ** 2 + x * np.abs(z) + 0.1 * x * x + x
            residual = np.abs(symbols.characteristic_residual(z, x, p))
            self.assertLessEqual(float(np.max(residual / np.where(scale > 0, scale, 1))), 1e-12)

    def test_small_root_is_accurate_at_high_frequency(self):
        p = params(nu=1.0, nu_tilde=0.0, kappa0=0.0)
        roots = symbols.lambda_pm(1e12, p)
        self.assertAlmostEqual(float(np.real(roots.lambda_minus)), -1.0, places=6)

    def test_negative_xi_sq(self):
        self.assertRaises(exceptions.ParameterDomainError, symbols.lambda_pm, -1.0, params())


class DividedDifferencesTest(unittest.TestCase):
    def setUp(self):
        self.p = params(nu=1.0, nu_tilde=0.0, kappa0=0.0)

    def test_zero_time(self):
        x = np.array([0.0, 1.0, 4.0, 9.0])
        assert_allclose(symbols.divided_diff_E0(0.0, x, self.p), 0.0)
        assert_allclose(symbols.divided_diff_E1(0.0, x, self.p), 1.0)
        assert_allclose(symbols.green_phi_phi(0.0, x, self.p), 1.0)

    def test_zero_wavenumber(self):
        t = np.array([0.5, 1.0, 10.0])
        assert_allclose(symbols.divided_diff_E0(t, 0.0, self.p), t)
        assert_allclose(symbols.divided_diff_E1(t, 0.0, self.p), 1.0)
        assert_allclose(symbols.green_phi_phi(t, 0.0, self.p), 1.0)

    def test_confluent_limit(self):
        self.assertAlmostEqual(complex(symbols.divided_diff_E0(1.0, 4.0, self.p)), math.exp(-2.0), places=14)
        nearby = [symbols.lambda_pm(4.0 + d, self.p) for d in (-1e-6, 1e-6)]
        for roots in nearby:
            lp, lm = complex(roots.lambda_plus), complex(roots.lambda_minus)
            direct = (np.exp(lp) - np.exp(lm)) / (lp - lm)
            self.assertAlmostEqual(complex(direct).real, math.exp(-2.0), places=5)

    def test_complex_roots_match_direct_formula(self):
        lp = (-1 - 1j * math.sqrt(3)) / 2
        lm = (-1 + 1j * math.sqrt(3)) / 2
        E0 = (np.exp(lp) - np.exp(lm)) / (lp - lm)
        E1 = (lp * np.exp(lp) - lm * np.exp(lm)) / (lp - lm)
        assert_allclose(symbols.divided_diff_E0(1.0, 1.0, self.p), E0, rtol=1e-12)
        assert_allclose(symbols.divided_diff_E1(1.0, 1.0, self.p), E1, rtol=1e-12)
        assert_allclose(symbols.green_phi_phi(1.0, 1.0, self.p), E1 + E0, rtol=1e-12)

    def test_single_mode_density_value(self):
        expected = math.exp(-0.5) * (math.cos(math.sqrt(3) / 2) + math.sin(math.sqrt(3) / 2) / math.sqrt(3))
        self.assertAlmostEqual(complex(symbols.green_phi_phi(1.0, 1.0, self.p)).real, expected, places=13)

    def test_large_time_does_not_overflow(self):
        value = symbols.divided_diff_E0(1e6, np.array([1e-6, 1.0, 1e4]), params(kappa0=0.1))
        self.assertTrue(np.all(np.isfinite(value)))

    def test_negative_time(self):
        self.assertRaises(exceptions.ParameterDomainError, symbols.divided_diff_E0, -1.0, 1.0, self.p)


class CutoffTest(unittest.TestCase):
    def test_origin_is_low_frequency(self):
        weights = symbols.cutoff_weights(0.0, params(kappa0=0.1))
        self.assertEqual((float(weights.w1), float(weights.wM), float(weights.wInf)), (1.0, 0.0, 0.0))

    def test_critical_high_frequency(self):
        weights = symbols.cutoff_weights(2.0, params())
        assert_allclose([weights.w1, weights.wM, weights.wInf], [0.0, 0.0, 1.0])

    def test_noncritical_high_frequency(self):
        p = params(kappa0=0.1875)
        self.assertAlmostEqual(symbols.cutoff_radii(p).high_outer, 8.0)
        weights = symbols.cutoff_weights(16.0, p)
        assert_allclose([weights.w1, weights.wM, weights.wInf], [0.0, 0.0, 1.0])

    def test_partition_of_unity(self):
        r = np.linspace(0.0, 20.0, 401)
        weights = symbols.cutoff_weights(r, params(kappa0=0.1))
        assert_allclose(weights.w1 + weights.wM + weights.wInf, 1.0)
        self.assertTrue(np.all(np.asarray(weights.wM) >= -1e-15))

    def test_lowfreq_radius_is_outer_radius(self):
        p = params(kappa0=0.5)
        self.assertEqual(symbols.lowfreq_radius(p), symbols.cutoff_radii(p).low_outer)


class OtherSymbolsTest(unittest.TestCase):
    def test_heat_symbol(self):
        self.assertEqual(symbols.heat_symbol(0.0, 5.0, 1.0), 1.0)
        self.assertEqual(symbols.heat_symbol(3.0, 0.0, 1.0), 1.0)
        self.assertAlmostEqual(symbols.heat_symbol(1.0, 1.0, 1.0), math.exp(-1.0))

    def test_helmholtz_symbol(self):
        assert_allclose(symbols.helmholtz_symbol([1.0, 0.0]), [[0.0, 0.0], [0.0, 1.0]])
        assert_allclose(symbols.helmholtz_symbol([0.0, 0.0]), np.eye(2))

    def test_helmholtz_is_idempotent(self):
        P = symbols.helmholtz_symbol([0.3, -1.7])
        assert_allclose(P @ P, P, atol=1e-15)

    def test_inverse_elliptic_symbols(self):
        self.assertEqual(symbols.inverse_elliptic_symbols(0.0, 1.0), (0.0, 1.0))
        assert_allclose(symbols.inverse_elliptic_symbols(4.0, 0.0), (0.25, 1.0))
        assert_allclose(symbols.inverse_elliptic_symbols(1.0, 1.0), (0.5, 0.5))

    def test_riesz_symbols(self):
        R = symbols.riesz_symbols(np.array([0.0, 3.0]), np.array([0.0, 4.0]))
        assert_allclose(R[:, 0], [0.0, 0.0])
        assert_allclose(R[:, 1], [-0.6j, -0.8j])
