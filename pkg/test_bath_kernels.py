#!/usr/bin/env python3
"""
Bath Kernel Tests
Continuum quadrature against closed forms, collective-decay ordering, mode sums and
the DFS lifetime search.
"""
import sys
import unittest
import warnings

import numpy as np

print("🧪 BATH KERNEL TEST SUITE")
print("=" * 60)

# Add scripts to path
sys.path.insert(0, 'scripts')


class TestThermalFactors(unittest.TestCase):
    """coth, occupation and bath construction"""

    def test_coth_half_zero_temperature(self):
        """coth(w / 2T) is 1 at T = 0"""
        from bath_kernels import coth_half

        np.testing.assert_array_equal(coth_half(np.array([0.1, 1.0, 5.0]), 0.0), [1.0, 1.0, 1.0])

    def test_coth_half_matches_numpy(self):
        """Regular branch agrees with 1 / tanh"""
        from bath_kernels import coth_half

        self.assertAlmostEqual(coth_half(1.0, 0.5), 1.0 / np.tanh(1.0), places=14)

    def test_coth_half_small_argument(self):
        """Series branch ~ 2T / w for w << T"""
        from bath_kernels import coth_half

        value = coth_half(1e-9, 1.0)
        self.assertAlmostEqual(value / (2.0 / 1e-9), 1.0, places=12)

    def test_thermal_occupation(self):
        """Bose occupation, zero at T = 0"""
        from bath_kernels import thermal_occupation

        self.assertEqual(thermal_occupation(1.0, 0.0), 0.0)
        self.assertAlmostEqual(thermal_occupation(1.0, 1.0), 1.0 / (np.e - 1.0), places=14)

    def test_from_chain(self):
        """eta = k~^2 / (2 m omega_z nu) with nu = sqrt 3 in natural units"""
        from bath_kernels import BathParams
        from chain_model import ChainConfig

        bath = BathParams.from_chain(ChainConfig(n_ions=10, laser_wavenumber_ktilde=0.1), 0.0, 1.0)
        self.assertAlmostEqual(bath.eta, 0.01 / (2.0 * np.sqrt(3.0)), places=14)
        self.assertAlmostEqual(bath.dispersion_velocity, 10.0 / (2.0 * np.pi * np.sqrt(2.0)), places=14)

    def test_invalid_bath(self):
        """Non-positive eta or omega_c is rejected"""
        from bath_kernels import BathParams

        with self.assertRaises(ValueError):
            BathParams(eta=0.0, omega_c=1.0)
        with self.assertRaises(ValueError):
            BathParams(eta=1.0, omega_c=-1.0)
        with self.assertRaises(ValueError):
            BathParams(eta=1.0, omega_c=1.0, temperature=-0.1)

    def test_regime_warning(self):
        """omega_c not well above T raises a validity warning"""
        from bath_kernels import BathParams
        from sim_errors import PhysicsValidityWarning

        with self.assertWarns(PhysicsValidityWarning):
            BathParams(eta=1.0, omega_c=1.0, temperature=0.5)


class TestContinuumKernels(unittest.TestCase):
    """Quadrature of the Ohmic continuum"""

    def test_zero_temperature_closed_forms(self):
        """Gamma = (eta/2) ln(1 + w_c^2 t^2) and S = eta arctan(w_c t) to 1e-8"""
        from bath_kernels import BathParams, gamma, phase_integral

        bath = BathParams(eta=1.0, omega_c=1.0)
        for t in np.linspace(0.0, 100.0, 200)[1:]:
            expected = 0.5 * np.log1p(t * t)
            self.assertLessEqual(abs(gamma(t, bath) - expected) / expected, 1e-8)
            expected_phase = np.arctan(t)
            self.assertLessEqual(abs(phase_integral(t, bath) - expected_phase) / expected_phase, 1e-8)

    def test_scaled_closed_form(self):
        """eta and omega_c enter as (eta/2) ln(1 + w_c^2 t^2)"""
        from bath_kernels import BathParams, gamma

        bath = BathParams(eta=0.3, omega_c=2.5)
        for t in (0.2, 3.0, 40.0):
            expected = 0.15 * np.log1p((2.5 * t) ** 2)
            self.assertAlmostEqual(gamma(t, bath) / expected, 1.0, delta=1e-8)

    def test_zero_at_t_zero(self):
        """All kernels vanish at t = 0"""
        from bath_kernels import BathParams, gamma, gamma_pm, phase_integral

        bath = BathParams(eta=1.0, omega_c=1.0, dispersion_velocity=1.0)
        self.assertEqual(gamma(0.0, bath), 0.0)
        self.assertEqual(gamma_pm(0.0, 0.5, bath), (0.0, 0.0))
        self.assertEqual(phase_integral(0.0, bath), 0.0)

    def test_coincident_qubits(self):
        """r = 0: Gamma_+ = 2 Gamma and Gamma_- = 0 exactly"""
        from bath_kernels import BathParams, gamma, gamma_pm

        bath = BathParams(eta=1.0, omega_c=1.0)
        plus, minus = gamma_pm(2.0, 0.0, bath)
        self.assertEqual(minus, 0.0)
        self.assertEqual(plus, 2.0 * gamma(2.0, bath))

    def test_protection_ordering(self):
        """Gamma_- < Gamma < Gamma_+ for 0 < r <= L/10"""
        from bath_kernels import BathParams, continuum_kernels
        from chain_model import ChainConfig

        cfg = ChainConfig(n_ions=10)
        bath = BathParams.from_chain(cfg, 0.0, 1.0)
        grid = np.linspace(0.0, 50.0, 26)
        for r in (0.25, 0.5, 1.0):
            kernels = continuum_kernels(grid, r, bath)
            self.assertTrue(np.all(kernels.gamma_minus[1:] < kernels.gamma[1:]))
            self.assertTrue(np.all(kernels.gamma[1:] < kernels.gamma_plus[1:]))
        zero = continuum_kernels(grid, 0.0, bath)
        np.testing.assert_array_equal(zero.gamma_minus, np.zeros_like(grid))

    def test_collective_exponents_sum(self):
        """Gamma_+ + Gamma_- = 2 Gamma at finite temperature"""
        from bath_kernels import BathParams, continuum_kernels

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            bath = BathParams(eta=1.0, omega_c=1.0, temperature=0.3, dispersion_velocity=1.0)
        kernels = continuum_kernels([0.5, 2.0, 5.0, 20.0], 0.5, bath)
        np.testing.assert_allclose(kernels.gamma_plus + kernels.gamma_minus, 2.0 * kernels.gamma,
                                   rtol=1e-8, atol=1e-9)

    def test_collective_closed_form(self):
        """At T = 0, Gamma_+/- = Gamma +/- (eta/4) ln[(1+(t+s)^2)(1+(t-s)^2) / (1+s^2)^2]"""
        from bath_kernels import BathParams, gamma, gamma_pm

        bath = BathParams(eta=1.0, omega_c=1.0, dispersion_velocity=2.0)
        s = 0.8 / 2.0
        for t in (0.5, 4.0, 30.0):
            cross = 0.25 * np.log((1 + (t + s) ** 2) * (1 + (t - s) ** 2) / (1 + s * s) ** 2)
            plus, minus = gamma_pm(t, 0.8, bath)
            base = gamma(t, bath)
            self.assertAlmostEqual(plus, base + cross, delta=1e-8)
            self.assertAlmostEqual(minus, base - cross, delta=1e-8)

    def test_long_time_slope(self):
        """Gamma grows as pi eta T t at long times"""
        from bath_kernels import BathParams, gamma

        bath = BathParams(eta=1.0, omega_c=1.0, temperature=0.1)
        slope = (gamma(2000.0, bath) - gamma(1000.0, bath)) / 1000.0
        self.assertAlmostEqual(slope / (np.pi * 0.1), 1.0, delta=0.01)

    def test_phase_temperature_independent(self):
        """The phase integral carries no thermal factor"""
        from bath_kernels import BathParams, phi_pm

        cold = BathParams(eta=1.0, omega_c=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            warm = BathParams(eta=1.0, omega_c=1.0, temperature=0.05)
        self.assertEqual(phi_pm(3.0, 0.5, cold, 0.2, 0.1), phi_pm(3.0, 0.5, warm, 0.2, 0.1))

    def test_missing_velocity(self):
        """r > 0 needs a dispersion velocity"""
        from bath_kernels import BathParams, gamma_pm

        with self.assertRaises(ValueError):
            gamma_pm(1.0, 0.5, BathParams(eta=1.0, omega_c=1.0))


class TestModeSumKernels(unittest.TestCase):
    """Exact finite-chain sums"""

    def test_single_mode_values(self):
        """One mode: Gamma_+/- = |g|^2/w^2 coth (1 - cos wt)(1 +/- cos kr)"""
        from bath_kernels import coth_half, mode_sum_kernels
        from chain_model import ChainConfig, build_spectrum

        cfg = ChainConfig(n_ions=10, laser_wavenumber_ktilde=0.2, qubit_positions=(4, 6))
        spectrum = build_spectrum(cfg).truncated(1)
        w, k = spectrum.frequencies[0], spectrum.wavenumbers[0]
        g2 = abs(spectrum.couplings[0, 0]) ** 2
        kernels = mode_sum_kernels(spectrum, 2.0, 0.7, [0.0, 1.3, 2.9])
        for i, t in enumerate([0.0, 1.3, 2.9]):
            base = g2 / w ** 2 * coth_half(w, 0.7) * (1 - np.cos(w * t))
            self.assertAlmostEqual(kernels.gamma[i], base, places=13)
            self.assertAlmostEqual(kernels.gamma_plus[i], base * (1 + np.cos(2.0 * k)), places=13)
            self.assertAlmostEqual(kernels.gamma_minus[i], base * (1 - np.cos(2.0 * k)), places=13)

    def test_zero_separation(self):
        """Gamma_- vanishes identically at r = 0"""
        from bath_kernels import mode_sum_kernels
        from chain_model import ChainConfig, build_spectrum

        spectrum = build_spectrum(ChainConfig(n_ions=6))
        kernels = mode_sum_kernels(spectrum, 0.0, 1.0, np.linspace(0.0, 10.0, 11))
        np.testing.assert_array_equal(kernels.gamma_minus, np.zeros(11))
        np.testing.assert_allclose(kernels.gamma_plus, 2.0 * kernels.gamma, rtol=1e-14)

    def test_table_lookup(self):
        """at() reads grid points and rejects off-grid times"""
        from bath_kernels import KERNEL_COLUMNS, mode_sum_kernels
        from chain_model import ChainConfig, build_spectrum

        kernels = mode_sum_kernels(build_spectrum(ChainConfig(n_ions=4)), 1.0, 0.0, [0.0, 0.5, 1.0])
        self.assertEqual(kernels.at(0.5)['gamma'], kernels.gamma[1])
        with self.assertRaises(ValueError):
            kernels.at(0.25)
        self.assertEqual(list(kernels.to_frame().columns), KERNEL_COLUMNS)
        self.assertEqual(kernels.method, 'mode_sum')

    def test_rejects_unordered_grid(self):
        """Kernel tables need a strictly increasing grid"""
        from bath_kernels import DecoherenceKernels

        with self.assertRaises(ValueError):
            DecoherenceKernels(np.array([0.0, 1.0, 1.0]), *np.zeros((5, 3)), method='mode_sum')


class TestDfsLifetime(unittest.TestCase):
    """Root of Gamma_-(tau) = 1"""

    def test_zero_separation_never_decays(self):
        """r = 0 gives an infinite lifetime"""
        from bath_kernels import BathParams, dfs_lifetime

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            bath = BathParams(eta=1.0, omega_c=1.0, temperature=0.05, dispersion_velocity=1.0)
        result = dfs_lifetime(bath, 0.0, 10.0, 1.0)
        self.assertFalse(result.decays)
        self.assertEqual(result.tau, float('inf'))

    def test_requires_temperature(self):
        """The lifetime is defined for T > 0"""
        from bath_kernels import BathParams, dfs_lifetime

        with self.assertRaises(ValueError):
            dfs_lifetime(BathParams(eta=1.0, omega_c=1.0, dispersion_velocity=1.0), 0.5, 10.0, 1.0)

    def test_root_is_found(self):
        """Gamma_-(tau) = 1 at the returned lifetime"""
        from bath_kernels import BathParams, dfs_lifetime, gamma_pm

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            bath = BathParams(eta=1.0, omega_c=1.0, temperature=1000.0, dispersion_velocity=1.0)
            result = dfs_lifetime(bath, 0.5, 10.0, 1.0)
        self.assertTrue(result.decays)
        self.assertAlmostEqual(gamma_pm(result.tau, 0.5, bath)[1], 1.0, delta=1e-6)

    def test_inverse_square_root_scaling(self):
        """Doubling T shortens the lifetime by sqrt 2"""
        from bath_kernels import BathParams, dfs_lifetime

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            taus = []
            for temperature in (1000.0, 2000.0):
                bath = BathParams(eta=1.0, omega_c=1.0, temperature=temperature, dispersion_velocity=1.0)
                taus.append(dfs_lifetime(bath, 0.5, 10.0, 1.0).tau)
        self.assertAlmostEqual(taus[0] / taus[1], np.sqrt(2.0), delta=0.03 * np.sqrt(2.0))

    def test_lifetime_shortens_with_temperature(self):
        """tau decreases strictly as T rises"""
        from bath_kernels import BathParams, dfs_lifetime

        taus = []
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            for temperature in (0.02, 0.05, 0.1):
                bath = BathParams(eta=1.0, omega_c=1.0, temperature=temperature, dispersion_velocity=1.0)
                result = dfs_lifetime(bath, 4.0, 10.0, 1.0)
                self.assertTrue(result.decays)
                taus.append(result.tau)
        self.assertTrue(np.all(np.isfinite(taus)))
        self.assertTrue(np.all(np.diff(taus) < 0))

    def test_plateau(self):
        """Gamma_- levels off at Gamma(r / v)"""
        from bath_kernels import BathParams, dfs_lifetime, gamma, gamma_minus_plateau, gamma_pm

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            bath = BathParams(eta=1.0, omega_c=1.0, temperature=0.05, dispersion_velocity=1.0)
            plateau = gamma_minus_plateau(4.0, bath)
            self.assertEqual(plateau, gamma(4.0, bath))
            self.assertAlmostEqual(gamma_pm(500.0, 4.0, bath)[1], plateau, delta=1e-3)
            self.assertEqual(dfs_lifetime(bath, 4.0, 10.0, 1.0).plateau, plateau)
        self.assertEqual(gamma_minus_plateau(0.0, bath), 0.0)

    def test_low_plateau_never_decays(self):
        """Weak coupling keeps Gamma_- below 1 for all time"""
        from bath_kernels import BathParams, dfs_lifetime

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            bath = BathParams(eta=0.01, omega_c=1.0, temperature=0.05, dispersion_velocity=1.0)
        result = dfs_lifetime(bath, 0.5, 10.0, 1.0)
        self.assertFalse(result.decays)
        self.assertEqual(result.tau, float('inf'))
        self.assertLess(result.plateau, 1.0)
        self.assertTrue(np.isfinite(result.estimate))


# Run all tests
if __name__ == '__main__':
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestThermalFactors))
    suite.addTests(loader.loadTestsFromTestCase(TestContinuumKernels))
    suite.addTests(loader.loadTestsFromTestCase(TestModeSumKernels))
    suite.addTests(loader.loadTestsFromTestCase(TestDfsLifetime))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    print("\n" + "=" * 60)
    if result.wasSuccessful():
        print("✅ ALL BATH KERNEL TESTS PASSED!")
        print(f"   Ran {result.testsRun} tests successfully")
    else:
        print("❌ SOME TESTS FAILED")
        print(f"   Failures: {len(result.failures)}")
        print(f"   Errors: {len(result.errors)}")
    print("=" * 60)

    sys.exit(0 if result.wasSuccessful() else 1)
