#!/usr/bin/env python3
"""
Integration Tests
Runs the command-line entry point end to end against the bundled configs.
"""
import contextlib
import io
import json
import sys
import tempfile
import textwrap
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

print("🧪 INTEGRATION TEST SUITE - Command Line Runs")
print("=" * 60)

# Add scripts to path
sys.path.insert(0, 'scripts')


def run_cli(*argv):
    """Invoke main() and return (exit code, captured stderr)"""
    from orchestrator import main

    stderr = io.StringIO()
    with contextlib.redirect_stderr(stderr):
        code = main(list(argv))
    return code, stderr.getvalue()


def read_outputs(out_dir, kind):
    out = Path(out_dir)
    summary = json.loads((out / 'summary.json').read_text(encoding='utf-8'))
    frame = pd.read_csv(out / f"{kind}.csv", skiprows=1)
    return summary, frame


class TestExperimentRuns(unittest.TestCase):
    """One run per experiment kind"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_modes(self):
        """Spectrum table for ten ions"""
        code, _ = run_cli('modes', '--config', 'config/modes_n10.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'modes')
        self.assertEqual(len(frame), 9)
        self.assertLessEqual(summary['results']['max_rel_deviation_lowest3'], 0.05)
        self.assertEqual(summary['schema'], 'ionbath.modes.v1')

    def test_kernels_match_closed_form(self):
        """T = 0 continuum kernels reproduce (1/2) ln(1 + t^2)"""
        code, _ = run_cli('kernels', '--config', 'config/kernels_zero_temperature.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'kernels')
        self.assertEqual(len(frame), 200)
        self.assertTrue(summary['results']['closed_form_passed'])
        reference = 0.5 * np.log1p(frame['t'].to_numpy() ** 2)
        error = np.abs(frame['gamma'].to_numpy() - reference) / np.maximum(reference, 1.0)
        self.assertLessEqual(error.max(), 1e-8)

    def test_csv_format(self):
        """Schema line first, LF endings"""
        run_cli('kernels', '--config', 'config/kernels_zero_temperature.json', '--out', self.out)
        raw = (Path(self.out) / 'kernels.csv').read_bytes()
        self.assertTrue(raw.startswith(b'# schema: ionbath.kernels.v1\n'))
        self.assertNotIn(b'\r', raw)
        header = raw.split(b'\n')[1].decode()
        self.assertEqual(header, 't,gamma,gamma_plus,gamma_minus,phi_plus,phi_minus')

    def test_dfs_entangling_time(self):
        """t* = pi / (8 kappa) and a maximally entangled state there"""
        code, _ = run_cli('dfs', '--config', 'config/dfs_generation.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'dfs')
        results = summary['results']
        self.assertAlmostEqual(results['kappa'], 0.002, places=15)
        self.assertAlmostEqual(results['t_star'] / (np.pi / 0.016), 1.0, places=12)
        self.assertGreaterEqual(results['fidelity_at_t_star'], 1.0 - 1e-12)
        self.assertGreaterEqual(results['concurrence_at_t_star'], 1.0 - 1e-12)
        self.assertEqual(len(frame), 201)

    def test_physical_units(self):
        """A 5 MHz trap with lambda = 1e7 Hz entangles at a rate in [1 kHz, 1 MHz]"""
        code, _ = run_cli('dfs', '--config', 'config/dfs_physical_units.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, _ = read_outputs(self.out, 'dfs')
        kappa_hz = summary['results']['kappa_hz']
        self.assertGreaterEqual(kappa_hz, 1e3)
        self.assertLessEqual(kappa_hz, 1e6)
        self.assertAlmostEqual(kappa_hz / 1e4, 1.0, places=9)

    def test_dephase(self):
        """DFS coherence shrinks but populations stay put"""
        code, _ = run_cli('dephase', '--config', 'config/dephase_dfs.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'dephase')
        self.assertEqual(len(frame), 101)
        self.assertLess(summary['results']['final_rho23_abs'], 0.5)
        np.testing.assert_allclose(frame['p10'], 0.5, atol=1e-15)

    def test_exact_agrees_with_laws(self):
        """Two-mode exact evolution at Delta = 0 follows exp(-2 Gamma_+/-)"""
        code, _ = run_cli('exact', '--config', 'config/exact_dephasing.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'exact')
        self.assertTrue(summary['results']['law_agreement'])
        self.assertLessEqual(summary['results']['max_law_deviation'], 1e-8)
        self.assertLess(summary['results']['truncation_change'], 1e-9)
        self.assertGreaterEqual(summary['results']['fock_dim'], 10)
        self.assertIn('rho23_law', frame.columns)

    def test_exact_kappa(self):
        """Fitted swap rate within 10 % of the effective theory"""
        code, _ = run_cli('exact', '--config', 'config/exact_kappa.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'exact')
        self.assertEqual(len(frame), 400)
        self.assertAlmostEqual(summary['results']['kappa_ratio'], 1.0, delta=0.10)

    def test_teleport_relay(self):
        """Werner p = 0.9 relay: 0.95 for one hop, decreasing afterwards"""
        code, _ = run_cli('teleport', '--config', 'config/teleport_relay.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'teleport')
        self.assertEqual(list(frame['hop']), [1, 2, 3, 4, 5])
        self.assertAlmostEqual(frame['relay_fidelity'].iloc[0], 0.95, places=12)
        self.assertTrue(np.all(np.diff(frame['relay_fidelity']) <= 0))
        self.assertEqual(summary['seed'], 20240101)


class TestDeterminism(unittest.TestCase):
    """Same config and seed, same bytes"""

    def test_repeated_runs_identical(self):
        """Two teleport runs write byte-identical files"""
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            for out in (first, second):
                code, _ = run_cli('teleport', '--config', 'config/teleport_relay.json', '--out', out)
                self.assertEqual(code, 0)
            for name in ('teleport.csv', 'summary.json'):
                self.assertEqual((Path(first) / name).read_bytes(), (Path(second) / name).read_bytes())

    def test_seed_override(self):
        """--seed replaces rng_seed; the same seed reproduces the estimate and another changes it"""
        with tempfile.TemporaryDirectory() as work:
            config = Path(work) / 'dephased.json'
            config.write_text(json.dumps({
                'kind': 'teleport',
                'teleport': {'resource': 'dephased', 'coherence_factor': 0.5, 'n_hops': 2, 'n_samples': 2000},
                'rng_seed': 3,
            }), encoding='utf-8')
            results = {}
            for name, extra in (('base', ()), ('again', ()), ('other', ('--seed', '7'))):
                out = Path(work) / name
                code, _ = run_cli('teleport', '--config', str(config), '--out', str(out), *extra)
                self.assertEqual(code, 0)
                results[name], _ = read_outputs(out, 'teleport')
            self.assertEqual(results['other']['seed'], 7)
            base = results['base']['results']
            self.assertEqual(base['monte_carlo_fidelity'], results['again']['results']['monte_carlo_fidelity'])
            self.assertNotEqual(base['monte_carlo_fidelity'], results['other']['results']['monte_carlo_fidelity'])
            self.assertEqual(base['average_fidelity'], results['other']['results']['average_fidelity'])


class TestSweeps(unittest.TestCase):
    """Parameter grids"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_separation_sweep(self):
        """Coincident qubits have Gamma_- = 0"""
        code, _ = run_cli('sweep', '--config', 'config/sweep_separation.json', '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'sweep')
        self.assertEqual(list(frame['point']), [0, 1, 2])
        self.assertTrue((frame['status'] == 'ok').all())
        self.assertEqual(frame['result.gamma_minus_max'].iloc[0], 0.0)
        self.assertGreater(frame['result.gamma_minus_max'].iloc[1], 0.0)
        self.assertEqual(summary['results']['n_failed'], 0)

    def test_delta_sweep_scaling(self):
        """kappa grows as Delta^2"""
        code, _ = run_cli('sweep', '--config', 'config/sweep_delta.json', '--out', self.out)
        self.assertEqual(code, 0)
        _, frame = read_outputs(self.out, 'sweep')
        kappas = frame['result.kappa'].to_numpy()
        np.testing.assert_allclose(kappas[1:] / kappas[:-1], 4.0, rtol=1e-12)

    def test_failed_point_is_recorded(self):
        """A resonant point becomes a failed row; the sweep still succeeds"""
        config = Path(self.out) / 'resonant.json'
        config.write_text(json.dumps({
            'kind': 'sweep',
            'sweep': {'experiment': 'dfs', 'axes': [{'parameter': 'dfs.omega_0', 'values': [1.0, 1.5]}]},
            'dfs': {'delta': 0.05, 'omega_0': 1.5, 'lambda': 0.5},
        }), encoding='utf-8')
        code, _ = run_cli('sweep', '--config', str(config), '--out', self.out)
        self.assertEqual(code, 0)
        summary, frame = read_outputs(self.out, 'sweep')
        self.assertEqual(list(frame['status']), ['failed', 'ok'])
        self.assertTrue(frame['reason'].iloc[0])
        self.assertEqual(summary['results']['n_failed'], 1)

    def test_temperature_sweep_lifetime(self):
        """A hotter bath gives a finite, strictly shorter DFS lifetime"""
        code, _ = run_cli('sweep', '--config', 'config/sweep_temperature.json', '--out', self.out)
        self.assertEqual(code, 0)
        _, frame = read_outputs(self.out, 'sweep')
        self.assertTrue((frame['status'] == 'ok').all())
        taus = frame['result.tau_dfs'].astype(float).to_numpy()
        self.assertTrue(np.all(np.isfinite(taus)))
        self.assertTrue(np.all(np.diff(taus) < 0))
        self.assertTrue(np.all(frame['result.gamma_minus_plateau'].astype(float) > 1.0))

    def test_unexpected_point_error_is_recorded(self):
        """Errors outside the validation types still become failed rows"""
        from unittest import mock

        import orchestrator
        from experiment_config import parse_config

        def fragile(config, options):
            if config.dfs.omega_0 == 1.0:
                raise ZeroDivisionError('division by zero')
            return orchestrator.run_dfs(config, options)

        config = parse_config({
            'kind': 'sweep',
            'sweep': {'experiment': 'dfs', 'axes': [{'parameter': 'dfs.omega_0', 'values': [1.0, 1.5]}]},
            'dfs': {'delta': 0.05, 'omega_0': 1.5, 'lambda': 0.5},
        })
        patched = dict(orchestrator.EXPERIMENTS['dfs'], runner=fragile)
        with mock.patch.dict(orchestrator.EXPERIMENTS, {'dfs': patched}):
            frame, scalars, _ = orchestrator.run_sweep(config, orchestrator.RunOptions())
        self.assertEqual(list(frame['status']), ['failed', 'ok'])
        self.assertEqual(frame['reason'].iloc[0], 'ZeroDivisionError: division by zero')
        self.assertEqual(scalars['n_failed'], 1)

    def test_parallel_sweep_matches_serial(self):
        """Worker count does not change the sweep table"""
        with tempfile.TemporaryDirectory() as parallel:
            run_cli('sweep', '--config', 'config/sweep_temperature.json', '--out', self.out)
            run_cli('sweep', '--config', 'config/sweep_temperature.json', '--out', parallel, '--workers', '2')
            self.assertEqual((Path(self.out) / 'sweep.csv').read_bytes(),
                             (Path(parallel) / 'sweep.csv').read_bytes())


class TestConfigErrors(unittest.TestCase):
    """Invalid configs exit with status 2 and a located message"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, text):
        path = self.dir / 'config.json'
        path.write_text(textwrap.dedent(text).lstrip(), encoding='utf-8')
        return str(path)

    def test_unknown_field(self):
        """The offending key and its line are reported"""
        path = self._write("""
            {
              "kind": "modes",
              "chain": {
                "n_ions": 10,
                "spring": 2.0
              }
            }
        """)
        code, stderr = run_cli('modes', '--config', path, '--out', str(self.dir / 'out'))
        self.assertEqual(code, 2)
        self.assertIn('line 5', stderr)
        self.assertIn('chain.spring', stderr)
        self.assertFalse((self.dir / 'out').exists())

    def test_missing_field(self):
        """Required fields are named"""
        path = self._write("""
            {
              "kind": "kernels",
              "chain": {"n_ions": 10},
              "bath": {"omega_c": 1.0},
              "time_grid": {"n_points": 10}
            }
        """)
        code, stderr = run_cli('kernels', '--config', path)
        self.assertEqual(code, 2)
        self.assertIn('time_grid.t_end', stderr)
        self.assertIn('line 5', stderr)

    def test_invalid_json(self):
        """Syntax errors carry the line number"""
        path = self._write("""
            {
              "kind": "modes",
              "chain": {"n_ions": 10,}
            }
        """)
        code, stderr = run_cli('validate', '--config', path)
        self.assertEqual(code, 2)
        self.assertIn('line 3', stderr)

    def test_kind_mismatch(self):
        """The subcommand must match the config kind"""
        code, stderr = run_cli('dfs', '--config', 'config/modes_n10.json')
        self.assertEqual(code, 2)
        self.assertIn('kind', stderr)

    def test_bad_seed(self):
        """Seeds are 64-bit unsigned"""
        code, _ = run_cli('validate', '--config', 'config/modes_n10.json', '--seed', '-1')
        self.assertEqual(code, 2)

    def test_invalid_physics_parameters(self):
        """Out-of-range values exit with status 2"""
        path = self._write("""
            {
              "kind": "teleport",
              "teleport": {"resource": "werner", "werner_p": 1.5}
            }
        """)
        code, _ = run_cli('validate', '--config', path)
        self.assertEqual(code, 2)

    def test_kappa_mode_needs_dfs(self):
        """Exact swap-rate runs need the dfs block; dephasing runs default to Delta = 0"""
        path = self._write("""
            {
              "kind": "exact",
              "chain": {"n_ions": 10, "qubit_positions": [4, 5]},
              "truncation": {"n_modes": 1, "fock_dim": 6},
              "exact": {"mode": "kappa"}
            }
        """)
        code, stderr = run_cli('validate', '--config', path)
        self.assertEqual(code, 2)
        self.assertIn('dfs', stderr)
        code, _ = run_cli('validate', '--config', 'config/exact_dephasing.json')
        self.assertEqual(code, 0)

    def test_validate_writes_nothing(self):
        """validate checks the config and exits 0"""
        code, stderr = run_cli('validate', '--config', 'config/exact_kappa.json', '--out', str(self.dir / 'out'))
        self.assertEqual(code, 0)
        self.assertIn('config valid', stderr)
        self.assertFalse((self.dir / 'out').exists())


class TestOutputStore(unittest.TestCase):
    """Atomic writes inside the output directory"""

    def test_refuses_path_traversal(self):
        """Names escaping the directory are rejected"""
        from orchestrator import OutputStore

        with tempfile.TemporaryDirectory() as out:
            store = OutputStore(out)
            with self.assertRaises(ValueError):
                store.write_text('../escape.csv', 'x\n')

    def test_overwrites_atomically(self):
        """Rewriting leaves only the final file behind"""
        from orchestrator import OutputStore

        with tempfile.TemporaryDirectory() as out:
            store = OutputStore(out)
            store.write_text('a.csv', 'first\n')
            path = store.write_text('a.csv', 'second\n')
            self.assertEqual(path.read_text(encoding='utf-8'), 'second\n')
            self.assertEqual(sorted(p.name for p in Path(out).iterdir()), ['a.csv'])


# Run all tests
if __name__ == '__main__':
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestExperimentRuns))
    suite.addTests(loader.loadTestsFromTestCase(TestDeterminism))
    suite.addTests(loader.loadTestsFromTestCase(TestSweeps))
    suite.addTests(loader.loadTestsFromTestCase(TestConfigErrors))
    suite.addTests(loader.loadTestsFromTestCase(TestOutputStore))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    print("\n" + "=" * 60)
    if result.wasSuccessful():
        print("✅ ALL INTEGRATION TESTS PASSED!")
        print(f"   Ran {result.testsRun} tests successfully")
    else:
        print("❌ SOME TESTS FAILED")
        print(f"   Failures: {len(result.failures)}")
        print(f"   Errors: {len(result.errors)}")
    print("=" * 60)

    sys.exit(0 if result.wasSuccessful() else 1)
