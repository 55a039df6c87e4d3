import os
import json
import unittest

import numpy as np

from magnonlink.estimate.fitting import (
    DispersionData, DispersionObjective, fit_dispersion,
    synthesize_dispersion, load_dispersion_csv, predict_nu_s)
from magnonlink.model import CouplingSet
from magnonlink.simul.sync import solve_branches
from magnonlink.tests.config import (
    COHERENT, DISSIPATIVE, tmpdir_context)

GRID = np.arange(-60, 61, 1.)
NU_C = 3820.


class SynthesizeTests(unittest.TestCase):

    def test_deterministic(self):
        first = synthesize_dispersion(COHERENT, GRID, noise_mhz=0.05, seed=7)
        second = synthesize_dispersion(COHERENT, GRID, noise_mhz=0.05,
                                       seed=7)
        np.testing.assert_array_equal(first.nu_s, second.nu_s)
        other = synthesize_dispersion(COHERENT, GRID, noise_mhz=0.05, seed=8)
        self.assertFalse(np.array_equal(first.nu_s, other.nu_s))

    def test_noiseless_on_curve(self):
        data = synthesize_dispersion(COHERENT, GRID)
        self.assertEqual(len(data), 2*len(GRID))
        self.assertEqual(data.hints[:len(GRID)], ['up']*len(GRID))
        for delta, nu_s, hint in data.points[::7]:
            offsets = [s.nu_s for s in solve_branches(delta, COHERENT)]
            self.assertLess(min(abs(NU_C + offset - nu_s)
                                for offset in offsets), 1e-9)
        np.testing.assert_allclose(predict_nu_s(COHERENT, NU_C, data),
                                   data.nu_s, rtol=0, atol=1e-9)

    def test_bad_noise(self):
        with self.assertRaises(ValueError):
            synthesize_dispersion(COHERENT, GRID, noise_mhz=-1.)


class DispersionDataTests(unittest.TestCase):

    def test_check(self):
        with self.assertRaises(ValueError):
            DispersionData([0., 1., 2.], [1., 2., 3.]).check()
        with self.assertRaises(ValueError):
            DispersionData([0., 1., 2., 3.], [1., 2., 3.]).check()
        with self.assertRaises(ValueError):
            DispersionData([0., 1., 2., 3.], [1., 2., 3., 4.],
                           hints=['up', 'down', 'sideways', None]).check()
        with self.assertRaises(ValueError):
            DispersionData([0., 1., 2., 3.], [1., 2., 3., 4.],
                           weights=[1., 1., 0., 1.]).check()
        with self.assertRaises(ValueError):
            DispersionData([0., 1., 2., float("nan")],
                           [1., 2., 3., 4.]).check()

    def test_csv(self):
        data = synthesize_dispersion(COHERENT, GRID[::10], noise_mhz=0.1)
        with tmpdir_context() as tmpdir:
            path = os.path.join(tmpdir, 'dispersion.csv')
            data.write_csv(path)
            loaded = load_dispersion_csv(path)
            np.testing.assert_array_equal(loaded.deltas, data.deltas)
            np.testing.assert_array_equal(loaded.nu_s, data.nu_s)
            self.assertEqual(loaded.hints, data.hints)

            with open(path, 'w') as f:
                f.write("delta_mhz,nu_s_mhz\n0,3820\n1,3821\n2,3822\n"
                        "3,3823\n")
            self.assertEqual(load_dispersion_csv(path).hints, [None]*4)

            with open(path, 'w') as f:
                f.write("delta_mhz,nu_s_mhz,branch\n0,3820,up\n1,3821,up\n"
                        "2,3822,left\n3,3823,up\n")
            with self.assertRaises(ValueError):
                load_dispersion_csv(path)

            with open(path, 'w') as f:
                f.write("delta,nu\n0,3820\n")
            with self.assertRaises(ValueError):
                load_dispersion_csv(path)


class ObjectiveTests(unittest.TestCase):

    def test_weights(self):
        data = synthesize_dispersion(COHERENT, GRID[::5], noise_mhz=0.2,
                                     seed=3, direction='up')
        n = len(data)
        doubled = DispersionData(
            np.concatenate([data.deltas, data.deltas[:3]]),
            np.concatenate([data.nu_s, data.nu_s[:3]]),
            data.hints + data.hints[:3])
        weights = np.ones(n)
        weights[:3] = 2.
        weighted = DispersionData(data.deltas, data.nu_s, data.hints,
                                  weights)
        names = ['g', 'alpha_eff']
        template = CouplingSet(alpha_eff=1.)
        for x in [(11., 1.8), (10., 2.2), (12.5, 1.5)]:
            self.assertAlmostEqual(
                DispersionObjective(doubled, names, template, NU_C)(x),
                DispersionObjective(weighted, names, template, NU_C)(x),
                places=9)

    def test_penalty(self):
        data = synthesize_dispersion(COHERENT, GRID[::5])
        objective = DispersionObjective(data, ['g', 'alpha_eff'],
                                        CouplingSet(), NU_C)
        self.assertGreaterEqual(objective((11., -1.)), 1e12)
        self.assertAlmostEqual(objective((11., 1.8)), 0, places=12)


class FitTests(unittest.TestCase):

    def assertRecovered(self, result, expected, rtol):
        for name, value in expected.items():
            self.assertLess(abs(result.params[name] - value),
                            rtol*abs(value), name)

    def test_coherent_noiseless(self):
        data = synthesize_dispersion(COHERENT, GRID)
        result = fit_dispersion(data, ['g', 'alpha_eff'],
                                init={'g': 9., 'alpha_eff': 2.5}, starts=4)
        self.assertRecovered(result, {'g': 11., 'alpha_eff': 1.8}, 1e-3)
        self.assertLess(result.rms_residual, 1e-6)
        self.assertEqual(result.starts, 4)
        self.assertGreater(result.iterations, 0)

    def test_coherent_noisy(self):
        data = synthesize_dispersion(COHERENT, GRID, noise_mhz=0.05, seed=1)
        result = fit_dispersion(data, ['g', 'alpha'],
                                init={'g': 9., 'alpha': 2.5})
        self.assertRecovered(result, {'g': 11., 'alpha_eff': 1.8}, 0.05)
        self.assertLess(result.rms_residual, 0.1)

    def test_dissipative(self):
        data = synthesize_dispersion(DISSIPATIVE, GRID)
        result = fit_dispersion(data, ['Gamma', 'alpha_eff'],
                                init={'Gamma': 5., 'alpha_eff': 3.5},
                                starts=4)
        self.assertRecovered(result, {'Gamma': 6.2, 'alpha_eff': 3.}, 1e-3)

        data = synthesize_dispersion(DISSIPATIVE, GRID, noise_mhz=0.05,
                                     seed=2)
        result = fit_dispersion(data, ['Gamma', 'alpha_eff'],
                                init={'Gamma': 5., 'alpha_eff': 3.5},
                                starts=4)
        self.assertRecovered(result, {'Gamma': 6.2, 'alpha_eff': 3.}, 0.05)

    def test_cavity_frequency(self):
        data = synthesize_dispersion(COHERENT, GRID[::2])
        result = fit_dispersion(
            data, ['nu_c', 'g', 'alpha_eff'],
            init={'nu_c': NU_C - 0.5, 'g': 10., 'alpha_eff': 2.}, starts=4)
        self.assertLess(abs(result.params['nu_c'] - NU_C), 1e-3)
        self.assertRecovered(result, {'g': 11., 'alpha_eff': 1.8}, 1e-3)

    def test_shifted_cavity(self):
        data = synthesize_dispersion(COHERENT, GRID[::2], noise_mhz=0.05,
                                     seed=4)
        shifted = DispersionData(data.deltas, data.nu_s + 100., data.hints)
        free = ['nu_c', 'g', 'alpha_eff']
        init = {'g': 9., 'alpha_eff': 2.5}
        result = fit_dispersion(data, free, init=dict(init, nu_c=NU_C),
                                starts=2)
        moved = fit_dispersion(shifted, free,
                               init=dict(init, nu_c=NU_C + 100.), starts=2)
        self.assertLess(abs(result.params['nu_c'] - NU_C), 0.05)
        self.assertAlmostEqual(moved.params['nu_c'] - result.params['nu_c'],
                               100., places=6)
        for name in ['g', 'alpha_eff']:
            self.assertAlmostEqual(result.params[name], moved.params[name],
                                   places=6)
        self.assertAlmostEqual(result.rms_residual, moved.rms_residual,
                               places=9)

    def test_workers(self):
        data = synthesize_dispersion(COHERENT, GRID[::4], noise_mhz=0.05)
        kwargs = dict(init={'g': 9., 'alpha_eff': 2.5}, starts=2)
        serial = fit_dispersion(data, ['g', 'alpha_eff'], threads=1,
                                **kwargs)
        parallel = fit_dispersion(data, ['g', 'alpha_eff'], threads=2,
                                  **kwargs)
        self.assertEqual(serial.params, parallel.params)

    def test_bad_inputs(self):
        data = synthesize_dispersion(COHERENT, GRID[::10])
        with self.assertRaises(ValueError):
            fit_dispersion(data, ['kappa'])
        with self.assertRaises(ValueError):
            fit_dispersion(data, [])
        with self.assertRaises(ValueError):
            fit_dispersion(data, ['g'], init={'beta': 1.})
        with self.assertRaises(ValueError):
            fit_dispersion(data, ['g', 'alpha_eff'],
                           init={'alpha_eff': -1.})
        degenerate = DispersionData([5.]*6, [3820. + i for i in range(6)])
        with self.assertRaises(ValueError):
            fit_dispersion(degenerate, ['g', 'alpha_eff'])

    def test_report(self):
        data = synthesize_dispersion(COHERENT, GRID[::4])
        result = fit_dispersion(data, ['g'], init={'g': 10.},
                                model=CouplingSet(alpha_eff=1.8), starts=1)
        self.assertAlmostEqual(result.params['g'], 11., places=4)
        with tmpdir_context() as tmpdir:
            path = os.path.join(tmpdir, 'fit.json')
            result.write_json(path)
            with open(path) as f:
                saved = json.load(f)
        self.assertEqual(set(saved), {'params', 'rms_residual', 'iterations',
                                      'converged', 'loss', 'starts'})
        self.assertEqual(saved['params'], result.params)


if __name__ == '__main__':
    unittest.main()
