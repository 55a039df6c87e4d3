import os
import io
import json
import unittest
from contextlib import redirect_stdout, redirect_stderr

import numpy as np
import pandas as pd

from magnonlink.cli import run
from magnonlink.estimate.fitting import synthesize_dispersion
from magnonlink.tests.config import (
    COHERENT, testdatadir, tmpdir_context)


def invoke(*args):
    '''Returns (exit code, stdout, stderr).'''
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run(list(args))
    return code, out.getvalue(), err.getvalue()


class CommandTests(unittest.TestCase):

    def test_distance(self):
        code, out, err = invoke('distance', '--preset', 'remote_coherent',
                                '--sigma', '0.35')
        self.assertEqual(code, 0)
        self.assertIn("17.3 m", out)
        self.assertIn("threshold", out)

        code, out, err = invoke('distance', '--preset', 'remote_coherent')
        self.assertEqual(code, 0)
        self.assertIn("12.5 m", out)
        self.assertIn("coherent", out)

    def test_presets(self):
        code, out, err = invoke('presets')
        self.assertEqual(code, 0)
        for name in ['positionA', 'positionB', 'remote_coherent',
                     'remote_dissipative']:
            self.assertIn(name, out)
        self.assertIn("kappa", out)

    def test_sweep(self):
        with tmpdir_context() as tmpdir:
            out1 = os.path.join(tmpdir, 'loop1.csv')
            out2 = os.path.join(tmpdir, 'loop2.csv')
            code, out, err = invoke('sweep', '--preset', 'positionA',
                                    '--out', out1)
            self.assertEqual(code, 0)
            self.assertIn("up sweep: jumps at 31.75 MHz", out)
            self.assertIn("down sweep: jumps at -31.75 MHz", out)
            self.assertIn("up sweep: oscillatory-unstable at", out)
            frame = pd.read_csv(out1)
            self.assertEqual(len(frame), 2*241)
            self.assertEqual(list(frame.columns)[:3],
                             ['direction', 'delta', 'nu_s'])
            self.assertIn('linearly_stable', frame.columns)
            self.assertFalse(frame['linearly_stable'].all())

            invoke('sweep', '--preset', 'positionA', '--out', out2)
            with open(out1, 'rb') as f1, open(out2, 'rb') as f2:
                self.assertEqual(f1.read(), f2.read())

    def test_sweep_map(self):
        with tmpdir_context() as tmpdir:
            mapfile = os.path.join(tmpdir, 'map.csv')
            code, out, err = invoke(
                'sweep', '--scenario',
                os.path.join(testdatadir, 'remote_override.json'),
                '--direction', 'up', '--map', mapfile, '--nu-span', '10',
                '--nu-step', '0.5')
            self.assertEqual(code, 0)
            matrix = pd.read_csv(mapfile)
        self.assertEqual(matrix.shape, (5, 42))

    def test_dispersion(self):
        with tmpdir_context() as tmpdir:
            path = os.path.join(tmpdir, 'dispersion.csv')
            code, out, err = invoke('dispersion', '--preset', 'positionB',
                                    '--out', path)
            self.assertEqual(code, 0)
            frame = pd.read_csv(path)
        self.assertEqual(len(frame), 241)
        self.assertTrue(np.all(frame['stable']))
        self.assertTrue(np.all(frame['linearly_stable']))
        self.assertNotIn("oscillatory-unstable", out)

    def test_timetrace(self):
        with tmpdir_context() as tmpdir:
            path = os.path.join(tmpdir, 'trace.csv')
            code, out, err = invoke('timetrace', '--preset', 'positionB',
                                    '--delta', '0', '--duration', '2',
                                    '--window', '0.5', '--out', path)
            self.assertEqual(code, 0)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns),
                         ['t_us', 're_a', 'im_a', 're_m', 'im_m'])
        self.assertIn("nu_s", out)

    def test_sigma_and_phase(self):
        with tmpdir_context() as tmpdir:
            path = os.path.join(tmpdir, 'sigma.csv')
            code, out, err = invoke('sigma', '--preset', 'remote_coherent',
                                    '--sigmas', '1,0.63,0', '--out', path)
            self.assertEqual(code, 0)
            frame = pd.read_csv(path)
            self.assertEqual(len(frame), 3)
            self.assertAlmostEqual(frame['length_m'][1], 8.166, delta=0.01)

            path = os.path.join(tmpdir, 'phase.csv')
            code, out, err = invoke('phase', '--preset', 'remote_coherent',
                                    '--out', path)
            self.assertEqual(code, 0)
            self.assertEqual(len(pd.read_csv(path)), 13)

    def test_fit(self):
        data = synthesize_dispersion(COHERENT, np.arange(-60, 61, 4.))
        with tmpdir_context() as tmpdir:
            datafile = os.path.join(tmpdir, 'data.csv')
            report = os.path.join(tmpdir, 'fit.json')
            data.write_csv(datafile)
            code, out, err = invoke('fit', '--data', datafile, '--init',
                                    'g=10', '--init', 'alpha_eff=2',
                                    '--starts', '2', '--out', report)
            self.assertEqual(code, 0)
            with open(report) as f:
                result = json.load(f)
        self.assertAlmostEqual(result['params']['g'], 11., places=3)
        self.assertAlmostEqual(result['params']['alpha_eff'], 1.8, places=3)


class ExitCodeTests(unittest.TestCase):

    def test_help(self):
        code, out, err = invoke('--help')
        self.assertEqual(code, 0)
        self.assertIn("sweep", out)

    def test_usage_errors(self):
        self.assertEqual(invoke('sweep')[0], 1)
        self.assertEqual(invoke('sweep', '--preset', 'positionC')[0], 1)
        self.assertEqual(invoke('sweep', '--preset', 'positionA',
                                '--scenario', os.path.join(
                                    testdatadir, 'positionA.json'))[0], 1)
        self.assertEqual(invoke('sweep', '--preset', 'positionA', '--out',
                                '/nonexistent/dir/loop.csv')[0], 1)
        self.assertEqual(invoke('fit', '--data', os.path.join(
            testdatadir, 'positionA.json'), '--init', 'g')[0], 1)

    def test_input_errors(self):
        code, out, err = invoke('sweep', '--scenario', os.path.join(
            testdatadir, 'malformed.json'))
        self.assertEqual(code, 1)
        self.assertIn("Malformed", err)
        code, out, err = invoke('dispersion', '--scenario', os.path.join(
            testdatadir, 'typo.json'))
        self.assertEqual(code, 1)
        self.assertIn("gama", err)

    def test_numerical_failure(self):
        code, out, err = invoke('sweep', '--scenario', os.path.join(
            testdatadir, 'decoupled.json'))
        self.assertEqual(code, 2)
        self.assertIn("no synchronization", err)


if __name__ == '__main__':
    unittest.main()
