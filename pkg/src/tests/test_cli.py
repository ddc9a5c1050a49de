#!/bin/env python

import contextlib
import io
import json
import os
import tempfile
import unittest

from dpbound.cli import exact, format_input, main

SAMPLES = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'samples')


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):

    def test_privacy(self):
        code, out, _ = run('privacy', '--mech', 'rr', '--n', '2', '--lambda', '1/5', '--jobs', '1')
        self.assertEqual(0, code)
        report = json.loads(out)
        self.assertEqual('4/1', report['p'])
        self.assertEqual(4.0, report['p_float'])
        self.assertEqual([[0, 0], [1, 0], [0, 0]], report['witness'])
        self.assertEqual(1, report['solver_runs'])
        self.assertEqual('restricted', report['mode'])
        self.assertEqual('1/5', report['params']['lambda'])
        self.assertEqual(4, report['bdd_size'])

    def test_accuracy(self):
        code, out, _ = run('accuracy', '--mech', 'rrcount', '--n', '8', '--alpha', '3', '--jobs', '1')
        self.assertEqual(0, code)
        report = json.loads(out)
        self.assertAlmostEqual(0.9437184, report['p_float'])
        self.assertEqual([0] * 8, report['witness'])

    def test_rank_csv(self):
        code, out, _ = run('rank', '--mech', 'rrcount', '--n', '8', '--alpha', '3', '--top', '2', '--jobs', '1')
        self.assertEqual(0, code)
        lines = out.strip().splitlines()
        self.assertEqual('input,one_minus_beta_exact,one_minus_beta_float', lines[0])
        self.assertEqual(3, len(lines))
        self.assertTrue(lines[1].startswith('00000000,'))

    def test_sweep(self):
        code, out, _ = run('sweep', '--n', '2', '--lambdas', '1/5,1/2', '--alpha', '1', '--jobs', '1')
        self.assertEqual(0, code)
        lines = out.strip().splitlines()
        self.assertEqual(3, len(lines))
        self.assertTrue(lines[0].startswith('lambda,'))
        self.assertIn(',4/1,', lines[1])
        self.assertIn(',1/1,', lines[2])

    def test_bench(self):
        code, out, _ = run('bench', '--n-min', '1', '--n-max', '3', '--format', 'json', '--jobs', '1')
        self.assertEqual(0, code)
        rows = json.loads(out)
        self.assertEqual(6, len(rows))
        runs = {(row['n'], row['mode']): row['solver_runs'] for row in rows}
        self.assertEqual(8, runs[3, 'exhaustive'])
        self.assertEqual(1, runs[3, 'restricted'])
        self.assertTrue(all(row['p_exact'] == '4/1' for row in rows))

    def test_bench_refuses_large_exhaustive(self):
        code, out, err = run('bench', '--n-max', '13', '--mode', 'exhaustive')
        self.assertEqual(3, code)
        self.assertEqual('', out)
        self.assertIn('exhaustive bench', err)

    def test_bench_skips_exhaustive_above_cap(self):
        code, out, _ = run('bench', '--n-min', '1', '--n-max', '3', '--max-exhaustive-n', '2', '--format', 'json',
                           '--jobs', '1')
        self.assertEqual(0, code)
        rows = json.loads(out)
        self.assertEqual([(1, 'exhaustive'), (1, 'restricted'), (2, 'exhaustive'), (2, 'restricted'),
                          (3, 'restricted')], [(row['n'], row['mode']) for row in rows])

    def test_infer(self):
        code, out, _ = run('infer', '--n', '2', '--jobs', '1')
        self.assertEqual(0, code)
        rows = json.loads(out)
        self.assertEqual(3, len(rows))
        self.assertEqual({'input': '00', 'output': '00', 'p_exact': '16/25', 'p_float': 0.64}, rows[0])

    def test_program(self):
        code, out, _ = run('privacy', '--program', os.path.join(SAMPLES, 'rr2.dpp'), '--jobs', '1')
        self.assertEqual(0, code)
        report = json.loads(out)
        self.assertEqual('4/1', report['p'])
        self.assertEqual('exhaustive', report['mode'])

    def test_program_file_errors(self):
        code, out, err = run('privacy', '--program', '/nonexistent/missing.dpp')
        self.assertEqual(2, code)
        self.assertEqual('', out)
        self.assertIn('dpbound: error: cannot read /nonexistent/missing.dpp', err)
        with tempfile.TemporaryDirectory() as folder:
            file_name = os.path.join(folder, 'latin1.dpp')
            with open(file_name, 'wb') as fh:
                fh.write(b'fun(x: bool) { x \xe9 }')
            code, _, err = run('privacy', '--program', file_name)
        self.assertEqual(2, code)
        self.assertIn('not UTF-8', err)

    def test_bench_counting_times(self):
        code, out, _ = run('bench', '--n-min', '2', '--n-max', '2', '--format', 'json', '--jobs', '1')
        self.assertEqual(0, code)
        for row in json.loads(out):
            self.assertGreaterEqual(row['wmc_exact_time'], 0)
            self.assertGreaterEqual(row['wmc_float_time'], 0)

    def test_rank_help(self):
        out = io.StringIO()
        with self.assertRaises(SystemExit), contextlib.redirect_stdout(out):
            main(['rank', '--help'])
        self.assertIn('--top K', out.getvalue())
        self.assertIn('lowest inputs', out.getvalue())

    def test_error_codes(self):
        code, out, err = run('accuracy', '--mech', 'rr', '--alpha', '1')
        self.assertEqual(2, code)
        self.assertEqual('', out)
        self.assertIn('dpbound: error:', err)
        self.assertEqual(2, run('privacy', '--mech', 'above', '--mode', 'restricted')[0])
        self.assertEqual(2, run('accuracy', '--mech', 'rrcount')[0])
        self.assertEqual(2, run('privacy', '--lambda', '3/2')[0])
        with self.assertRaises(SystemExit) as context, contextlib.redirect_stderr(io.StringIO()):
            main(['privacy', '--mech', 'laplace'])
        self.assertEqual(2, context.exception.code)

    def test_formatting(self):
        self.assertEqual('4/1', exact(4))
        self.assertEqual('inf', exact(float('inf')))
        self.assertEqual('0110', format_input((0, 1, 1, 0)))
        self.assertEqual('2,0,1', format_input((2, 0, 1)))


if __name__ == '__main__':
    unittest.main()
