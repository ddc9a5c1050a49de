#!/bin/env python

import io
import os
import unittest
from fractions import Fraction

from dpbound.lang import model, parse, parse_file, render_program, write_program
from dpbound.mechanisms import above_threshold_program, rr_program, rrcount_program

SAMPLES = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'samples')


class TestGenerator(unittest.TestCase):

    def test_write_program(self):
        program = rr_program(2, Fraction(1, 5))
        out = io.StringIO()
        write_program(program, out, title='randomized response\nn = 2')
        text = out.getvalue()
        lines = text.splitlines()
        self.assertTrue(lines[0].startswith('# dpbound program'))
        self.assertIn('# n = 2', lines)
        self.assertEqual(program, parse(text))

    def test_builtin_programs_render(self):
        for program in (rr_program(3, Fraction(1, 5)), rrcount_program(3, Fraction(1, 4)),
                        above_threshold_program(2, 3, 1, Fraction(1, 2), Fraction(1, 3))):
            self.assertEqual(program, parse(render_program(program)))

    def test_rendered_coins(self):
        for n in range(1, 7):
            text = render_program(rr_program(n, Fraction(1, 5)))
            self.assertEqual(n, text.count('flip '))
            self.assertEqual(n, model.count_flips(parse(text).body))

    def test_samples_parse(self):
        for name in ('rr2.dpp', 'rrcount3.dpp', 'noisy_query.dpp'):
            program = parse_file(os.path.join(SAMPLES, name))
            self.assertEqual(program, parse(render_program(program)), name)


if __name__ == '__main__':
    unittest.main()
