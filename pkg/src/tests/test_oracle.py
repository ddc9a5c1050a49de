#!/bin/env python

import unittest
from fractions import Fraction

from dpbound.compiler import joint_distribution
from dpbound.error_code import CoinCapExceeded, DomainError, SizeGuardExceeded
from dpbound.lang import parse
from dpbound.mechanisms import above_threshold, from_program, rr, rr_program, rrcount
from dpbound.oracle import (
    CoinProfile, enumerate_distribution, oracle_accuracy_bound, oracle_accuracy_profile, oracle_privacy_bound)
from dpbound.synthesis import EXHAUSTIVE, exhaustive_inference_set, inference, synthesize_accuracy, synthesize_privacy

LAMBDA = Fraction(1, 5)


class TestOracle(unittest.TestCase):

    def test_randomized_response(self):
        expected = {
            (0, 0): Fraction(16, 25),
            (0, 1): Fraction(4, 25),
            (1, 0): Fraction(4, 25),
            (1, 1): Fraction(1, 25),
        }
        self.assertEqual(expected, enumerate_distribution(rr_program(2, LAMBDA), (0, 0)))

    def test_blocks(self):
        program = rr_program(6, LAMBDA)
        x = (1, 0, 1, 1, 0, 0)
        self.assertEqual(enumerate_distribution(program, x), enumerate_distribution(program, x, jobs=3))

    def test_coin_profile(self):
        profile = CoinProfile(parse('fun() { (flip 1/2, categorical [1/2, 1/4, 1/4], flip 1/3) }'))
        self.assertEqual(['c0', 'c1.0', 'c1.1', 'c2'], [coin_id for coin_id, _ in profile.coins])
        self.assertEqual([Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 3)], profile.biases())

    def test_zero_weight_outcomes(self):
        program = parse('fun(x: bool) { x && flip 0 }')
        self.assertEqual({0: Fraction(1)}, enumerate_distribution(program, (1, )))

    def test_caps(self):
        with self.assertRaises(CoinCapExceeded):
            enumerate_distribution(rr_program(5, LAMBDA), (0, ) * 5, coin_cap=4)
        with self.assertRaises(SizeGuardExceeded):
            oracle_privacy_bound(rr(3, LAMBDA), domain_cap=10)
        with self.assertRaises(DomainError):
            enumerate_distribution(rr_program(2, LAMBDA), (0, 2))
        with self.assertRaises(DomainError):
            oracle_accuracy_profile(rr(2, LAMBDA), 1)

    def test_inference_matches_enumeration(self):
        mech = rr(3, LAMBDA)
        M = inference(mech.compile(), exhaustive_inference_set(mech))
        self.assertEqual(64, len(M))
        for x in mech.input_domain:
            distribution = enumerate_distribution(mech.validated, x)
            for y in mech.output_domain:
                self.assertEqual(distribution.get(y, 0), M[x, y])

    def test_mechanisms_match_enumeration(self):
        mechs = [
            rrcount(3, Fraction(1, 3)),
            above_threshold(2, 3, 1, Fraction(1, 2), Fraction(1, 3)),
            above_threshold(3, 1, 1, Fraction(2, 3), Fraction(1, 4)),
        ]
        for mech in mechs:
            m = mech.compile()
            for x in mech.input_domain:
                self.assertEqual(enumerate_distribution(mech.validated, x), joint_distribution(m, x), f'{mech!r}')

    def test_privacy_cross_check(self):
        mech = rr(2, LAMBDA)
        expected = oracle_privacy_bound(mech)
        self.assertEqual(Fraction(4), expected.p)
        report, _ = synthesize_privacy(mech, mode=EXHAUSTIVE)
        self.assertEqual(expected.p, report.p)
        self.assertEqual(expected.witness, report.witness)

    def test_accuracy_cross_check(self):
        mech = rrcount(3, LAMBDA)
        for alpha in range(3):
            expected = oracle_accuracy_bound(mech, alpha)
            report, _ = synthesize_accuracy(mech, alpha)
            self.assertEqual(expected.p, report.p)

    def test_user_program(self):
        program = parse('fun(x: bool, y: bool) -> bool { (x || y) ^ flip 1/4 }')
        mech = from_program(program)
        expected = oracle_privacy_bound(mech)
        report, _ = synthesize_privacy(mech)
        self.assertEqual(Fraction(3), expected.p)
        self.assertEqual(expected.p, report.p)

    def test_distributions_up_to_six_clients(self):
        for n in range(1, 7):
            for mech in (rr(n, LAMBDA), rrcount(n, Fraction(1, 3))):
                m = mech.compile()
                for x in mech.input_domain:
                    self.assertEqual(enumerate_distribution(mech.validated, x), joint_distribution(m, x),
                                     f'{mech!r} at {x}')

    def test_above_threshold_grid(self):
        for n in range(1, 4):
            for k in range(1, 4):
                mech = above_threshold(n, k, 1, Fraction(1, 2), Fraction(1, 3))
                m = mech.compile()
                for x in mech.input_domain:
                    self.assertEqual(enumerate_distribution(mech.validated, x), joint_distribution(m, x),
                                     f'{mech!r} at {x}')
                expected = oracle_privacy_bound(mech)
                report, _ = synthesize_privacy(mech, mode=EXHAUSTIVE)
                self.assertEqual(expected.p, report.p, f'{mech!r}')

    def test_bounds_up_to_six_clients(self):
        for n in range(1, 7):
            mech = rr(n, Fraction(2, 7))
            expected = oracle_privacy_bound(mech)
            report, _ = synthesize_privacy(mech, mode=EXHAUSTIVE)
            self.assertEqual(expected.p, report.p)
            self.assertEqual(expected.witness, report.witness)
            counts = rrcount(n, Fraction(2, 7))
            for alpha in range(n + 1):
                expected = oracle_accuracy_bound(counts, alpha)
                report, _ = synthesize_accuracy(counts, alpha, mode=EXHAUSTIVE)
                self.assertEqual(expected.p, report.p, f'{counts!r} at alpha={alpha}')


if __name__ == '__main__':
    unittest.main()
