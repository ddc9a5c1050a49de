#!/bin/env python

import random
import unittest
from fractions import Fraction

from dpbound.bdd import AND, BddManager, WeightMap
from dpbound.error_code import (
    ManagerMismatchError, MissingWeightError, NodeBudgetExceeded, UnknownVariableError)


class TestBdd(unittest.TestCase):

    def setUp(self):
        self.manager = BddManager(3, names=['a', 'b', 'c'])
        self.a = self.manager.mk_var(0)
        self.b = self.manager.mk_var(1)
        self.c = self.manager.mk_var(2)

    def test_canonical(self):
        m = self.manager
        self.assertEqual(self.a & self.b, self.b & self.a)
        self.assertEqual(m.true, self.a | ~self.a)
        self.assertEqual(m.false, self.a ^ self.a)
        self.assertEqual(~(self.a & self.b), ~self.a | ~self.b)
        self.assertEqual(self.a.iff(self.b), ~(self.a ^ self.b))
        self.assertEqual(m.ite(self.a, self.b, self.c), (self.a & self.b) | (~self.a & self.c))
        self.assertEqual(m.apply(AND, self.a, self.c), self.a & self.c)

    def test_restrict_and_evaluate(self):
        m = self.manager
        f = (self.a & self.b) | self.c
        self.assertEqual(self.b | self.c, m.restrict(f, {0: 1}))
        self.assertEqual(self.c, m.restrict(f, {0: 0}))
        self.assertTrue(m.restrict(f, {0: 1, 1: 1}).is_true)
        self.assertTrue(m.evaluate(f, {0: 1, 1: 1}))
        self.assertFalse(m.evaluate(f, {0: 1}))
        self.assertEqual([0, 1, 2], m.support(f))

    def test_node_count(self):
        self.assertEqual(4, self.manager.node_count(self.a & self.b))
        self.assertEqual(1, self.manager.node_count(self.manager.true))
        self.assertEqual(5, self.manager.node_count([self.a, self.a & self.b]))

    def test_wmc(self):
        m = BddManager(2)
        weights = WeightMap(2)
        weights.set_coin(0, Fraction(1, 3))
        weights.set_coin(1, Fraction(3, 4))
        f = m.mk_var(0) | m.mk_var(1)
        self.assertEqual(Fraction(5, 6), m.wmc(f, weights))
        self.assertAlmostEqual(5 / 6, m.wmc(f, weights, exact=False))
        self.assertEqual(Fraction(1), m.wmc(m.true, weights))
        self.assertEqual(Fraction(3, 4), m.wmc(m.mk_var(1), weights))

    def test_wmc_skipped_indicator(self):
        m = BddManager(2)
        weights = WeightMap(2)
        weights.set_indicator(0)
        weights.set_coin(1, Fraction(1, 5))
        self.assertEqual(Fraction(2, 5), m.wmc(m.mk_var(1), weights))
        conditioned = weights.condition({0: 1})
        self.assertEqual(Fraction(1, 5), m.wmc(m.mk_var(1), conditioned))
        self.assertEqual(Fraction(0), m.wmc(m.mk_literal(0, 0), conditioned))

    def test_missing_weight(self):
        m = BddManager(2)
        weights = WeightMap(2)
        weights.set_coin(0, Fraction(1, 2))
        self.assertEqual([1], weights.missing())
        with self.assertRaises(MissingWeightError):
            m.wmc(m.mk_var(0), weights)

    def test_output_distribution(self):
        m = BddManager(2, names=['x', 'theta'])
        weights = WeightMap(2)
        weights.set_indicator(0)
        weights.set_coin(1, Fraction(1, 5))
        y = m.mk_var(0) ^ m.mk_var(1)
        low, high = m.output_distribution([y], [{0: 0}, {0: 1}], [1], weights)
        self.assertEqual({(False, ): Fraction(4, 5), (True, ): Fraction(1, 5)}, low)
        self.assertEqual({(True, ): Fraction(4, 5), (False, ): Fraction(1, 5)}, high)
        with self.assertRaises(UnknownVariableError):
            m.output_distribution([y], [{}], [1], weights)

    def test_output_distribution_wanted(self):
        m = BddManager(4, names=['x1', 'theta1', 'x2', 'theta2'])
        weights = WeightMap(4)
        weights.set_indicator(0)
        weights.set_indicator(2)
        weights.set_coin(1, Fraction(1, 5))
        weights.set_coin(3, Fraction(1, 5))
        roots = [m.mk_var(0) ^ m.mk_var(1), m.mk_var(2) ^ m.mk_var(3)]
        candidates = [{0: 0, 2: 0}, {0: 1, 2: 0}]
        full = m.output_distribution(roots, candidates, [1, 3], weights)
        self.assertEqual(4, len(full[0]))
        wanted = [[(False, False)], [(True, False), (True, True)]]
        pruned = m.output_distribution(roots, candidates, [1, 3], weights, wanted=wanted)
        self.assertEqual({(False, False): Fraction(16, 25)}, pruned[0])
        self.assertEqual({(True, False): Fraction(16, 25), (True, True): Fraction(4, 25)}, pruned[1])
        for dist, full_dist in zip(pruned, full):
            for bits, mass in dist.items():
                self.assertEqual(full_dist[bits], mass)
        mixed = m.output_distribution(roots, candidates, [1, 3], weights, wanted=[None, [(False, True)]])
        self.assertEqual(full[0], mixed[0])
        self.assertEqual({(False, True): Fraction(1, 25)}, mixed[1])
        with self.assertRaises(ValueError):
            m.output_distribution(roots, candidates, [1, 3], weights, wanted=[None])

    def test_node_budget(self):
        m = BddManager(4, node_budget=2)
        m.mk_var(0)
        m.mk_var(1)
        with self.assertRaises(NodeBudgetExceeded):
            m.mk_var(2)

    def test_errors(self):
        other = BddManager(3)
        with self.assertRaises(ManagerMismatchError):
            self.a & other.mk_var(0)
        with self.assertRaises(UnknownVariableError):
            self.manager.mk_var(3)

    def test_to_dot(self):
        dot = self.manager.to_dot(self.a & self.b, root_names=['f'])
        self.assertTrue(dot.startswith('digraph bdd {'))
        self.assertIn('label="a"', dot)
        self.assertIn('label="f"', dot)


def random_formula(rng, manager, depth):
    if depth == 0 or rng.random() < 0.2:
        roll = rng.randrange(manager.num_vars + 2)
        if roll >= manager.num_vars:
            return manager.mk_const(roll - manager.num_vars)
        return manager.mk_var(roll)
    op = rng.randrange(5)
    a = random_formula(rng, manager, depth - 1)
    if op == 0:
        return ~a
    b = random_formula(rng, manager, depth - 1)
    if op == 1:
        return a & b
    if op == 2:
        return a | b
    if op == 3:
        return a ^ b
    return manager.ite(a, b, random_formula(rng, manager, depth - 1))


def assignments(num_vars):
    for code in range(1 << num_vars):
        yield {v: (code >> v) & 1 for v in range(num_vars)}


class TestBddProperties(unittest.TestCase):

    def test_canonical_truth_tables(self):
        rng = random.Random(31)
        manager = BddManager(6)
        by_table = dict()
        for _ in range(300):
            f = random_formula(rng, manager, 5)
            table = tuple(manager.evaluate(f, a) for a in assignments(6))
            self.assertEqual(by_table.setdefault(table, f.node), f.node)

    def test_wmc_brute_force(self):
        rng = random.Random(32)
        for _ in range(40):
            num_vars = rng.randint(1, 8)
            manager = BddManager(num_vars)
            weights = WeightMap(num_vars)
            for v in range(num_vars):
                if rng.random() < 0.3:
                    weights.set_indicator(v)
                else:
                    weights.set_coin(v, Fraction(rng.randint(0, 12), 12))
            f = random_formula(rng, manager, 5)
            expected = Fraction(0)
            for a in assignments(num_vars):
                if manager.evaluate(f, a):
                    term = Fraction(1)
                    for v, bit in a.items():
                        term *= weights.pos[v] if bit else weights.neg[v]
                    expected += term
            self.assertEqual(expected, manager.wmc(f, weights))
            self.assertEqual(weights.total(), manager.wmc(f, weights) + manager.wmc(~f, weights))


if __name__ == '__main__':
    unittest.main()
