#!/bin/env python

import os
import random
import tempfile
import unittest
from fractions import Fraction

from dpbound.error_code import ParseError, ProbabilityRangeError, ProgramFileError, ValidationError
from dpbound.lang import model, parse, parse_file, render_program

NAMES = ('a', 'b', 'c', 'x1', 'x2', 'q')


def random_type(rng, allow_tuple=True):
    roll = rng.random()
    if allow_tuple and roll < 0.2:
        return model.TupleType(tuple(random_type(rng, False) for _ in range(rng.randint(1, 3))))
    if roll < 0.6:
        return model.BoolType()
    return model.IntType(rng.randint(1, 4))


def random_leaf(rng):
    kind = rng.randrange(5)
    if kind == 0:
        return model.BoolConst(rng.random() < 0.5)
    if kind == 1:
        width = rng.randint(1, 4)
        return model.IntConst(value=rng.randrange(1 << width), width=width)
    if kind == 2:
        return model.Var(rng.choice(NAMES))
    if kind == 3:
        return model.Flip(Fraction(rng.randint(0, 8), 8))
    weights = tuple(Fraction(rng.randint(0, 4), 4) for _ in range(rng.randint(1, 4)))
    return model.Categorical(weights=weights, width=rng.randint(1, 3))


def random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        return random_leaf(rng)
    kind = rng.randrange(11)
    sub = lambda: random_expr(rng, depth - 1)  # noqa: E731
    if kind == 0:
        return model.Not(sub())
    if kind == 1:
        return model.Ite(sub(), sub(), sub())
    if kind == 2:
        return model.Let(rng.choice(NAMES), sub(), sub())
    if kind == 3:
        return model.TupleExpr(tuple(sub() for _ in range(rng.randint(1, 3))))
    if kind == 4:
        return model.IntAdd(sub(), sub(), saturating=rng.random() < 0.5)
    binary = (model.And, model.Or, model.Xor, model.Iff, model.IntGe, model.IntEq)
    return rng.choice(binary)(sub(), sub())


def random_program(rng):
    params = tuple(model.Param(name, random_type(rng)) for name in rng.sample(NAMES, rng.randint(0, 3)))
    output_type = random_type(rng) if rng.random() < 0.5 else None
    return model.Program(params=params, body=random_expr(rng, 4), output_type=output_type)


class TestParser(unittest.TestCase):

    def test_randomized_response(self):
        program = parse('''
            # two clients
            fun(x1: bool, x2: bool) -> (bool, bool) {
              (if flip 1/5 { !x1 } else { x1 }, if flip 1/5 { !x2 } else { x2 })
            }''')
        self.assertEqual(2, len(program.params))
        self.assertEqual(model.Param('x1', model.BoolType()), program.params[0])
        self.assertEqual(model.TupleType((model.BoolType(), model.BoolType())), program.output_type)
        first = program.body.items[0]
        self.assertEqual(model.Ite(model.Flip(Fraction(1, 5)), model.Not(model.Var('x1')), model.Var('x1')), first)

    def test_let_and_precedence(self):
        program = parse('fun(a: bool, b: bool, c: bool) { let t = a || b && c in t <-> a ^ b }')
        self.assertIsNone(program.output_type)
        let = program.body
        self.assertEqual('t', let.name)
        self.assertEqual(model.Or(model.Var('a'), model.And(model.Var('b'), model.Var('c'))), let.bound)
        self.assertEqual(model.Iff(model.Var('t'), model.Xor(model.Var('a'), model.Var('b'))), let.body)

    def test_integer_operators(self):
        program = parse('fun(x: int(2), y: int(2)) { (x + y >= int(2, 3), x +% y == int(2, 0)) }')
        ge, eq = program.body.items
        self.assertEqual(model.IntGe(model.IntAdd(model.Var('x'), model.Var('y')), model.IntConst(3, 2)), ge)
        self.assertFalse(eq.lhs.saturating)

    def test_categorical_width(self):
        inferred = parse('fun() { categorical [1/2, 1/4, 1/8, 1/8] }').body
        self.assertEqual(2, inferred.width)
        self.assertEqual((Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)), inferred.weights)
        explicit = parse('fun() { categorical(3) [1/2, 1/2] }').body
        self.assertEqual(3, explicit.width)

    def test_flip_out_of_range(self):
        with self.assertRaises(ProbabilityRangeError) as context:
            parse('fun() {\n  flip 3/2\n}')
        self.assertEqual(2, context.exception.line)
        self.assertIn('line 2', context.exception.message)

    def test_syntax_error_position(self):
        with self.assertRaises(ParseError) as context:
            parse('fun(x: bool) {\n  x &&\n}')
        self.assertEqual(3, context.exception.line)

    def test_unexpected_end(self):
        with self.assertRaises(ParseError):
            parse('fun(x: bool) { x')

    def test_bad_literals(self):
        with self.assertRaises(ParseError):
            parse('fun() { flip 1/0 }')
        with self.assertRaises(ParseError):
            parse('fun() { int(2, 4) }')
        with self.assertRaises(ParseError):
            parse('fun(x: int(0)) { x }')

    def test_unreadable_file(self):
        with self.assertRaises(ProgramFileError) as context:
            parse_file('/nonexistent/missing.dpp')
        self.assertIn('cannot read', str(context.exception))
        with tempfile.TemporaryDirectory() as folder:
            file_name = os.path.join(folder, 'latin1.dpp')
            with open(file_name, 'wb') as fh:
                fh.write(b'fun() { \xff\xfe }')
            with self.assertRaises(ProgramFileError) as context:
                parse_file(file_name)
            self.assertIn('UTF-8', str(context.exception))
            self.assertIsInstance(context.exception, ValidationError)
            self.assertRaises(ProgramFileError, parse_file, folder)

    def test_render_round_trip(self):
        rng = random.Random(20161)
        for _ in range(500):
            program = random_program(rng)
            text = render_program(program)
            reparsed = parse(text)
            self.assertEqual(program, reparsed, text)
            self.assertEqual(text, render_program(reparsed))


if __name__ == '__main__':
    unittest.main()
