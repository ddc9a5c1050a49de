#!/bin/env python

import unittest
from fractions import Fraction

from dpbound.error_code import (
    CategoricalError, ProbabilityRangeError, TypeMismatchError, UnboundVariableError, ValidationError)
from dpbound.lang import model, parse, validate


class TestValidator(unittest.TestCase):

    def test_output_type_inferred(self):
        validated = validate(parse('fun(x: int(2)) { (x >= int(2, 1), x) }'))
        expected = model.TupleType((model.BoolType(), model.IntType(2)))
        self.assertEqual(expected, validated.output_type)
        self.assertEqual(expected, validated.type_of(()))
        self.assertEqual(model.IntType(2), validated.type_of((1, )))

    def test_let_scope(self):
        validated = validate(parse('fun(x: bool) -> bool { let y = !x in let x = flip 1/2 in x && y }'))
        self.assertEqual(model.BoolType(), validated.output_type)
        with self.assertRaises(UnboundVariableError) as context:
            validate(parse('fun(x: bool) { (let y = x in y) && y }'))
        self.assertEqual('y', context.exception.name)

    def test_duplicate_parameter(self):
        with self.assertRaises(ValidationError):
            validate(parse('fun(x: bool, x: bool) { x }'))

    def test_type_mismatches(self):
        bad = [
            'fun(x: int(2)) { !x }',
            'fun(x: int(2), y: int(3)) { x + y }',
            'fun(x: bool) { x >= x }',
            'fun(x: bool) { if x { x } else { int(1, 0) } }',
            'fun(x: bool) -> int(1) { x }',
            'fun(x: bool) { ((x, x), x) }',
            'fun(x: int(2)) { if x { true } else { false } }',
        ]
        for text in bad:
            with self.assertRaises(TypeMismatchError, msg=text):
                validate(parse(text))

    def test_flip_range(self):
        program = model.Program(params=(), body=model.Flip(Fraction(-1, 2)))
        with self.assertRaises(ProbabilityRangeError):
            validate(program)

    def test_categorical(self):
        with self.assertRaises(CategoricalError):
            validate(parse('fun() { categorical [1/2, 1/4] }'))
        with self.assertRaises(CategoricalError):
            validate(parse('fun() { categorical(1) [1/4, 1/4, 1/2] }'))
        program = model.Program(params=(), body=model.Categorical((Fraction(3, 2), Fraction(-1, 2)), 1))
        with self.assertRaises(CategoricalError):
            validate(program)
        validated = validate(parse('fun() { categorical [1/2, 1/2, 0] }'))
        self.assertEqual(model.IntType(2), validated.output_type)


if __name__ == '__main__':
    unittest.main()
