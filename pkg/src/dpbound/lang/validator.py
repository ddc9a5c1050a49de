"""
Scope and type checking of parsed programs.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from dpbound.error_code import (
    CategoricalError, ProbabilityRangeError, TypeMismatchError, UnboundVariableError, ValidationError)
import dpbound.lang.model as model

logger = logging.getLogger(__name__)

BOOL = model.BoolType()


@dataclass(frozen=True, eq=False)
class ValidatedProgram(object):
    program: model.Program
    output_type: model.Type
    node_types: Dict[Tuple[int, ...], model.Type]

    @property
    def params(self):
        return self.program.params

    @property
    def body(self):
        return self.program.body

    def type_of(self, path=()):
        return self.node_types[path]


class Validator(object):
    def __init__(self):
        self.node_types = dict()

    def validate_program(self, program):
        names = set()
        scope = dict()
        for param in program.params:
            if param.name in names:
                raise ValidationError(f'duplicate parameter {param.name!r}')
            names.add(param.name)
            self.check_type(param.type, f'parameter {param.name}')
            scope[param.name] = param.type
        body_type = self.visit(program.body, (), scope)
        if program.output_type is not None and program.output_type != body_type:
            raise TypeMismatchError(f'declared result type {program.output_type} but body has type {body_type}')
        return ValidatedProgram(program=program, output_type=body_type, node_types=dict(self.node_types))

    def check_type(self, type_, where):
        if isinstance(type_, model.IntType) and type_.bits < 1:
            raise TypeMismatchError(f'{where}: integer width must be at least 1')
        if isinstance(type_, model.TupleType):
            if len(type_.items) == 0:
                raise TypeMismatchError(f'{where}: empty tuple type')
            for item in type_.items:
                if isinstance(item, model.TupleType):
                    raise TypeMismatchError(f'{where}: nested tuple types are not supported')
                self.check_type(item, where)

    def visit(self, expr, path, scope):
        method = getattr(self, f'visit_{type(expr).__name__}', None)
        if method is None:
            raise ValidationError(f'unknown expression node {type(expr).__name__}')
        result = method(expr, path, scope)
        self.node_types[path] = result
        return result

    def visit_BoolConst(self, expr, path, scope):
        return BOOL

    def visit_IntConst(self, expr, path, scope):
        if expr.width < 1:
            raise TypeMismatchError(f'{expr}: integer width must be at least 1')
        if not 0 <= expr.value < (1 << expr.width):
            raise TypeMismatchError(f'{expr}: value does not fit in {expr.width} bits')
        return model.IntType(expr.width)

    def visit_Var(self, expr, path, scope):
        if expr.name not in scope:
            raise UnboundVariableError(expr.name)
        return scope[expr.name]

    def visit_Flip(self, expr, path, scope):
        if not 0 <= Fraction(expr.prob) <= 1:
            raise ProbabilityRangeError(f'flip probability {model.format_rational(expr.prob)} is outside [0, 1]')
        return BOOL

    def visit_Categorical(self, expr, path, scope):
        weights = [Fraction(w) for w in expr.weights]
        if len(weights) == 0:
            raise CategoricalError('categorical needs at least one outcome')
        if any(w < 0 for w in weights):
            raise CategoricalError(f'{expr}: negative weight')
        total = sum(weights, Fraction(0))
        if total != 1:
            raise CategoricalError(f'{expr}: weights sum to {model.format_rational(total)}, not 1')
        if expr.width < 1 or len(weights) - 1 >= (1 << expr.width):
            raise CategoricalError(f'{expr}: {len(weights)} outcomes do not fit in {expr.width} bits')
        return model.IntType(expr.width)

    def visit_Not(self, expr, path, scope):
        self.expect(expr.operand, path + (0, ), scope, BOOL, '!')
        return BOOL

    def _visit_logic(self, expr, path, scope):
        self.expect(expr.lhs, path + (0, ), scope, BOOL, expr.symbol)
        self.expect(expr.rhs, path + (1, ), scope, BOOL, expr.symbol)
        return BOOL

    visit_And = visit_Or = visit_Xor = visit_Iff = _visit_logic

    def _int_operands(self, expr, path, scope):
        lhs = self.visit(expr.lhs, path + (0, ), scope)
        rhs = self.visit(expr.rhs, path + (1, ), scope)
        if not isinstance(lhs, model.IntType) or lhs != rhs:
            raise TypeMismatchError(f'operator {expr.symbol} needs two integers of the same width, got {lhs} and {rhs}')
        return lhs

    def visit_IntAdd(self, expr, path, scope):
        return self._int_operands(expr, path, scope)

    def visit_IntGe(self, expr, path, scope):
        self._int_operands(expr, path, scope)
        return BOOL

    def visit_IntEq(self, expr, path, scope):
        self._int_operands(expr, path, scope)
        return BOOL

    def visit_Ite(self, expr, path, scope):
        self.expect(expr.cond, path + (0, ), scope, BOOL, 'if')
        then = self.visit(expr.then, path + (1, ), scope)
        else_ = self.visit(expr.else_, path + (2, ), scope)
        if then != else_:
            raise TypeMismatchError(f'if branches differ in type: {then} and {else_}')
        return then

    def visit_Let(self, expr, path, scope):
        bound = self.visit(expr.bound, path + (0, ), scope)
        inner = dict(scope)
        inner[expr.name] = bound
        return self.visit(expr.body, path + (1, ), inner)

    def visit_TupleExpr(self, expr, path, scope):
        if len(expr.items) == 0:
            raise TypeMismatchError('empty tuple')
        items = []
        for index, item in enumerate(expr.items):
            item_type = self.visit(item, path + (index, ), scope)
            if isinstance(item_type, model.TupleType):
                raise TypeMismatchError('nested tuples are not supported')
            items.append(item_type)
        return model.TupleType(tuple(items))

    def expect(self, expr, path, scope, expected, context):
        actual = self.visit(expr, path, scope)
        if actual != expected:
            raise TypeMismatchError(f'operand of {context} must be {expected}, got {actual}')
        return actual


def validate(program):
    """Scope-check and type-check a program; every subexpression's type is recorded by its path"""
    result = Validator().validate_program(program)
    logger.debug('validated program: output type %s, %d typed nodes', result.output_type, len(result.node_types))
    return result
