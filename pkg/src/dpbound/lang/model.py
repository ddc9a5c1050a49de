"""
Abstract syntax of the .dpp probabilistic language.

Every node renders back to surface syntax through __str__, fully parenthesized,
so that parsing the rendered text yields an equal tree.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple


def format_rational(value):
    value = Fraction(value)
    if value.denominator == 1:
        return f'{value.numerator}'
    return f'{value.numerator}/{value.denominator}'


def bit_width(max_value):
    """Number of bits needed to hold every integer in 0..max_value"""
    return max(1, int(max_value).bit_length())


#########
# Types #
#########


class Type(object):
    width = 0

    def components(self):
        return (self, )


@dataclass(frozen=True)
class BoolType(Type):
    @property
    def width(self):
        return 1

    def __str__(self):
        return 'bool'


@dataclass(frozen=True)
class IntType(Type):
    bits: int

    @property
    def width(self):
        return self.bits

    @property
    def max_value(self):
        return (1 << self.bits) - 1

    def __str__(self):
        return f'int({self.bits})'


@dataclass(frozen=True)
class TupleType(Type):
    items: Tuple[Type, ...]

    @property
    def width(self):
        return sum(t.width for t in self.items)

    def components(self):
        return self.items

    def __str__(self):
        if len(self.items) == 1:
            return f'({self.items[0]},)'
        return '(' + ', '.join(str(t) for t in self.items) + ')'


###############
# Expressions #
###############


class Expr(object):
    def children(self):
        return ()


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool

    def __str__(self):
        return 'true' if self.value else 'false'


@dataclass(frozen=True)
class IntConst(Expr):
    value: int
    width: int

    def __str__(self):
        return f'int({self.width}, {self.value})'


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Flip(Expr):
    prob: Fraction

    def __str__(self):
        return f'flip {format_rational(self.prob)}'


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    else_: Expr

    def children(self):
        return self.cond, self.then, self.else_

    def __str__(self):
        return f'if {self.cond} {{ {self.then} }} else {{ {self.else_} }}'


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr

    def children(self):
        return (self.operand, )

    def __str__(self):
        return f'!{self.operand}'


class BinaryExpr(Expr):
    symbol = '?'

    def children(self):
        return self.lhs, self.rhs

    def __str__(self):
        return f'({self.lhs} {self.symbol} {self.rhs})'


@dataclass(frozen=True)
class And(BinaryExpr):
    lhs: Expr
    rhs: Expr
    symbol = '&&'


@dataclass(frozen=True)
class Or(BinaryExpr):
    lhs: Expr
    rhs: Expr
    symbol = '||'


@dataclass(frozen=True)
class Xor(BinaryExpr):
    lhs: Expr
    rhs: Expr
    symbol = '^'


@dataclass(frozen=True)
class Iff(BinaryExpr):
    lhs: Expr
    rhs: Expr
    symbol = '<->'


@dataclass(frozen=True)
class IntAdd(BinaryExpr):
    lhs: Expr
    rhs: Expr
    saturating: bool = True

    @property
    def symbol(self):
        return '+' if self.saturating else '+%'


@dataclass(frozen=True)
class IntGe(BinaryExpr):
    lhs: Expr
    rhs: Expr
    symbol = '>='


@dataclass(frozen=True)
class IntEq(BinaryExpr):
    lhs: Expr
    rhs: Expr
    symbol = '=='


@dataclass(frozen=True)
class Let(Expr):
    name: str
    bound: Expr
    body: Expr

    def children(self):
        return self.bound, self.body

    def __str__(self):
        return f'(let {self.name} = {self.bound} in {self.body})'


@dataclass(frozen=True)
class TupleExpr(Expr):
    items: Tuple[Expr, ...]

    def children(self):
        return self.items

    def __str__(self):
        if len(self.items) == 1:
            return f'({self.items[0]},)'
        return '(' + ', '.join(str(e) for e in self.items) + ')'


@dataclass(frozen=True)
class Categorical(Expr):
    weights: Tuple[Fraction, ...]
    width: int

    def __str__(self):
        weights = ', '.join(format_rational(w) for w in self.weights)
        return f'categorical({self.width}) [{weights}]'


############
# Programs #
############


@dataclass(frozen=True)
class Param(object):
    name: str
    type: Type

    def __str__(self):
        return f'{self.name}:{self.type}'


@dataclass(frozen=True)
class Program(object):
    params: Tuple[Param, ...]
    body: Expr
    output_type: Type = field(default=None)

    def param(self, name):
        for p in self.params:
            if p.name == name:
                return p
        return None

    def __str__(self):
        params = ', '.join(str(p) for p in self.params)
        result_annotation = ''
        if self.output_type is not None:
            result_annotation = f' -> {self.output_type}'
        return f'fun({params}){result_annotation} {{ {self.body} }}'


############
# Walkers  #
############


def walk(expr, path=()):
    """Pre-order (path, node) pairs; a path is the tuple of child indexes from the root"""
    yield path, expr
    for index, child in enumerate(expr.children()):
        yield from walk(child, path + (index, ))


def coin_sites(expr):
    """Every Flip and Categorical node in pre-order, which is the order coins are numbered in"""
    return [(path, node) for path, node in walk(expr) if isinstance(node, (Flip, Categorical))]


def categorical_chain(weights):
    """
    Biases of the flip chain that samples a categorical distribution.
    Coin j decides "outcome j" given that no earlier coin fired; when every coin is
    false the outcome is len(chain). The chain stops once no probability mass is left.
    """
    weights = [Fraction(w) for w in weights]
    chain = []
    remaining = Fraction(1)
    for w in weights[:-1]:
        if remaining == 0:
            break
        chain.append(w / remaining)
        remaining -= w
    return chain


def count_flips(expr):
    return sum(1 for _, node in walk(expr) if isinstance(node, Flip))
