"""
Parses .dpp program text into the abstract syntax of dpbound.lang.model
"""

import logging
from fractions import Fraction

from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedEOF, UnexpectedInput

from dpbound.error_code import ParseError, ProbabilityRangeError, ProgramFileError
import dpbound.lang.model as model

logger = logging.getLogger(__name__)

_lark = None


def _grammar():
    global _lark
    if _lark is None:
        _lark = Lark.open(
            'grammar.lark',
            rel_to=__file__,
            start='program',
            parser='lalr',
            propagate_positions=True,
            maybe_placeholders=True,
        )
    return _lark


def _position(item):
    if isinstance(item, Token):
        return item.line, item.column
    if isinstance(item, Tree) and not item.meta.empty:
        return item.meta.line, item.meta.column
    return None, None


class Parser(object):
    """Walks a lark parse tree and builds model objects, one parse_* method per grammar rule"""

    _binary = {
        'and_': model.And,
        'or_': model.Or,
        'xor': model.Xor,
        'iff': model.Iff,
        'ge': model.IntGe,
        'eq': model.IntEq,
    }

    def parse_text(self, text):
        try:
            tree = _grammar().parse(text)
        except UnexpectedEOF as e:
            raise ParseError(f'unexpected end of input, expected one of {sorted(e.expected)}')
        except UnexpectedInput as e:
            raise ParseError(f'syntax error near {self._context(text, e)!r}', line=e.line, column=e.column)
        return self.parse_program(tree)

    @staticmethod
    def _context(text, error):
        try:
            return error.get_context(text, span=20).splitlines()[0].strip()
        except Exception:  # get_context needs a position, which some lark errors lack
            return text[:20]

    def parse_program(self, tree):
        params_tree, output_type, body = tree.children
        params = ()
        if params_tree is not None:
            params = tuple(self.parse_param(p) for p in params_tree.children)
        if output_type is not None:
            output_type = self.parse_type(output_type)
        return model.Program(params=params, body=self.parse_expr(body), output_type=output_type)

    def parse_param(self, tree):
        name, type_tree = tree.children
        return model.Param(name=str(name), type=self.parse_type(type_tree))

    def parse_type(self, tree):
        if tree.data == 'bool_type':
            return model.BoolType()
        elif tree.data == 'int_type':
            width = self.parse_width(tree.children[0])
            return model.IntType(width)
        elif tree.data == 'tuple_type':
            return model.TupleType(tuple(self.parse_type(t) for t in tree.children))
        self.report_unparsed(tree)

    def parse_width(self, token):
        width = int(token)
        if width < 1:
            raise ParseError('integer width must be at least 1', *_position(token))
        return width

    def parse_rational(self, tree):
        numerator = int(tree.children[0])
        denominator = 1
        if len(tree.children) > 1:
            denominator = int(tree.children[1])
        if denominator == 0:
            raise ParseError('zero denominator in rational literal', *_position(tree))
        return Fraction(numerator, denominator)

    def parse_expr(self, tree):
        method = getattr(self, f'parse_{tree.data}', None)
        if method is None:
            self.report_unparsed(tree)
        return method(tree)

    def parse_let_expr(self, tree):
        name, bound, body = tree.children
        return model.Let(name=str(name), bound=self.parse_expr(bound), body=self.parse_expr(body))

    def _parse_binary(self, tree):
        lhs, rhs = (self.parse_expr(c) for c in tree.children)
        return self._binary[tree.data](lhs, rhs)

    parse_and_ = parse_or_ = parse_xor = parse_iff = parse_ge = parse_eq = _parse_binary

    def parse_add(self, tree):
        lhs, rhs = (self.parse_expr(c) for c in tree.children)
        return model.IntAdd(lhs, rhs, saturating=True)

    def parse_add_wrap(self, tree):
        lhs, rhs = (self.parse_expr(c) for c in tree.children)
        return model.IntAdd(lhs, rhs, saturating=False)

    def parse_not_(self, tree):
        return model.Not(self.parse_expr(tree.children[0]))

    def parse_flip(self, tree):
        prob = self.parse_rational(tree.children[0])
        if prob > 1:
            line, column = _position(tree)
            raise ProbabilityRangeError(
                f'flip probability {model.format_rational(prob)} is outside [0, 1]', line, column)
        return model.Flip(prob)

    def parse_ite(self, tree):
        cond, then, else_ = (self.parse_expr(c) for c in tree.children)
        return model.Ite(cond, then, else_)

    def parse_tuple(self, tree):
        return model.TupleExpr(tuple(self.parse_expr(c) for c in tree.children))

    def parse_int_const(self, tree):
        width_token, value_token = tree.children
        width = self.parse_width(width_token)
        value = int(value_token)
        if value >= 1 << width:
            raise ParseError(f'int({width}, {value}): value does not fit in {width} bits', *_position(value_token))
        return model.IntConst(value=value, width=width)

    def parse_categorical(self, tree):
        width_token, *rationals = tree.children
        weights = tuple(self.parse_rational(r) for r in rationals)
        for weight, r in zip(weights, rationals):
            if weight > 1:
                raise ProbabilityRangeError(
                    f'categorical weight {model.format_rational(weight)} is outside [0, 1]', *_position(r))
        if width_token is None:
            width = model.bit_width(len(weights) - 1)
        else:
            width = self.parse_width(width_token)
        return model.Categorical(weights=weights, width=width)

    def parse_true(self, tree):
        return model.BoolConst(True)

    def parse_false(self, tree):
        return model.BoolConst(False)

    def parse_var(self, tree):
        return model.Var(str(tree.children[0]))

    @staticmethod
    def report_unparsed(tree):
        raise ParseError(f'unsupported construct {tree.data!r}', *_position(tree))


def parse(text):
    """Parse .dpp program text into a model.Program; raises ParseError with line and column"""
    program = Parser().parse_text(text)
    logger.debug('parsed program with %d parameter(s)', len(program.params))
    return program


def parse_file(file_name):
    try:
        with open(file_name, encoding='utf-8') as fh:
            text = fh.read()
    except OSError as e:
        raise ProgramFileError(f'cannot read {file_name}: {e.strerror or e}')
    except UnicodeDecodeError:
        raise ProgramFileError(f'{file_name} is not UTF-8 text')
    return parse(text)
