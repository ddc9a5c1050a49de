"""
Compiles validated .dpp programs to decision diagrams and answers probability queries
by weighted model counting.

A compiled model keeps one diagram per output bit, each a function of the input bits
and the coin bits. Pr[A(x) = y] is the weighted model count of the conjunction
"output bits equal y", with the inputs fixed to x.
"""

import logging
import time
from fractions import Fraction

from dpbound.bdd import BddManager, WeightMap
from dpbound.error_code import DomainError
from dpbound.lang import model
from dpbound.lang.validator import ValidatedProgram, validate

logger = logging.getLogger(__name__)


def _flat_widths(type_):
    """Bit width of each scalar component, in component order"""
    return [t.width for t in type_.components()]


def _scalar_values(type_, value, what):
    """Split a value of type_ into one non-negative int per scalar component"""
    components = type_.components()
    if isinstance(type_, model.TupleType):
        if not isinstance(value, (tuple, list)) or len(value) != len(components):
            raise DomainError(f'{what}: expected a {len(components)}-tuple for type {type_}, got {value!r}')
        values = list(value)
    else:
        values = [value]
    result = []
    for component, v in zip(components, values):
        if isinstance(v, bool):
            v = int(v)
        if not isinstance(v, int) or isinstance(v, bool):
            raise DomainError(f'{what}: {v!r} is not a value of type {component}')
        if not 0 <= v < (1 << component.width):
            raise DomainError(f'{what}: {v} does not fit type {component}')
        result.append(v)
    return result


##################
# Variable order #
##################


class OrderEntry(object):
    """One variable of the order: an input bit or a coin bit"""

    def __init__(self, kind, name, key, bit):
        self.kind = kind  # 'input' or 'coin'
        self.name = name
        self.key = key  # parameter name, or coin site path
        self.bit = bit

    def __repr__(self):
        return f'OrderEntry({self.kind}, {self.name})'


def _groups(expr, path, shadowed):
    while isinstance(expr, model.Let):
        yield expr.bound, path + (0, ), shadowed
        shadowed = shadowed | {expr.name}
        expr, path = expr.body, path + (1, )
    if isinstance(expr, model.TupleExpr):
        for index, item in enumerate(expr.items):
            yield item, path + (index, ), shadowed
    else:
        yield expr, path, shadowed


def _group_members(expr, path, shadowed, params, refs, coins):
    if isinstance(expr, model.Var):
        if expr.name in params and expr.name not in shadowed and expr.name not in refs:
            refs.append(expr.name)
    elif isinstance(expr, (model.Flip, model.Categorical)):
        coins.append((path, expr))
    elif isinstance(expr, model.Let):
        _group_members(expr.bound, path + (0, ), shadowed, params, refs, coins)
        _group_members(expr.body, path + (1, ), shadowed | {expr.name}, params, refs, coins)
    else:
        for index, child in enumerate(expr.children()):
            _group_members(child, path + (index, ), shadowed, params, refs, coins)


def variable_order(program):
    """
    Interleaved order: the body is cut into groups (each let-bound expression, then each
    component of the result tuple). A group contributes the input bits of the parameters
    it reads first (most significant bit first), then its coins in pre-order.
    Parameters never read go last.
    """
    params = {p.name: p for p in program.params}
    coin_number = {path: index for index, (path, _) in enumerate(model.coin_sites(program.body))}
    placed = set()
    order = []

    def place_param(name):
        placed.add(name)
        type_ = params[name].type
        widths = _flat_widths(type_)
        offset = 0
        for component, width in enumerate(widths):
            for bit in reversed(range(width)):
                if isinstance(type_, model.TupleType):
                    label = f'{name}.{component}[{bit}]'
                elif width > 1:
                    label = f'{name}[{bit}]'
                else:
                    label = name
                order.append(OrderEntry('input', label, name, offset + bit))
            offset += width

    for expr, path, shadowed in _groups(program.body, (), frozenset()):
        refs, coins = [], []
        _group_members(expr, path, shadowed, params, refs, coins)
        for name in refs:
            if name not in placed:
                place_param(name)
        for coin_path, node in coins:
            number = coin_number[coin_path]
            if isinstance(node, model.Flip):
                order.append(OrderEntry('coin', f'c{number}', coin_path, 0))
            else:
                for j in range(len(model.categorical_chain(node.weights))):
                    order.append(OrderEntry('coin', f'c{number}.{j}', coin_path, j))
    for param in program.params:
        if param.name not in placed:
            place_param(param.name)
    return order


##################
# Compiled model #
##################


class CompiledModel(object):
    """
    The weighted formula of a program: output bit diagrams over input and coin variables,
    with the literal weights of every variable.

    When `relation` is set (hand-built formulas), it is a single diagram over input, coin
    and output variables that holds exactly when the outputs are the program's outputs;
    prob_of then conditions it on both x and y.
    """

    def __init__(self, manager, params, input_vars, coin_vars, output_bdds, output_type, weight_map,
                 relation=None, output_vars=None, program=None):
        self.manager = manager
        self.params = tuple(params)
        self.input_vars = input_vars  # param name -> var ids, least significant bit first
        self.coin_vars = coin_vars  # list of (var id, bias)
        self.output_bdds = list(output_bdds)
        self.output_type = output_type
        self.weight_map = weight_map
        self.relation = relation
        self.output_vars = output_vars
        self.program = program
        self.output_domain = None  # set by Mechanism.compile
        self.stats = dict()
        self.coin_var_ids = frozenset(v for v, _ in coin_vars)

    @property
    def var_order(self):
        return list(self.manager.names)

    @property
    def output_width(self):
        return len(self.output_bdds)

    def encode_input(self, x):
        """{var: bit} for an input x, given as a tuple with one value per parameter"""
        if not isinstance(x, (tuple, list)) or len(x) != len(self.params):
            raise DomainError(f'input {x!r} must have one value per parameter ({len(self.params)})')
        assignment = dict()
        for param, value in zip(self.params, x):
            values = _scalar_values(param.type, value, f'parameter {param.name}')
            offset = 0
            var_ids = self.input_vars[param.name]
            for component, v in zip(param.type.components(), values):
                for bit in range(component.width):
                    assignment[var_ids[offset + bit]] = (v >> bit) & 1
                offset += component.width
        return assignment

    def encode_output(self, y):
        """Tuple of output bits, least significant bit of each component first"""
        values = _scalar_values(self.output_type, y, 'output')
        bits = []
        for component, v in zip(self.output_type.components(), values):
            bits.extend((v >> bit) & 1 for bit in range(component.width))
        return tuple(bits)

    def decode_output(self, bits):
        values = []
        offset = 0
        for component in self.output_type.components():
            values.append(sum(int(bool(b)) << i for i, b in enumerate(bits[offset:offset + component.width])))
            offset += component.width
        if isinstance(self.output_type, model.TupleType):
            return tuple(values)
        return values[0]

    def output_values(self):
        """Every value of the output type, in ascending order"""
        widths = _flat_widths(self.output_type)
        total = sum(widths)
        result = []
        for code in range(1 << total):
            bits = tuple((code >> i) & 1 for i in range(total))
            result.append(self.decode_output(bits))
        return sorted(result)

    def reference_input(self):
        """The all-zero input, first in the ordering of any input domain"""
        x = []
        for param in self.params:
            if isinstance(param.type, model.TupleType):
                x.append(tuple(0 for _ in param.type.items))
            else:
                x.append(0)
        return tuple(x)

    def conditioned_size(self, x=None):
        """Shared node count of the output diagrams once the inputs are fixed to x"""
        if x is None:
            x = self.reference_input()
        assignment = self.encode_input(x)
        with self.manager.lock:
            restricted = [self.manager.restrict(b, assignment) for b in self.output_bdds]
        return self.manager.node_count(restricted)

    def full_size(self):
        return self.manager.node_count(self.output_bdds)

    def to_dot(self, x=None):
        roots = self.output_bdds
        if x is not None:
            assignment = self.encode_input(x)
            with self.manager.lock:
                roots = [self.manager.restrict(b, assignment) for b in roots]
        return self.manager.to_dot(roots, root_names=[f'y[{i}]' for i in range(len(roots))])


class ExprCompiler(object):
    """Compiles expressions bottom-up; int values are lists of bit diagrams, least significant first"""

    def __init__(self, validated, manager, coin_bits):
        self.validated = validated
        self.manager = manager
        self.coin_bits = coin_bits  # coin site path -> list of Bdd

    def compile(self, expr, path, env):
        method = getattr(self, f'compile_{type(expr).__name__}')
        return method(expr, path, env)

    def compile_BoolConst(self, expr, path, env):
        return self.manager.mk_const(expr.value)

    def compile_IntConst(self, expr, path, env):
        return [self.manager.mk_const((expr.value >> i) & 1) for i in range(expr.width)]

    def compile_Var(self, expr, path, env):
        return env[expr.name]

    def compile_Flip(self, expr, path, env):
        return self.coin_bits[path][0]

    def compile_Categorical(self, expr, path, env):
        chain = self.coin_bits[path]
        none_yet = self.manager.true
        outcomes = []
        for coin in chain:
            outcomes.append(none_yet & coin)
            none_yet = none_yet & ~coin
        outcomes.append(none_yet)
        bits = []
        for bit in range(expr.width):
            value = self.manager.false
            for outcome, condition in enumerate(outcomes):
                if (outcome >> bit) & 1:
                    value = value | condition
            bits.append(value)
        return bits

    def compile_Not(self, expr, path, env):
        return ~self.compile(expr.operand, path + (0, ), env)

    def _operands(self, expr, path, env):
        return self.compile(expr.lhs, path + (0, ), env), self.compile(expr.rhs, path + (1, ), env)

    def compile_And(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        return lhs & rhs

    def compile_Or(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        return lhs | rhs

    def compile_Xor(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        return lhs ^ rhs

    def compile_Iff(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        return lhs.iff(rhs)

    def compile_IntAdd(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        carry = self.manager.false
        bits = []
        for a, b in zip(lhs, rhs):
            half = a ^ b
            bits.append(half ^ carry)
            carry = (a & b) | (carry & half)
        if expr.saturating:
            bits = [bit | carry for bit in bits]
        return bits

    def compile_IntGe(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        greater = self.manager.false
        equal = self.manager.true
        for a, b in zip(reversed(lhs), reversed(rhs)):
            greater = greater | (equal & a & ~b)
            equal = equal & a.iff(b)
        return greater | equal

    def compile_IntEq(self, expr, path, env):
        lhs, rhs = self._operands(expr, path, env)
        result = self.manager.true
        for a, b in zip(lhs, rhs):
            result = result & a.iff(b)
        return result

    def compile_Ite(self, expr, path, env):
        cond = self.compile(expr.cond, path + (0, ), env)
        then = self.compile(expr.then, path + (1, ), env)
        else_ = self.compile(expr.else_, path + (2, ), env)
        return self._select(cond, then, else_)

    def _select(self, cond, then, else_):
        if isinstance(then, tuple):
            return tuple(self._select(cond, t, e) for t, e in zip(then, else_))
        if isinstance(then, list):
            return [self.manager.ite(cond, t, e) for t, e in zip(then, else_)]
        return self.manager.ite(cond, then, else_)

    def compile_Let(self, expr, path, env):
        bound = self.compile(expr.bound, path + (0, ), env)
        inner = dict(env)
        inner[expr.name] = bound
        return self.compile(expr.body, path + (1, ), inner)

    def compile_TupleExpr(self, expr, path, env):
        return tuple(self.compile(item, path + (index, ), env) for index, item in enumerate(expr.items))


def _flatten(value):
    if isinstance(value, tuple):
        return [bit for item in value for bit in _flatten(item)]
    if isinstance(value, list):
        return list(value)
    return [value]


def _param_value(type_, bits):
    """Compiled value of a parameter from its flat bit list"""
    if isinstance(type_, model.TupleType):
        items = []
        offset = 0
        for component in type_.items:
            items.append(_param_value(component, bits[offset:offset + component.width]))
            offset += component.width
        return tuple(items)
    if isinstance(type_, model.BoolType):
        return bits[0]
    return list(bits)


def compile_program(program, node_budget=None):
    """Compile a program (validated or not) into a CompiledModel"""
    if not isinstance(program, ValidatedProgram):
        program = validate(program)
    started = time.monotonic()
    order = variable_order(program.program)
    manager = BddManager(len(order), names=[e.name for e in order], node_budget=node_budget)
    weights = WeightMap(len(order))
    input_vars = {p.name: [None] * p.type.width for p in program.params}
    coin_vars = []
    coin_bits = dict()
    for var, entry in enumerate(order):
        if entry.kind == 'input':
            input_vars[entry.key][entry.bit] = var
            weights.set_indicator(var)
        else:
            node = _node_at(program.body, entry.key)
            if isinstance(node, model.Flip):
                bias = Fraction(node.prob)
            else:
                bias = model.categorical_chain(node.weights)[entry.bit]
            weights.set_coin(var, bias)
            coin_vars.append((var, bias))
            coin_bits.setdefault(entry.key, []).append(manager.mk_var(var))
    env = dict()
    for param in program.params:
        bits = [manager.mk_var(v) for v in input_vars[param.name]]
        env[param.name] = _param_value(param.type, bits)
    value = ExprCompiler(program, manager, coin_bits).compile(program.body, (), env)
    compiled = CompiledModel(
        manager=manager,
        params=program.params,
        input_vars=input_vars,
        coin_vars=coin_vars,
        output_bdds=_flatten(value),
        output_type=program.output_type,
        weight_map=weights,
        program=program,
    )
    compiled.stats['compile_time'] = time.monotonic() - started
    compiled.stats['variables'] = len(order)
    compiled.stats['coins'] = len(coin_vars)
    compiled.stats['manager_nodes'] = len(manager)
    compiled.stats['full_size'] = compiled.full_size()
    compiled.stats['conditioned_size'] = compiled.conditioned_size()
    logger.info('compiled %d variables (%d coins): %d nodes, %d conditioned, %.3fs',
                len(order), len(coin_vars), compiled.stats['full_size'],
                compiled.stats['conditioned_size'], compiled.stats['compile_time'])
    return compiled


compile = compile_program


def _node_at(expr, path):
    for index in path:
        expr = expr.children()[index]
    return expr


###########
# Queries #
###########


def prob_of(m, x, y, exact=True):
    """Pr[A(x) = y]; exact=False counts in float64 instead of rationals"""
    x_assignment = m.encode_input(x)
    y_bits = m.encode_output(y)
    manager = m.manager
    if m.relation is not None:
        assignment = dict(x_assignment)
        assignment.update(zip(m.output_vars, y_bits))
        with manager.lock:
            conditioned = manager.restrict(m.relation, assignment)
        return manager.wmc(conditioned, m.weight_map.condition(assignment), exact=exact)
    with manager.lock:
        indicator = manager.true
        for bdd, bit in zip(m.output_bdds, y_bits):
            restricted = manager.restrict(bdd, x_assignment)
            indicator = indicator & (restricted if bit else ~restricted)
    return manager.wmc(indicator, m.weight_map.condition(x_assignment), exact=exact)


def joint_distribution(m, x):
    """{y: Pr[A(x) = y]} over every y of nonzero mass, from one traversal of the output diagrams"""
    return joint_distribution_batch(m, [x])[0]


def joint_distribution_batch(m, xs, wanted=None):
    """
    Output distributions of several inputs in one traversal, the inputs kept symbolic.
    wanted, when given, lists the outputs needed for each input; the others may be left out.
    """
    candidates = [m.encode_input(x) for x in xs]
    if wanted is not None:
        wanted = [None if ys is None else [m.encode_output(y) for y in ys] for ys in wanted]
    distributions = m.manager.output_distribution(
        m.output_bdds, candidates, m.coin_var_ids, m.weight_map, wanted=wanted)
    return [dict(sorted((m.decode_output(bits), mass) for bits, mass in dist.items())) for dist in distributions]


###########################
# Hand-built RR formula   #
###########################


def manual_rr_wbf(n, lam):
    """
    Relational formula of randomized response over n clients:
    AND_i  y_i <-> ((!theta_i && x_i) || (theta_i && !x_i)), with w(theta_i) = lam.
    Variables are ordered x_i, theta_i, y_i client by client.
    """
    lam = Fraction(lam)
    if n < 1:
        raise DomainError(f'n must be at least 1, got {n}')
    if not 0 <= lam <= 1:
        raise DomainError(f'lambda must lie in [0, 1], got {lam}')
    names = []
    for i in range(1, n + 1):
        names.extend([f'x{i}', f'theta{i}', f'y{i}'])
    manager = BddManager(3 * n, names=names)
    weights = WeightMap(3 * n)
    input_vars = dict()
    coin_vars = []
    output_vars = []
    outputs = []
    relation = manager.true
    for i in range(n):
        x_var, theta_var, y_var = 3 * i, 3 * i + 1, 3 * i + 2
        weights.set_indicator(x_var)
        weights.set_coin(theta_var, lam)
        weights.set_indicator(y_var)
        input_vars[f'x{i + 1}'] = [x_var]
        coin_vars.append((theta_var, lam))
        output_vars.append(y_var)
        x, theta, y = manager.mk_var(x_var), manager.mk_var(theta_var), manager.mk_var(y_var)
        reported = (~theta & x) | (theta & ~x)
        outputs.append(reported)
        relation = relation & y.iff(reported)
    params = [model.Param(f'x{i}', model.BoolType()) for i in range(1, n + 1)]
    output_type = model.TupleType(tuple(model.BoolType() for _ in range(n)))
    compiled = CompiledModel(
        manager=manager,
        params=params,
        input_vars=input_vars,
        coin_vars=coin_vars,
        output_bdds=outputs,
        output_type=output_type,
        weight_map=weights,
        relation=relation,
        output_vars=output_vars,
    )
    compiled.stats['full_size'] = compiled.full_size()
    compiled.stats['conditioned_size'] = compiled.conditioned_size()
    compiled.stats['relation_size'] = manager.node_count(relation)
    return compiled
