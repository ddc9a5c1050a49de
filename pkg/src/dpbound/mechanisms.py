"""
Built-in mechanisms as .dpp programs, with their domains, neighbour relation, target maps
and the symmetry sets that shrink privacy and accuracy synthesis.

Inputs are tuples with one entry per program parameter. Boolean entries are the ints 0 and 1.
"""

import itertools
import logging
from fractions import Fraction

from dpbound.compiler import compile_program
from dpbound.error_code import DomainError, ParameterError
from dpbound.lang import model
from dpbound.lang.validator import ValidatedProgram, validate
from dpbound.synthesis import AccuracySet, InferenceSet, PrivacySet

logger = logging.getLogger(__name__)

BOTTOM = 0  # above_threshold result when no query passes


###########
# Domains #
###########


class VectorDomain(object):
    """Vectors whose i-th entry ranges over coordinates[i]; iterated lexicographically"""

    def __init__(self, coordinates):
        self.coordinates = tuple(tuple(c) for c in coordinates)

    @classmethod
    def bits(cls, n):
        return cls([(0, 1)] * n)

    @classmethod
    def ints(cls, n, k):
        return cls([tuple(range(k + 1))] * n)

    @property
    def n(self):
        return len(self.coordinates)

    def __len__(self):
        size = 1
        for c in self.coordinates:
            size *= len(c)
        return size

    def __iter__(self):
        return itertools.product(*self.coordinates)

    def __contains__(self, x):
        if not isinstance(x, (tuple, list)) or len(x) != self.n:
            return False
        return all(v in c for v, c in zip(x, self.coordinates))

    def __eq__(self, other):
        return isinstance(other, VectorDomain) and self.coordinates == other.coordinates

    def __repr__(self):
        return f'VectorDomain(n={self.n}, size={len(self)})'

    def first(self):
        return tuple(c[0] for c in self.coordinates)

    def neighbor_count(self):
        return sum(len(c) - 1 for c in self.coordinates)

    def neighbors(self, x):
        """Vectors differing from x in exactly one entry, coordinate-major and value-ascending"""
        if x not in self:
            raise DomainError(f'{x!r} is not in the input domain')
        x = tuple(x)
        for index, choices in enumerate(self.coordinates):
            for value in sorted(choices):
                if value != x[index]:
                    yield x[:index] + (value, ) + x[index + 1:]


class ScalarDomain(object):
    """A finite ordered set of scalar values"""

    def __init__(self, values):
        self.values = tuple(values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, value):
        return value in self.values

    def __eq__(self, other):
        return isinstance(other, ScalarDomain) and self.values == other.values

    def __repr__(self):
        return f'ScalarDomain({list(self.values)})'

    def first(self):
        return self.values[0]


class TargetMap(object):
    """V: the target output of every input"""

    def __init__(self, function, name):
        self.function = function
        self.name = name

    def __call__(self, x):
        return self.function(x)

    def __repr__(self):
        return f'TargetMap({self.name})'


def count(x):
    return sum(int(v) for v in x)


COUNT = TargetMap(count, 'count')


#############
# Mechanism #
#############


class Mechanism(object):
    def __init__(self, name, program, input_domain, output_domain, targets=None, params=None,
                 privacy_sets=None, accuracy_sets=None):
        self.name = name
        self.program = program
        self.input_domain = input_domain
        self.output_domain = output_domain
        self.targets = targets
        self.params = dict(params or {})
        self._privacy_sets = privacy_sets
        self._accuracy_sets = accuracy_sets
        self._validated = None

    def __repr__(self):
        params = ', '.join(f'{k}={model.format_rational(v) if isinstance(v, Fraction) else v}'
                           for k, v in self.params.items())
        return f'{self.name}({params})'

    @property
    def validated(self):
        if self._validated is None:
            self._validated = validate(self.program)
        return self._validated

    def compile(self, node_budget=None):
        compiled = compile_program(self.validated, node_budget=node_budget)
        compiled.output_domain = self.output_domain
        return compiled

    def neighbors(self, x):
        return self.input_domain.neighbors(x)

    @property
    def has_privacy_sets(self):
        return self._privacy_sets is not None

    @property
    def has_accuracy_sets(self):
        return self._accuracy_sets is not None

    def privacy_sets(self):
        """(I, C) proved sufficient for this mechanism"""
        if self._privacy_sets is None:
            raise ParameterError(f'{self.name} has no restricted privacy sets')
        return self._privacy_sets()

    def accuracy_sets(self, alpha):
        """(I, A) proved sufficient for this mechanism at error alpha"""
        if self._accuracy_sets is None:
            raise ParameterError(f'{self.name} has no restricted accuracy sets')
        return self._accuracy_sets(alpha)


def neighbors(mech, x):
    return mech.neighbors(x)


def _check_n(n):
    if not isinstance(n, int) or n < 1:
        raise ParameterError(f'n must be a positive integer, got {n!r}')


def _probability(value, name, open_interval=False):
    try:
        value = Fraction(value)
    except (TypeError, ValueError):
        raise ParameterError(f'{name} must be a rational number, got {value!r}')
    if open_interval and not 0 < value < 1:
        raise ParameterError(f'{name} must lie in (0, 1), got {model.format_rational(value)}')
    if not 0 <= value <= 1:
        raise ParameterError(f'{name} must lie in [0, 1], got {model.format_rational(value)}')
    return value


def ones(i, n):
    """The vector 1^i 0^(n - i)"""
    return tuple([1] * i + [0] * (n - i))


########################
# Randomized response  #
########################


def rr_report(i, lam):
    """y_i = if flip lam { !x_i } else { x_i }"""
    x = model.Var(f'x{i}')
    return model.Ite(model.Flip(lam), model.Not(x), x)


def rr_program(n, lam):
    reports = tuple(rr_report(i, lam) for i in range(1, n + 1))
    return model.Program(
        params=tuple(model.Param(f'x{i}', model.BoolType()) for i in range(1, n + 1)),
        body=model.TupleExpr(reports),
        output_type=model.TupleType(tuple(model.BoolType() for _ in range(n))),
    )


def rr(n, lam):
    """Each client reports its bit, flipped with probability lam"""
    _check_n(n)
    lam = _probability(lam, 'lambda')
    return Mechanism(
        name='rr',
        program=rr_program(n, lam),
        input_domain=VectorDomain.bits(n),
        output_domain=VectorDomain.bits(n),
        params={'n': n, 'lambda': lam},
        privacy_sets=lambda: rr_symmetry_sets(n),
    )


def rrcount_program(n, lam):
    width = model.bit_width(n)
    body = None
    for i in range(1, n + 1):
        term = model.Ite(model.Var(f'y{i}'), model.IntConst(1, width), model.IntConst(0, width))
        body = term if body is None else model.IntAdd(body, term)
    for i in reversed(range(1, n + 1)):
        body = model.Let(f'y{i}', rr_report(i, lam), body)
    return model.Program(
        params=tuple(model.Param(f'x{i}', model.BoolType()) for i in range(1, n + 1)),
        body=body,
        output_type=model.IntType(width),
    )


def rrcount(n, lam):
    """Randomized response followed by counting the reported ones"""
    _check_n(n)
    lam = _probability(lam, 'lambda')
    return Mechanism(
        name='rrcount',
        program=rrcount_program(n, lam),
        input_domain=VectorDomain.bits(n),
        output_domain=ScalarDomain(range(n + 1)),
        targets=COUNT,
        params={'n': n, 'lambda': lam},
        accuracy_sets=lambda alpha: rrcount_symmetry_sets(n, alpha),
    )


def rr_symmetry_sets(n):
    """
    I = {(1^i 0^(n-i), 0^n) : 0 <= i <= n}
    C = {(1^i 0^(n-i), 1^(i+1) 0^(n-i-1), 0^n)} and {(1^i 0^(n-i), 1^(i-1) 0^(n-i+1), 0^n)}
    """
    _check_n(n)
    zero = ones(0, n)
    inference = InferenceSet((ones(i, n), zero) for i in range(n + 1))
    forward = [(ones(i, n), ones(i + 1, n), zero) for i in range(n)]
    backward = [(ones(i, n), ones(i - 1, n), zero) for i in range(1, n + 1)]
    return inference, PrivacySet(forward + backward)


def rrcount_symmetry_sets(n, alpha):
    _check_n(n)
    if not isinstance(alpha, int) or alpha < 0:
        raise ParameterError(f'alpha must be a non-negative integer, got {alpha!r}')
    accuracy = AccuracySet(ones(i, n) for i in range(n + 1))
    pairs = []
    for i in range(n + 1):
        for j in range(max(0, i - alpha), min(n, i + alpha) + 1):
            pairs.append((ones(i, n), j))
    return InferenceSet(pairs), accuracy


###################
# Above threshold #
###################


def truncated_geometric(lam, k):
    """
    One-sided geometric noise on {0..k} with the tail folded onto k:
    Pr[z] = (1 - lam) lam^z for z < k, Pr[k] = lam^k
    """
    lam = _probability(lam, 'lambda', open_interval=True)
    if not isinstance(k, int) or k < 0:
        raise ParameterError(f'k must be a non-negative integer, got {k!r}')
    masses = [(z, (1 - lam) * lam ** z) for z in range(k)]
    masses.append((k, lam ** k))
    return masses


def above_threshold_program(n, k, threshold, lam1, lam2):
    width = model.bit_width(k)
    index_width = model.bit_width(n)
    noise1 = tuple(mass for _, mass in truncated_geometric(lam1, k))
    noise2 = tuple(mass for _, mass in truncated_geometric(lam2, k))
    cap = model.IntConst(k, width)

    # first index whose noisy query reaches the noisy threshold, else BOTTOM
    result = model.IntConst(BOTTOM, index_width)
    for i in reversed(range(1, n + 1)):
        result = model.Ite(model.Var(f'p{i}'), model.IntConst(i, index_width), result)
    for i in reversed(range(1, n + 1)):
        noisy_query = model.IntAdd(model.Var(f'x{i}'), model.Categorical(noise2, width))
        result = model.Let(f'p{i}', model.IntGe(noisy_query, model.Var('t')), result)
    clamped = model.Ite(model.IntGe(model.Var('s'), cap), cap, model.Var('s'))
    body = model.Let('g', model.Categorical(noise1, width),
                     model.Let('s', model.IntAdd(model.IntConst(threshold, width), model.Var('g')),
                               model.Let('t', clamped, result)))
    return model.Program(
        params=tuple(model.Param(f'x{i}', model.IntType(width)) for i in range(1, n + 1)),
        body=body,
        output_type=model.IntType(index_width),
    )


def above_threshold(n, k, threshold, lam1, lam2):
    """
    Noisy threshold T + G1 (clamped to k), then the first query i with x_i + G2_i >= threshold.
    Queries are ints in {0..k}; the result is the 1-based index, or BOTTOM (0) if none passes.
    """
    _check_n(n)
    if not isinstance(k, int) or k < 1:
        raise ParameterError(f'k must be a positive integer, got {k!r}')
    if not isinstance(threshold, int) or not 0 <= threshold <= k:
        raise ParameterError(f'threshold must be an integer in [0, {k}], got {threshold!r}')
    lam1 = _probability(lam1, 'lambda1', open_interval=True)
    lam2 = _probability(lam2, 'lambda2', open_interval=True)
    return Mechanism(
        name='above',
        program=above_threshold_program(n, k, threshold, lam1, lam2),
        input_domain=VectorDomain.ints(n, k),
        output_domain=ScalarDomain(range(n + 1)),
        params={'n': n, 'k': k, 'threshold': threshold, 'lambda1': lam1, 'lambda2': lam2},
    )


#################
# User programs #
#################


def _type_values(type_):
    if isinstance(type_, model.BoolType):
        return (0, 1)
    if isinstance(type_, model.IntType):
        return tuple(range(1 << type_.bits))
    return tuple(itertools.product(*(_type_values(t) for t in type_.items)))


def from_program(program, name='program'):
    """A mechanism over every value of the program's parameter and result types"""
    validated = program if isinstance(program, ValidatedProgram) else validate(program)
    input_domain = VectorDomain(_type_values(p.type) for p in validated.params)
    output_type = validated.output_type
    if isinstance(output_type, model.TupleType):
        output_domain = VectorDomain(_type_values(t) for t in output_type.items)
    else:
        output_domain = ScalarDomain(_type_values(output_type))
    mech = Mechanism(
        name=name,
        program=validated.program,
        input_domain=input_domain,
        output_domain=output_domain,
        params={'inputs': len(input_domain), 'outputs': len(output_domain)},
    )
    mech._validated = validated
    return mech
