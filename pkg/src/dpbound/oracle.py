"""
Brute-force ground truth: run a program on every coin assignment and add up exact masses.

Shares only the abstract syntax (and the categorical flip chain) with the compiler;
no decision diagram, weight map or restriction code is involved.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from dpbound import config
from dpbound.error_code import CoinCapExceeded, DomainError, SizeGuardExceeded
from dpbound.lang import model
from dpbound.lang.validator import ValidatedProgram, validate
from dpbound.synthesis import AccuracyReport, PrivacyReport

logger = logging.getLogger(__name__)


class CoinProfile(object):
    """Coins of a program in pre-order: (coin id, bias), a categorical contributing its flip chain"""

    def __init__(self, program):
        self.sites = []
        self.coins = []
        for number, (path, node) in enumerate(model.coin_sites(program.body)):
            if isinstance(node, model.Flip):
                biases = [Fraction(node.prob)]
            else:
                biases = model.categorical_chain(node.weights)
            self.sites.append((path, len(self.coins), len(biases)))
            for j, bias in enumerate(biases):
                coin_id = f'c{number}' if isinstance(node, model.Flip) else f'c{number}.{j}'
                self.coins.append((coin_id, bias))

    def __len__(self):
        return len(self.coins)

    def biases(self):
        return [bias for _, bias in self.coins]


class Evaluator(object):
    """Big-step evaluation of a program with every coin outcome fixed"""

    def __init__(self, validated, profile):
        self.validated = validated
        self.site_slices = {path: (start, length) for path, start, length in profile.sites}

    def run(self, env, coins):
        self.coins = coins
        return self.evaluate(self.validated.body, (), env)

    def evaluate(self, expr, path, env):
        return getattr(self, f'eval_{type(expr).__name__}')(expr, path, env)

    def eval_BoolConst(self, expr, path, env):
        return int(expr.value)

    def eval_IntConst(self, expr, path, env):
        return expr.value

    def eval_Var(self, expr, path, env):
        return env[expr.name]

    def eval_Flip(self, expr, path, env):
        start, _ = self.site_slices[path]
        return self.coins[start]

    def eval_Categorical(self, expr, path, env):
        start, length = self.site_slices[path]
        for j in range(length):
            if self.coins[start + j]:
                return j
        return length

    def eval_Not(self, expr, path, env):
        return 1 - self.evaluate(expr.operand, path + (0, ), env)

    def _pair(self, expr, path, env):
        return self.evaluate(expr.lhs, path + (0, ), env), self.evaluate(expr.rhs, path + (1, ), env)

    def eval_And(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        return a & b

    def eval_Or(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        return a | b

    def eval_Xor(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        return a ^ b

    def eval_Iff(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        return int(a == b)

    def eval_IntAdd(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        limit = 1 << self.validated.type_of(path).width
        if expr.saturating:
            return min(a + b, limit - 1)
        return (a + b) % limit

    def eval_IntGe(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        return int(a >= b)

    def eval_IntEq(self, expr, path, env):
        a, b = self._pair(expr, path, env)
        return int(a == b)

    def eval_Ite(self, expr, path, env):
        if self.evaluate(expr.cond, path + (0, ), env):
            return self.evaluate(expr.then, path + (1, ), env)
        return self.evaluate(expr.else_, path + (2, ), env)

    def eval_Let(self, expr, path, env):
        inner = dict(env)
        inner[expr.name] = self.evaluate(expr.bound, path + (0, ), env)
        return self.evaluate(expr.body, path + (1, ), inner)

    def eval_TupleExpr(self, expr, path, env):
        return tuple(self.evaluate(item, path + (i, ), env) for i, item in enumerate(expr.items))


def _check_value(type_, value, name):
    if isinstance(type_, model.TupleType):
        if not isinstance(value, (tuple, list)) or len(value) != len(type_.items):
            raise DomainError(f'{name}: {value!r} is not a value of type {type_}')
        return tuple(_check_value(t, v, name) for t, v in zip(type_.items, value))
    if isinstance(value, bool):
        value = int(value)
    if not isinstance(value, int) or not 0 <= value < (1 << type_.width):
        raise DomainError(f'{name}: {value!r} is not a value of type {type_}')
    return value


def _outcomes(bias):
    # zero-weight outcomes are never enumerated
    return [(bit, weight) for bit, weight in ((0, 1 - bias), (1, bias)) if weight != 0]


def enumerate_distribution(p, x, coin_cap=config.DEFAULT_COIN_CAP, jobs=1, block_coins=4):
    """
    {y: Pr[A(x) = y]} by evaluating the program under every coin assignment of nonzero weight.
    With jobs > 1 the assignments are split into blocks on the first block_coins coins.
    """
    if not isinstance(p, ValidatedProgram):
        p = validate(p)
    profile = CoinProfile(p.program)
    if len(profile) > coin_cap:
        raise CoinCapExceeded(f'program has {len(profile)} coins, over the cap of {coin_cap}')
    if not isinstance(x, (tuple, list)) or len(x) != len(p.params):
        raise DomainError(f'input {x!r} must have one value per parameter ({len(p.params)})')
    env = {param.name: _check_value(param.type, value, param.name) for param, value in zip(p.params, x)}
    choices = [_outcomes(bias) for bias in profile.biases()]
    logger.debug('oracle: %d coins, %d assignments', len(choices), math.prod(len(c) for c in choices))

    def run_block(prefix):
        evaluator = Evaluator(p, profile)
        head_bits = tuple(bit for bit, _ in prefix)
        head_weight = math.prod((w for _, w in prefix), start=Fraction(1))
        result = dict()
        for tail in itertools.product(*choices[len(prefix):]):
            weight = head_weight * math.prod((w for _, w in tail), start=Fraction(1))
            y = evaluator.run(env, head_bits + tuple(bit for bit, _ in tail))
            result[y] = result.get(y, Fraction(0)) + weight
        return result

    split = min(block_coins, len(choices)) if jobs is not None and jobs > 1 else 0
    prefixes = list(itertools.product(*choices[:split]))
    if split:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            blocks = list(executor.map(run_block, prefixes))
    else:
        blocks = [run_block(prefix) for prefix in prefixes]
    distribution = dict()
    for block in blocks:
        for y, mass in block.items():
            distribution[y] = distribution.get(y, Fraction(0)) + mass
    return dict(sorted((y, mass) for y, mass in distribution.items() if mass != 0))


def _distributions(mech, coin_cap, jobs):
    p = mech.validated
    return {x: enumerate_distribution(p, x, coin_cap=coin_cap, jobs=jobs) for x in mech.input_domain}


def oracle_privacy_bound(mech, coin_cap=config.DEFAULT_COIN_CAP, domain_cap=config.DEFAULT_VALIDATION_CAP,
                         jobs=1):
    """Largest likelihood ratio over every neighbouring pair and output, without decision diagrams"""
    _check_domain_cap(mech, domain_cap)
    dists = _distributions(mech, coin_cap, jobs)
    p = Fraction(0)
    witness = None
    for x in mech.input_domain:
        for x2 in mech.neighbors(x):
            for y in mech.output_domain:
                a, b = dists[x].get(y, 0), dists[x2].get(y, 0)
                if a == 0 and b == 0:
                    continue
                ratio = math.inf if b == 0 else Fraction(a) / Fraction(b)
                if ratio > p:
                    p, witness = ratio, (x, x2, y)
    return PrivacyReport(p=p, witness=witness, solver_runs=len(dists))


def oracle_success_probability(distribution, target, alpha):
    """Pr[|A(x) - V(x)| <= alpha] read straight off a distribution"""
    return sum((mass for y, mass in distribution.items() if abs(y - target) <= alpha), Fraction(0))


def oracle_accuracy_profile(mech, alpha, coin_cap=config.DEFAULT_COIN_CAP,
                            domain_cap=config.DEFAULT_VALIDATION_CAP, jobs=1):
    """[(x, Pr[A(x) within alpha of V(x)])] for every input, in domain order"""
    if mech.targets is None:
        raise DomainError(f'{mech.name} has no target map')
    _check_domain_cap(mech, domain_cap)
    dists = _distributions(mech, coin_cap, jobs)
    return [(x, oracle_success_probability(dists[x], mech.targets(x), alpha)) for x in mech.input_domain]


def oracle_accuracy_bound(mech, alpha, coin_cap=config.DEFAULT_COIN_CAP,
                          domain_cap=config.DEFAULT_VALIDATION_CAP, jobs=1):
    profile = oracle_accuracy_profile(mech, alpha, coin_cap, domain_cap, jobs)
    p, witness = None, None
    for x, mass in profile:
        if p is None or mass < p:
            p, witness = mass, x
    return AccuracyReport(p=p, alpha=alpha, witness=witness, solver_runs=len(profile))


def _check_domain_cap(mech, cap):
    size = len(mech.input_domain) * len(mech.output_domain)
    if cap is not None and size > cap:
        raise SizeGuardExceeded(f'{size} input/output pairs to enumerate, over the cap of {cap}')
