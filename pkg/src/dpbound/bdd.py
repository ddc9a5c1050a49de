"""
Reduced ordered binary decision diagrams with exact weighted model counting.

Nodes live in a BddManager and are referred to by integer id: 0 is FALSE, 1 is TRUE,
and every other id is an internal node (level, lo, hi). The level of a node is the
position of its variable in the manager's fixed order; terminals sit at level num_vars.
Nodes are hash-consed, so two diagrams denote the same function iff they have the same id.
"""

import enum
import logging
import threading
from fractions import Fraction

import numpy

from dpbound import config
from dpbound.error_code import (
    ManagerMismatchError, MissingWeightError, NodeBudgetExceeded, UnknownVariableError)

logger = logging.getLogger(__name__)

FALSE_ID = 0
TRUE_ID = 1
RESOLVED = -1  # output_distribution: an output already fixed on this path


class BoolOp(enum.Enum):
    AND = 'and'
    OR = 'or'
    XOR = 'xor'
    IFF = 'iff'


AND = BoolOp.AND
OR = BoolOp.OR
XOR = BoolOp.XOR
IFF = BoolOp.IFF


class WeightMap(object):
    """
    Literal weights: w_pos[v] for the positive literal of variable v, w_neg[v] for the negative one.
    Coins carry (p, 1 - p); input and output indicator variables carry (1, 1).
    """

    def __init__(self, num_vars):
        self.num_vars = num_vars
        self.pos = [None] * num_vars
        self.neg = [None] * num_vars

    def __len__(self):
        return self.num_vars

    def _check(self, var):
        if not 0 <= var < self.num_vars:
            raise UnknownVariableError(f'variable {var} is not in the order (0..{self.num_vars - 1})')

    def set(self, var, w_pos, w_neg):
        self._check(var)
        self.pos[var] = Fraction(w_pos)
        self.neg[var] = Fraction(w_neg)

    def set_coin(self, var, prob):
        prob = Fraction(prob)
        self.set(var, prob, 1 - prob)

    def set_indicator(self, var):
        self.set(var, 1, 1)

    def get(self, var):
        self._check(var)
        return self.pos[var], self.neg[var]

    def copy(self):
        result = WeightMap(self.num_vars)
        result.pos = list(self.pos)
        result.neg = list(self.neg)
        return result

    def condition(self, assignment):
        """Copy in which every assigned variable keeps only the weight of its assigned literal, as 1"""
        result = self.copy()
        for var, bit in assignment.items():
            result._check(var)
            if bit:
                result.pos[var], result.neg[var] = Fraction(1), Fraction(0)
            else:
                result.pos[var], result.neg[var] = Fraction(0), Fraction(1)
        return result

    def missing(self):
        return [v for v in range(self.num_vars) if self.pos[v] is None or self.neg[v] is None]

    def check_complete(self):
        missing = self.missing()
        if missing:
            raise MissingWeightError(f'no weight for variable(s) {missing}')

    def total(self):
        """Product of (w_pos + w_neg) over every variable"""
        self.check_complete()
        result = Fraction(1)
        for p, n in zip(self.pos, self.neg):
            result *= p + n
        return result


class Bdd(object):
    """A node of a manager, with operators for the boolean connectives"""
    __slots__ = ('manager', 'node')

    def __init__(self, manager, node):
        self.manager = manager
        self.node = node

    def __and__(self, other):
        return self.manager.apply(AND, self, other)

    def __or__(self, other):
        return self.manager.apply(OR, self, other)

    def __xor__(self, other):
        return self.manager.apply(XOR, self, other)

    def __invert__(self):
        return self.manager.neg(self)

    def iff(self, other):
        return self.manager.apply(IFF, self, other)

    def __eq__(self, other):
        if not isinstance(other, Bdd):
            return NotImplemented
        return self.manager is other.manager and self.node == other.node

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((id(self.manager), self.node))

    def __repr__(self):
        if self.is_terminal:
            return f'Bdd({"TRUE" if self.node == TRUE_ID else "FALSE"})'
        return f'Bdd(node={self.node}, var={self.manager.var_name(self.level)})'

    @property
    def level(self):
        return self.manager.level(self.node)

    @property
    def is_terminal(self):
        return self.node in (FALSE_ID, TRUE_ID)

    @property
    def is_true(self):
        return self.node == TRUE_ID

    @property
    def is_false(self):
        return self.node == FALSE_ID

    @property
    def low(self):
        return Bdd(self.manager, self.manager.low(self.node))

    @property
    def high(self):
        return Bdd(self.manager, self.manager.high(self.node))


class BddManager(object):
    """
    Owner of a unique table and operation caches over a fixed variable order.

    Mutating operations (anything that may create nodes) must be serialized by the
    caller; hold `manager.lock` when several threads share a manager.
    Read-only queries (wmc, node_count, output_distribution) keep their memo
    tables per call.
    """

    def __init__(self, num_vars, names=None, node_budget=None):
        if num_vars < 0:
            raise ValueError(num_vars)
        self.num_vars = num_vars
        if names is None:
            names = [f'v{i}' for i in range(num_vars)]
        if len(names) != num_vars:
            raise ValueError(f'{len(names)} names for {num_vars} variables')
        self.names = list(names)
        if node_budget is None:
            node_budget = config.node_budget()
        self.node_budget = node_budget
        # node arrays; terminals at index 0 and 1
        self._level = [num_vars, num_vars]
        self._lo = [FALSE_ID, TRUE_ID]
        self._hi = [FALSE_ID, TRUE_ID]
        self._unique = dict()
        self._apply_cache = dict()
        self._neg_cache = dict()
        self._ite_cache = dict()
        self.lock = threading.Lock()

    def __len__(self):
        """Number of internal nodes ever created"""
        return len(self._level) - 2

    def __str__(self):
        return f'BddManager(vars={self.num_vars}, nodes={len(self)})'

    def var_name(self, level):
        if level >= self.num_vars:
            return 'terminal'
        return self.names[level]

    def level(self, u):
        return self._level[u]

    def low(self, u):
        return self._lo[u]

    def high(self, u):
        return self._hi[u]

    def _check_var(self, var):
        if not isinstance(var, int) or not 0 <= var < self.num_vars:
            raise UnknownVariableError(f'variable {var!r} is not in the order (0..{self.num_vars - 1})')

    def _node(self, a):
        if not isinstance(a, Bdd):
            raise TypeError(f'expected a Bdd, got {type(a).__name__}')
        if a.manager is not self:
            raise ManagerMismatchError('diagram belongs to a different manager')
        return a.node

    def _wrap(self, u):
        return Bdd(self, u)

    def _mk(self, level, lo, hi):
        if lo == hi:
            return lo
        key = (level, lo, hi)
        u = self._unique.get(key)
        if u is not None:
            return u
        if len(self._level) - 2 >= self.node_budget:
            raise NodeBudgetExceeded(
                f'node budget of {self.node_budget} exceeded (set {config.NODE_BUDGET_ENV} to raise it)')
        u = len(self._level)
        self._level.append(level)
        self._lo.append(lo)
        self._hi.append(hi)
        self._unique[key] = u
        return u

    ################
    # Constructors #
    ################

    def mk_const(self, bit):
        return self._wrap(TRUE_ID if bit else FALSE_ID)

    @property
    def true(self):
        return self.mk_const(True)

    @property
    def false(self):
        return self.mk_const(False)

    def mk_var(self, var):
        self._check_var(var)
        return self._wrap(self._mk(var, FALSE_ID, TRUE_ID))

    def mk_literal(self, var, bit):
        self._check_var(var)
        if bit:
            return self._wrap(self._mk(var, FALSE_ID, TRUE_ID))
        return self._wrap(self._mk(var, TRUE_ID, FALSE_ID))

    ##############
    # Operations #
    ##############

    def apply(self, op, a, b):
        op = BoolOp(op)
        return self._wrap(self._apply(op, self._node(a), self._node(b)))

    def _apply(self, op, u, v):
        if op is AND:
            if u == FALSE_ID or v == FALSE_ID:
                return FALSE_ID
            if u == TRUE_ID or u == v:
                return v
            if v == TRUE_ID:
                return u
        elif op is OR:
            if u == TRUE_ID or v == TRUE_ID:
                return TRUE_ID
            if u == FALSE_ID or u == v:
                return v
            if v == FALSE_ID:
                return u
        elif op is XOR:
            if u == v:
                return FALSE_ID
            if u == FALSE_ID:
                return v
            if v == FALSE_ID:
                return u
            if u == TRUE_ID:
                return self._neg(v)
            if v == TRUE_ID:
                return self._neg(u)
        else:  # IFF
            if u == v:
                return TRUE_ID
            if u == TRUE_ID:
                return v
            if v == TRUE_ID:
                return u
            if u == FALSE_ID:
                return self._neg(v)
            if v == FALSE_ID:
                return self._neg(u)
        # all four operators are commutative
        if u > v:
            u, v = v, u
        key = (op, u, v)
        result = self._apply_cache.get(key)
        if result is not None:
            return result
        lu, lv = self._level[u], self._level[v]
        level = min(lu, lv)
        u0, u1 = (self._lo[u], self._hi[u]) if lu == level else (u, u)
        v0, v1 = (self._lo[v], self._hi[v]) if lv == level else (v, v)
        result = self._mk(level, self._apply(op, u0, v0), self._apply(op, u1, v1))
        self._apply_cache[key] = result
        return result

    def neg(self, a):
        return self._wrap(self._neg(self._node(a)))

    def _neg(self, u):
        if u == FALSE_ID:
            return TRUE_ID
        if u == TRUE_ID:
            return FALSE_ID
        result = self._neg_cache.get(u)
        if result is None:
            result = self._mk(self._level[u], self._neg(self._lo[u]), self._neg(self._hi[u]))
            self._neg_cache[u] = result
            self._neg_cache[result] = u
        return result

    def ite(self, c, t, e):
        return self._wrap(self._ite(self._node(c), self._node(t), self._node(e)))

    def _ite(self, c, t, e):
        if c == TRUE_ID:
            return t
        if c == FALSE_ID:
            return e
        if t == e:
            return t
        if t == TRUE_ID and e == FALSE_ID:
            return c
        if t == FALSE_ID and e == TRUE_ID:
            return self._neg(c)
        if t == TRUE_ID:
            return self._apply(OR, c, e)
        if e == FALSE_ID:
            return self._apply(AND, c, t)
        key = (c, t, e)
        result = self._ite_cache.get(key)
        if result is not None:
            return result
        level = min(self._level[c], self._level[t], self._level[e])
        c0, c1 = self._cofactors(c, level)
        t0, t1 = self._cofactors(t, level)
        e0, e1 = self._cofactors(e, level)
        result = self._mk(level, self._ite(c0, t0, e0), self._ite(c1, t1, e1))
        self._ite_cache[key] = result
        return result

    def _cofactors(self, u, level):
        if self._level[u] == level:
            return self._lo[u], self._hi[u]
        return u, u

    def restrict(self, a, assignment):
        """Cofactor of a under a partial assignment {var: bit}"""
        for var in assignment:
            self._check_var(var)
        assignment = {var: bool(bit) for var, bit in assignment.items()}
        if not assignment:
            return a
        deepest = max(assignment)
        cache = dict()

        def visit(u):
            level = self._level[u]
            if level > deepest:
                return u
            result = cache.get(u)
            if result is not None:
                return result
            if level in assignment:
                result = visit(self._hi[u] if assignment[level] else self._lo[u])
            else:
                result = self._mk(level, visit(self._lo[u]), visit(self._hi[u]))
            cache[u] = result
            return result

        return self._wrap(visit(self._node(a)))

    ###########
    # Queries #
    ###########

    def evaluate(self, a, assignment):
        """Truth value of a under a total assignment (missing variables read as 0)"""
        u = self._node(a)
        while u not in (FALSE_ID, TRUE_ID):
            u = self._hi[u] if assignment.get(self._level[u], 0) else self._lo[u]
        return u == TRUE_ID

    def support(self, a):
        return sorted({self._level[u] for u in self.descendants([a]) if u > TRUE_ID})

    def descendants(self, roots):
        seen = set()
        stack = [self._node(r) for r in roots]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            if u > TRUE_ID:
                stack.append(self._lo[u])
                stack.append(self._hi[u])
        return seen

    def node_count(self, roots):
        """Internal nodes shared by the roots plus the distinct terminals they reach"""
        if isinstance(roots, Bdd):
            roots = [roots]
        return len(self.descendants(roots))

    def wmc(self, a, weights, exact=True):
        """
        Weighted model count of a over every variable of the order.
        A variable skipped on a path contributes the factor w_pos + w_neg.
        With exact=False the count is done in float64 (timing runs only).
        """
        if weights.num_vars != self.num_vars:
            raise MissingWeightError(f'weight map covers {weights.num_vars} variables, order has {self.num_vars}')
        weights.check_complete()
        root = self._node(a)
        if exact:
            pos, neg = weights.pos, weights.neg
            sums = [p + n for p, n in zip(pos, neg)]
            zero, one = Fraction(0), Fraction(1)

            def gap(begin, end):
                result = one
                for level in range(begin, end):
                    result *= sums[level]
                return result
        else:
            pos = numpy.array([float(p) for p in weights.pos], dtype=numpy.float64)
            neg = numpy.array([float(n) for n in weights.neg], dtype=numpy.float64)
            sums = pos + neg
            zero, one = 0.0, 1.0

            def gap(begin, end):
                return float(numpy.prod(sums[begin:end]))

        cache = {FALSE_ID: zero, TRUE_ID: one}

        def value(u):
            result = cache.get(u)
            if result is not None:
                return result
            level = self._level[u]
            lo, hi = self._lo[u], self._hi[u]
            lo_value = value(lo) * gap(level + 1, self._level[lo])
            hi_value = value(hi) * gap(level + 1, self._level[hi])
            result = neg[level] * lo_value + pos[level] * hi_value
            cache[u] = result
            return result

        result = value(root) * gap(0, self._level[root])
        if not exact:
            return float(result)
        return result

    def output_distribution(self, roots, candidates, coin_vars, weights, wanted=None):
        """
        Joint distribution of the root functions for each candidate input assignment,
        in one traversal of the diagrams.

        roots: the output bit diagrams.
        candidates: list of {var: bit}, each assigning every non-coin variable the roots read.
        coin_vars: the coin variables, weighted by `weights`. Any other variable is an input:
        it follows the candidate's bit and contributes the factor 1 where a path skips it.
        wanted: optional list parallel to candidates; an entry is None (every output) or the
        output bit tuples that candidate needs. Paths that cannot reach one are cut.
        Returns one dict per candidate, mapping the tuple of output bits to its mass;
        outputs of zero mass are left out.
        """
        coin_vars = frozenset(coin_vars)
        for var in coin_vars:
            self._check_var(var)
            if weights.pos[var] is None or weights.neg[var] is None:
                raise MissingWeightError(f'no weight for coin variable {var}')
        nodes = tuple(self._node(r) for r in roots)
        width = len(nodes)
        one = Fraction(1)
        num_vars = self.num_vars
        sums = [weights.pos[v] + weights.neg[v] if v in coin_vars else one for v in range(num_vars)]
        if wanted is None:
            wanted = [None] * len(candidates)
        if len(wanted) != len(candidates):
            raise ValueError(f'{len(wanted)} wanted entries for {len(candidates)} candidates')

        def mask(bits):
            if len(bits) != width:
                raise ValueError(f'output {bits!r} has {len(bits)} bits, the diagrams have {width}')
            return sum(1 << k for k, b in enumerate(bits) if b)

        def gap(begin, end):
            result = one
            for level in range(begin, end):
                result *= sums[level]
            return result

        def top(state):
            # resolved outputs are stored as RESOLVED and sit below every variable
            return min((self._level[u] for u in state if u != RESOLVED), default=num_vars)

        def resolve(state, members):
            """Move outputs that reached a terminal out of the state: (state, their bits, surviving members)"""
            fixed = 0
            value = 0
            normalized = []
            for k, u in enumerate(state):
                if u == FALSE_ID or u == TRUE_ID:
                    fixed |= 1 << k
                    if u == TRUE_ID:
                        value |= 1 << k
                    normalized.append(RESOLVED)
                else:
                    normalized.append(u)
            if fixed:
                kept = []
                for m, targets in members:
                    if targets is not None:
                        targets = frozenset(t for t in targets if (t ^ value) & fixed == 0)
                        if not targets:
                            continue
                    kept.append((m, targets))
                members = tuple(kept)
            return tuple(normalized), value, members

        cache = dict()

        def visit(state, members):
            # distribution of the unresolved outputs from level top(state) down, per member
            key = (state, members)
            result = cache.get(key)
            if result is not None:
                return result
            level = top(state)
            if level >= num_vars:
                result = {m: {0: one} for m, _ in members}
            elif level not in coin_vars:
                result = dict()
                for m, _ in members:
                    if level not in candidates[m]:
                        raise UnknownVariableError(f'candidate input leaves variable {self.var_name(level)} unassigned')
                for bit in (False, True):
                    group = tuple(entry for entry in members if bool(candidates[entry[0]][level]) == bit)
                    if group:
                        result.update(branch(state, level, bit, group, one))
            else:
                result = dict()
                for bit, weight in ((False, weights.neg[level]), (True, weights.pos[level])):
                    if weight == 0:
                        continue
                    for m, dist in branch(state, level, bit, members, weight).items():
                        merged = result.setdefault(m, dict())
                        for bits, mass in dist.items():
                            merged[bits] = merged.get(bits, 0) + mass
            cache[key] = result
            return result

        def branch(state, level, bit, members, weight):
            child = tuple(
                (self._hi[u] if bit else self._lo[u]) if u != RESOLVED and self._level[u] == level else u
                for u in state)
            child, value, members = resolve(child, members)
            factor = weight * gap(level + 1, top(child))
            if factor == 0 or not members:
                return dict()
            return {m: {bits | value: mass * factor for bits, mass in dist.items()}
                    for m, dist in visit(child, members).items()}

        if not candidates:
            return []
        members = tuple((m, None if w is None else frozenset(mask(bits) for bits in w)) for m, w in enumerate(wanted))
        state, value, members = resolve(nodes, members)
        result = visit(state, members) if members else dict()
        factor = gap(0, top(state))
        distributions = []
        for m in range(len(candidates)):
            dist = dict()
            for bits, mass in result.get(m, dict()).items():
                mass *= factor
                if mass != 0:
                    dist[tuple(bool((bits | value) >> k & 1) for k in range(width))] = mass
            distributions.append(dist)
        return distributions

    ##########
    # Output #
    ##########

    def to_dot(self, roots, root_names=None):
        """Graphviz text: solid edges lead to hi children, dashed edges to lo children"""
        if isinstance(roots, Bdd):
            roots = [roots]
        nodes = sorted(self.descendants(roots))
        lines = ['digraph bdd {']
        for u in nodes:
            if u == FALSE_ID or u == TRUE_ID:
                lines.append(f'  n{u} [shape=box, label="{u}"];')
            else:
                lines.append(f'  n{u} [shape=circle, label="{self.var_name(self._level[u])}"];')
        for u in nodes:
            if u > TRUE_ID:
                lines.append(f'  n{u} -> n{self._hi[u]};')
                lines.append(f'  n{u} -> n{self._lo[u]} [style=dashed];')
        for index, root in enumerate(roots):
            name = root_names[index] if root_names else f'f{index}'
            lines.append(f'  r{index} [shape=plaintext, label="{name}"];')
            lines.append(f'  r{index} -> n{self._node(root)};')
        lines.append('}')
        return '\n'.join(lines)
