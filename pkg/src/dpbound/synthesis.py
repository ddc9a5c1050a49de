"""
Bound synthesis over a compiled model.

inference materializes the probabilities of an inference set I. privacy_bound takes the
largest likelihood ratio over a privacy set C; accuracy_bound takes the smallest
probability of landing within alpha of the target over an accuracy set A.
Exhaustive sets always work; symmetry sets from dpbound.mechanisms are much smaller.
"""

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from dpbound import config
from dpbound.compiler import joint_distribution, joint_distribution_batch
from dpbound.error_code import CoverageError, ParameterError, SizeGuardExceeded, ValidationError

logger = logging.getLogger(__name__)


########
# Sets #
########


class _OrderedSet(object):
    """Insertion-ordered collection without duplicates"""

    def __init__(self, items=()):
        self._items = list(dict.fromkeys(self._normalize(i) for i in items))
        self._index = set(self._items)

    @staticmethod
    def _normalize(item):
        return item

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __contains__(self, item):
        return self._normalize(item) in self._index

    def __getitem__(self, index):
        return self._items[index]

    def __eq__(self, other):
        return type(self) is type(other) and self._items == other._items

    def __repr__(self):
        return f'{type(self).__name__}({self._items!r})'

    def as_set(self):
        return frozenset(self._items)


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, tuple):
        return tuple(_freeze(v) for v in value)
    return value


class InferenceSet(_OrderedSet):
    """Input/output pairs (x, y) whose probabilities inference computes"""

    @staticmethod
    def _normalize(item):
        x, y = item
        return _freeze(x), _freeze(y)

    def inputs(self):
        return list(self.outputs_by_input())

    def outputs_by_input(self):
        """{x: [y, ...]} in the order of the set"""
        requested = dict()
        for x, y in self._items:
            requested.setdefault(x, []).append(y)
        return requested


class PrivacySet(_OrderedSet):
    """Triples (x, x', y) of neighbouring inputs and an output"""

    @staticmethod
    def _normalize(item):
        x, x2, y = item
        return _freeze(x), _freeze(x2), _freeze(y)


class AccuracySet(_OrderedSet):
    """Inputs x on which accuracy is measured"""

    @staticmethod
    def _normalize(item):
        return _freeze(item)


class _DomainProduct(object):
    """Shared parts of the exhaustive sets, which are enumerated on demand instead of stored"""

    def __getitem__(self, index):
        if index < 0:
            index += len(self)
        try:
            return next(itertools.islice(iter(self), index, None))
        except StopIteration:
            raise IndexError(index)

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __repr__(self):
        return f'{type(self).__name__}({self.input_domain!r}, {self.output_domain!r})'

    def as_set(self):
        return frozenset(self)


class ExhaustiveInferenceSet(_DomainProduct, InferenceSet):
    """Every (x, y) of X^n x Y, x-major"""

    def __init__(self, input_domain, output_domain):
        self.input_domain = input_domain
        self.output_domain = output_domain
        self.outputs = list(output_domain)

    def _key(self):
        return self.input_domain, self.output_domain

    def __iter__(self):
        return ((x, y) for x in self.input_domain for y in self.outputs)

    def __len__(self):
        return len(self.input_domain) * len(self.outputs)

    def __contains__(self, item):
        x, y = self._normalize(item)
        return x in self.input_domain and y in self.output_domain

    def inputs(self):
        return list(self.input_domain)

    def outputs_by_input(self):
        return {x: self.outputs for x in self.input_domain}


class ExhaustivePrivacySet(_DomainProduct, PrivacySet):
    """Every (x, x', y) with x' a neighbour of x; both orders of each pair are included"""

    def __init__(self, input_domain, output_domain):
        self.input_domain = input_domain
        self.output_domain = output_domain
        self.outputs = list(output_domain)

    def _key(self):
        return self.input_domain, self.output_domain

    def __iter__(self):
        return ((x, x2, y)
                for x in self.input_domain
                for x2 in self.input_domain.neighbors(x)
                for y in self.outputs)

    def __len__(self):
        return len(self.input_domain) * self.input_domain.neighbor_count() * len(self.outputs)

    def __contains__(self, item):
        x, x2, y = self._normalize(item)
        if x not in self.input_domain or x2 not in self.input_domain or y not in self.output_domain:
            return False
        return sum(a != b for a, b in zip(x, x2)) == 1

    def covered_by(self, I):
        """True when I holds every (x, y) of the product, checked on the domains where possible"""
        if isinstance(I, ExhaustiveInferenceSet):
            return I.input_domain == self.input_domain and I.output_domain == self.output_domain
        return all((x, y) in I for x in self.input_domain for y in self.outputs)


class ProbMatrix(object):
    """
    M(x, y) = Pr[A(x) = y] for every pair of the inference set it was built from.
    Stored as one row {y: p} per input; pairs of the set missing from a row have mass 0.
    """

    def __init__(self, entries=None, solver_runs=0):
        self.rows = dict()
        for (x, y), p in (entries or {}).items():
            self.rows.setdefault(x, dict())[y] = p
        self.pairs = dict.fromkeys(entries or ())
        self.solver_runs = solver_runs

    @classmethod
    def from_rows(cls, rows, pairs, solver_runs):
        M = cls(solver_runs=solver_runs)
        M.rows = rows
        M.pairs = pairs
        return M

    def __getitem__(self, pair):
        if pair not in self.pairs:
            raise KeyError(pair)
        x, y = pair
        return self.rows[x].get(y, Fraction(0))

    def __contains__(self, pair):
        return pair in self.pairs

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def get(self, x, y, default=None):
        if (x, y) not in self.pairs:
            return default
        return self[x, y]

    def items(self):
        for x, y in self.pairs:
            yield (x, y), self.rows[x].get(y, Fraction(0))

    @property
    def entries(self):
        return dict(self.items())


###########
# Reports #
###########


def _epsilon(p):
    if p == math.inf:
        return math.inf
    if p <= 0:
        return None
    return math.log(p)


@dataclass(frozen=True)
class PrivacyReport(object):
    p: Any  # Fraction, or math.inf
    witness: Optional[tuple]
    solver_runs: int
    timings: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def epsilon(self):
        return _epsilon(self.p)


@dataclass(frozen=True)
class AccuracyReport(object):
    p: Fraction
    alpha: int
    witness: Any
    solver_runs: int
    timings: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def beta(self):
        return 1 - self.p


@dataclass(frozen=True)
class SetValidationReport(object):
    valid: bool
    checked: int
    counterexample: Any = None
    reason: str = ''


#############
# Inference #
#############


def inference(m, I, batched=False, jobs=1):
    """
    M(x, y) for every pair of I. Each distinct x costs one joint distribution (one solver run);
    with batched=True all of them come from a single traversal, counted as one run.
    """
    if not isinstance(I, InferenceSet):
        I = InferenceSet(I)
    requested = I.outputs_by_input()
    inputs = list(requested)
    if not inputs:
        return ProbMatrix()
    checked = set()
    for ys in requested.values():
        if id(ys) not in checked:
            checked.add(id(ys))
            for y in ys:
                m.encode_output(y)
    if batched:
        # only the requested outputs of each input are traced through the diagrams
        wanted = None if isinstance(I, ExhaustiveInferenceSet) else [requested[x] for x in inputs]
        distributions = joint_distribution_batch(m, inputs, wanted=wanted)
        solver_runs = 1
    elif jobs is not None and jobs > 1 and len(inputs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            distributions = list(executor.map(lambda x: joint_distribution(m, x), inputs))
        solver_runs = len(inputs)
    else:
        distributions = [joint_distribution(m, x) for x in inputs]
        solver_runs = len(inputs)
    rows = dict(zip(inputs, distributions))
    logger.info('inference: %d pairs, %d distinct inputs, %d solver run(s)%s',
                len(I), len(inputs), solver_runs, ' (batched)' if batched else '')
    return ProbMatrix.from_rows(rows, I, solver_runs)


###########
# Privacy #
###########


def check_privacy_coverage(C, I):
    if isinstance(C, ExhaustivePrivacySet) and C.covered_by(I):
        return
    missing = []
    for x, x2, y in C:
        for pair in ((x, y), (x2, y)):
            if pair not in I and pair not in missing:
                missing.append(pair)
    if missing:
        raise CoverageError(
            f'{len(missing)} pair(s) needed by the privacy set are not in the inference set, first {missing[0]}',
            missing=missing)


def _ratio_notes(skipped, unbounded):
    notes = []
    if skipped:
        notes.append(f'skipped {skipped} triple(s) where both probabilities are 0')
        logger.warning('privacy: skipped %d triple(s) with 0/0 likelihood ratio', skipped)
    if unbounded:
        notes.append(f'{unbounded} triple(s) have an output impossible under the neighbour: no finite epsilon')
        logger.warning('privacy: %d triple(s) with unbounded likelihood ratio', unbounded)
    return notes


def max_likelihood_ratio(M, C):
    """(p, witness, notes): the first triple of C maximizing M(x, y) / M(x', y), starting from p = 0"""
    if isinstance(C, ExhaustivePrivacySet) and isinstance(M, ProbMatrix):
        return _exhaustive_likelihood_ratio(M, C)
    p = Fraction(0)
    witness = None
    skipped = 0
    unbounded = 0
    for triple in C:
        x, x2, y = triple
        a, b = M[x, y], M[x2, y]
        if a == 0 and b == 0:
            skipped += 1
            continue
        if b == 0:
            ratio = math.inf
            unbounded += 1
        else:
            ratio = Fraction(a) / Fraction(b)
        if ratio > p:
            p = ratio
            witness = triple
    return p, witness, _ratio_notes(skipped, unbounded)


def _exhaustive_likelihood_ratio(M, C):
    """
    Same scan as max_likelihood_ratio over an exhaustive C, on integer rows indexed by output:
    a/b > pn/pd is tested as an * bd * pd > pn * ad * bn.
    """
    outputs = C.outputs
    rows = dict()
    for x in C.input_domain:
        row = M.rows[x]
        values = [row.get(y, 0) for y in outputs]
        rows[x] = [(v.numerator, v.denominator) if v else (0, 1) for v in values]
    p, pn, pd = Fraction(0), 0, 1
    witness = None
    skipped = 0
    unbounded = 0
    for x in C.input_domain:
        row = rows[x]
        for x2 in C.input_domain.neighbors(x):
            other = rows[x2]
            for j, ((an, ad), (bn, bd)) in enumerate(zip(row, other)):
                if an == 0:
                    if bn == 0:
                        skipped += 1
                    continue
                if bn == 0:
                    unbounded += 1
                    if p != math.inf:
                        p, witness = math.inf, (x, x2, outputs[j])
                    continue
                if p != math.inf and an * bd * pd > pn * ad * bn:
                    p = Fraction(an * bd, ad * bn)
                    pn, pd = p.numerator, p.denominator
                    witness = (x, x2, outputs[j])
    return p, witness, _ratio_notes(skipped, unbounded)


def privacy_bound(m, C, I, batched=False, jobs=1):
    """Tight e^epsilon over the privacy set C, with probabilities from the inference set I"""
    if not isinstance(C, PrivacySet):
        C = PrivacySet(C)
    if not isinstance(I, InferenceSet):
        I = InferenceSet(I)
    check_privacy_coverage(C, I)
    started = time.monotonic()
    M = inference(m, I, batched=batched, jobs=jobs)
    inferred = time.monotonic()
    p, witness, notes = max_likelihood_ratio(M, C)
    done = time.monotonic()
    return PrivacyReport(p=p, witness=witness, solver_runs=M.solver_runs,
                         timings={'inference': inferred - started, 'synthesis': done - inferred}, notes=notes)


############
# Accuracy #
############


def _check_alpha(alpha):
    if isinstance(alpha, bool) or not isinstance(alpha, int) or alpha < 0:
        raise ParameterError(f'alpha must be a non-negative integer, got {alpha!r}')


def _output_domain(m):
    domain = getattr(m, 'output_domain', None)
    if domain is None:
        return m.output_values()
    return list(domain)


def accuracy_window(V, alpha, x, Y):
    """Outputs of Y within alpha of the target V(x)"""
    target = V(x)
    if not isinstance(target, (int, Fraction)):
        raise ValidationError(f'target {target!r} of input {x!r} is not numeric')
    window = []
    for y in Y:
        if not isinstance(y, (int, Fraction)):
            raise ValidationError(f'accuracy needs scalar outputs, got {y!r}')
        if target - alpha <= y <= target + alpha:
            window.append(y)
    return window


def check_accuracy_coverage(A, V, alpha, I, Y):
    missing = []
    for x in A:
        for y in accuracy_window(V, alpha, x, Y):
            if (x, y) not in I:
                missing.append((x, y))
    if missing:
        raise CoverageError(
            f'{len(missing)} pair(s) needed by the accuracy set are not in the inference set, first {missing[0]}',
            missing=missing)


def accuracy_profile(M, A, V, alpha, Y):
    """[(x, sum of M(x, y) over the window of x)] in the order of A"""
    return [(x, sum((M[x, y] for y in accuracy_window(V, alpha, x, Y)), Fraction(0))) for x in A]


def min_success_probability(M, A, V, alpha, Y):
    """(p, witness): the first input of A with the smallest window mass"""
    p = None
    witness = None
    for x, mass in accuracy_profile(M, A, V, alpha, Y):
        if p is None or mass < p:
            p, witness = mass, x
    return p, witness


def _prepare_accuracy(m, A, V, alpha, I):
    _check_alpha(alpha)
    if V is None:
        raise ValidationError('accuracy needs a target map')
    if not isinstance(A, AccuracySet):
        A = AccuracySet(A)
    if len(A) == 0:
        raise ValidationError('accuracy set is empty')
    if not isinstance(I, InferenceSet):
        I = InferenceSet(I)
    Y = _output_domain(m)
    check_accuracy_coverage(A, V, alpha, I, Y)
    return A, I, Y


def accuracy_bound(m, A, V, alpha, I, batched=False, jobs=1):
    """Tight 1 - beta at error alpha over the accuracy set A"""
    A, I, Y = _prepare_accuracy(m, A, V, alpha, I)
    started = time.monotonic()
    M = inference(m, I, batched=batched, jobs=jobs)
    inferred = time.monotonic()
    p, witness = min_success_probability(M, A, V, alpha, Y)
    done = time.monotonic()
    return AccuracyReport(p=p, alpha=alpha, witness=witness, solver_runs=M.solver_runs,
                          timings={'inference': inferred - started, 'synthesis': done - inferred})


def rank_accuracy(m, A, V, alpha, I, k, batched=False, jobs=1):
    """The k inputs of A with the lowest 1 - beta, ascending, ties kept in A's order"""
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise ParameterError(f'k must be a non-negative integer, got {k!r}')
    A, I, Y = _prepare_accuracy(m, A, V, alpha, I)
    M = inference(m, I, batched=batched, jobs=jobs)
    profile = accuracy_profile(M, A, V, alpha, Y)
    return sorted(profile, key=lambda entry: entry[1])[:k]


###################
# Exhaustive sets #
###################


def _guard(size, cap, what):
    if cap is not None and size > cap:
        raise SizeGuardExceeded(f'{what} would hold {size} entries, over the cap of {cap}')


def exhaustive_inference_set(mech, cap=config.DEFAULT_SET_CAP):
    """X^n x Y, enumerated on demand"""
    _guard(len(mech.input_domain) * len(mech.output_domain), cap, 'exhaustive inference set')
    return ExhaustiveInferenceSet(mech.input_domain, mech.output_domain)


def exhaustive_privacy_set(mech, cap=config.DEFAULT_SET_CAP):
    """Every (x, x', y) with x' a neighbour of x, both orders of each pair included"""
    size = len(mech.input_domain) * mech.input_domain.neighbor_count() * len(mech.output_domain)
    _guard(size, cap, 'exhaustive privacy set')
    return ExhaustivePrivacySet(mech.input_domain, mech.output_domain)


def exhaustive_accuracy_set(mech, cap=config.DEFAULT_SET_CAP):
    _guard(len(mech.input_domain), cap, 'exhaustive accuracy set')
    return AccuracySet(mech.input_domain)


##################
# Set validation #
##################


def _all_distributions(mech, m, jobs=1):
    return inference(m, ExhaustiveInferenceSet(mech.input_domain, mech.output_domain), jobs=jobs)


def validate_privacy_set(mech, C, m=None, cap=config.DEFAULT_VALIDATION_CAP, jobs=1):
    """
    Check that C only pairs neighbours and that every likelihood ratio of the exhaustive
    privacy set is realized by some triple of C. Reports the first counterexample.
    """
    size = len(mech.input_domain) * len(mech.output_domain)
    _guard(size, cap, 'privacy set validation')
    if not isinstance(C, PrivacySet):
        C = PrivacySet(C)
    for triple in C:
        x, x2, y = triple
        if x not in mech.input_domain or x2 not in mech.input_domain:
            return SetValidationReport(False, 0, triple, 'input outside the domain')
        if x2 not in set(mech.neighbors(x)):
            return SetValidationReport(False, 0, triple, 'inputs are not neighbours')
        if y not in mech.output_domain:
            return SetValidationReport(False, 0, triple, 'output outside the domain')
    if m is None:
        m = mech.compile()
    M = _all_distributions(mech, m, jobs)

    def ratio(x, x2, y):
        a, b = M[x, y], M[x2, y]
        if a == 0 and b == 0:
            return None
        if b == 0:
            return math.inf
        return a / b

    realized = {ratio(*triple) for triple in C}
    checked = 0
    for x in mech.input_domain:
        for x2 in mech.neighbors(x):
            for y in mech.output_domain:
                value = ratio(x, x2, y)
                if value is None:
                    continue
                checked += 1
                if value not in realized:
                    return SetValidationReport(False, checked, (x, x2, y), 'likelihood ratio not realized')
    return SetValidationReport(True, checked)


def validate_accuracy_set(mech, A, V, alpha, m=None, cap=config.DEFAULT_VALIDATION_CAP, jobs=1):
    """Check that the window mass of every input is realized by some input of A"""
    _check_alpha(alpha)
    size = len(mech.input_domain) * len(mech.output_domain)
    _guard(size, cap, 'accuracy set validation')
    if not isinstance(A, AccuracySet):
        A = AccuracySet(A)
    for x in A:
        if x not in mech.input_domain:
            return SetValidationReport(False, 0, x, 'input outside the domain')
    if m is None:
        m = mech.compile()
    M = _all_distributions(mech, m, jobs)
    Y = list(mech.output_domain)
    realized = {mass for _, mass in accuracy_profile(M, A, V, alpha, Y)}
    checked = 0
    for x, mass in accuracy_profile(M, AccuracySet(mech.input_domain), V, alpha, Y):
        checked += 1
        if mass not in realized:
            return SetValidationReport(False, checked, x, 'accuracy probability not realized')
    return SetValidationReport(True, checked)


###########
# Drivers #
###########


EXHAUSTIVE = 'exhaustive'
RESTRICTED = 'restricted'
MODES = (EXHAUSTIVE, RESTRICTED)


def _mode(mode, available):
    if mode is None:
        return RESTRICTED if available else EXHAUSTIVE
    if mode not in MODES:
        raise ParameterError(f'mode must be one of {MODES}, got {mode!r}')
    if mode == RESTRICTED and not available:
        raise ParameterError('this mechanism has no restricted sets; use exhaustive mode')
    return mode


def synthesize_privacy(mech, mode=None, jobs=1, node_budget=None, set_cap=config.DEFAULT_SET_CAP):
    """
    Compile the mechanism and synthesize its privacy bound.
    Restricted mode uses the mechanism's symmetry sets and one batched solver run.
    Returns (report, compiled model).
    """
    mode = _mode(mode, mech.has_privacy_sets)
    started = time.monotonic()
    m = mech.compile(node_budget=node_budget)
    built = time.monotonic()
    if mode == RESTRICTED:
        I, C = mech.privacy_sets()
    else:
        I, C = exhaustive_inference_set(mech, set_cap), exhaustive_privacy_set(mech, set_cap)
    report = privacy_bound(m, C, I, batched=(mode == RESTRICTED), jobs=jobs)
    timings = dict(report.timings, build=built - started)
    logger.info('privacy of %r (%s): p = %s', mech, mode, report.p)
    return PrivacyReport(p=report.p, witness=report.witness, solver_runs=report.solver_runs,
                         timings=timings, notes=report.notes), m


def synthesize_accuracy(mech, alpha, mode=None, jobs=1, node_budget=None, set_cap=config.DEFAULT_SET_CAP):
    """Compile the mechanism and synthesize its accuracy bound at alpha. Returns (report, compiled model)."""
    if mech.targets is None:
        raise ValidationError(f'{mech.name} has no target map, so accuracy is undefined')
    _check_alpha(alpha)
    mode = _mode(mode, mech.has_accuracy_sets)
    started = time.monotonic()
    m = mech.compile(node_budget=node_budget)
    built = time.monotonic()
    if mode == RESTRICTED:
        I, A = mech.accuracy_sets(alpha)
    else:
        I, A = exhaustive_inference_set(mech, set_cap), exhaustive_accuracy_set(mech, set_cap)
    report = accuracy_bound(m, A, mech.targets, alpha, I, batched=(mode == RESTRICTED), jobs=jobs)
    timings = dict(report.timings, build=built - started)
    logger.info('accuracy of %r at alpha=%d (%s): 1 - beta = %s', mech, alpha, mode, report.p)
    return AccuracyReport(p=report.p, alpha=alpha, witness=report.witness, solver_runs=report.solver_runs,
                          timings=timings, notes=report.notes), m


def rank_inputs(mech, alpha, k, mode=None, jobs=1, node_budget=None, set_cap=config.DEFAULT_SET_CAP):
    """The k inputs with the lowest 1 - beta, as (x, p) pairs"""
    if mech.targets is None:
        raise ValidationError(f'{mech.name} has no target map, so accuracy is undefined')
    mode = _mode(mode, mech.has_accuracy_sets)
    m = mech.compile(node_budget=node_budget)
    if mode == RESTRICTED:
        I, A = mech.accuracy_sets(alpha)
    else:
        I, A = exhaustive_inference_set(mech, set_cap), exhaustive_accuracy_set(mech, set_cap)
    return rank_accuracy(m, A, mech.targets, alpha, I, k, batched=(mode == RESTRICTED), jobs=jobs)

