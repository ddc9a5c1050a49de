"""
dpbound command line: privacy and accuracy bounds of built-in mechanisms or .dpp programs.

Every report is built in full before anything is printed; errors go to stderr with the
exit code of their category (2 for validation and coverage, 3 for resource caps).
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from fractions import Fraction

from dpbound import compiler, config, mechanisms, synthesis
from dpbound.error_code import DpBoundError, ParameterError, SizeGuardExceeded
from dpbound.lang.parser import parse_file
from dpbound.version import __version__

logger = logging.getLogger(__name__)

MECHANISMS = ('rr', 'rrcount', 'above')
DEFAULT_GRID = tuple(Fraction(i, 10) for i in range(1, 10))


##############
# Formatting #
##############


def exact(value):
    """Canonical 'num/den' text of a rational; 'inf' for an unbounded ratio"""
    if value is None:
        return None
    if value == math.inf:
        return 'inf'
    value = Fraction(value)
    return f'{value.numerator}/{value.denominator}'


def approx(value):
    if value is None:
        return None
    if value == math.inf:
        return 'inf'
    return float(value)


def format_input(x):
    """Compact text of an input vector: '0110' for bits, '1,0,2' otherwise"""
    if isinstance(x, (tuple, list)):
        if all(isinstance(v, int) and v in (0, 1) for v in x):
            return ''.join(str(v) for v in x)
        return ','.join(format_input(v) for v in x)
    return str(x)


def _plain(value):
    """JSON-ready copy: tuples become lists, rationals become 'num/den'"""
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, Fraction):
        return exact(value)
    if isinstance(value, float) and math.isinf(value):
        return 'inf'
    return value


def _csv(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _render(record, fmt):
    if fmt == 'json':
        return json.dumps(_plain(record), indent=2)
    plain = _plain(record)
    header = list(plain.keys())
    row = [json.dumps(v) if isinstance(v, (list, dict)) else v for v in plain.values()]
    return _csv(header, [row])


def _render_rows(header, rows, fmt):
    if fmt == 'json':
        return json.dumps([_plain(dict(zip(header, row))) for row in rows], indent=2)
    return _csv(header, [[v if not isinstance(v, (list, tuple)) else json.dumps(_plain(v)) for v in _plain(row)]
                         for row in rows])


#############
# Arguments #
#############


def rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f'{text!r} is not a rational number such as 1/5')


def rational_list(text):
    return [rational(item) for item in text.split(',') if item.strip()]


def make_mechanism(args):
    if getattr(args, 'program', None):
        return mechanisms.from_program(parse_file(args.program), name=args.program)
    if args.mech == 'rr':
        return mechanisms.rr(args.n, args.lam)
    if args.mech == 'rrcount':
        return mechanisms.rrcount(args.n, args.lam)
    return mechanisms.above_threshold(args.n, args.k, args.threshold, args.lambda1, args.lambda2)


def _base_record(command, mech, mode):
    return {
        'command': command,
        'mechanism': mech.name,
        'params': dict(mech.params),
        'mode': mode,
    }


def _model_stats(m):
    return {'bdd_size': m.stats.get('conditioned_size'), 'bdd_full_size': m.stats.get('full_size')}


############
# Commands #
############


def cmd_privacy(args):
    mech = make_mechanism(args)
    report, m = synthesis.synthesize_privacy(mech, mode=args.mode, jobs=args.jobs)
    record = _base_record('privacy', mech, args.mode or _default_mode(mech, 'privacy'))
    record.update({
        'p': exact(report.p),
        'p_float': approx(report.p),
        'epsilon': report.epsilon,
        'witness': report.witness,
        'solver_runs': report.solver_runs,
    })
    record.update(_model_stats(m))
    record['timings'] = report.timings
    record['notes'] = report.notes
    return _render(record, args.format)


def cmd_accuracy(args):
    mech = make_mechanism(args)
    report, m = synthesis.synthesize_accuracy(mech, args.alpha, mode=args.mode, jobs=args.jobs)
    record = _base_record('accuracy', mech, args.mode or _default_mode(mech, 'accuracy'))
    record.update({
        'alpha': report.alpha,
        'p': exact(report.p),
        'p_float': approx(report.p),
        'beta': exact(report.beta),
        'witness': report.witness,
        'solver_runs': report.solver_runs,
    })
    record.update(_model_stats(m))
    record['timings'] = report.timings
    return _render(record, args.format)


def cmd_rank(args):
    mech = make_mechanism(args)
    ranking = synthesis.rank_inputs(mech, args.alpha, args.top, mode=args.mode, jobs=args.jobs)
    rows = [(format_input(x), exact(p), float(p)) for x, p in ranking]
    return _render_rows(('input', 'one_minus_beta_exact', 'one_minus_beta_float'), rows, args.format)


def cmd_sweep(args):
    """e^epsilon of the mechanism, and 1 - beta of the counting mechanism when alpha is given, per lambda"""
    if args.mech == 'above' or getattr(args, 'program', None):
        raise ParameterError('sweep varies lambda of rr or rrcount')
    grid = args.lambdas or list(DEFAULT_GRID)
    for lam in grid:
        if not 0 < lam < 1:
            raise ParameterError(f'every lambda of the grid must lie in (0, 1), got {exact(lam)}')
    rows = []
    for lam in grid:
        mech = mechanisms.rr(args.n, lam) if args.mech == 'rr' else mechanisms.rrcount(args.n, lam)
        privacy, _ = synthesis.synthesize_privacy(mech, jobs=args.jobs)
        accuracy = None
        if args.alpha is not None:
            accuracy, _ = synthesis.synthesize_accuracy(mechanisms.rrcount(args.n, lam), args.alpha, jobs=args.jobs)
        rows.append((
            exact(lam), float(lam),
            exact(privacy.p), approx(privacy.p),
            exact(accuracy.p) if accuracy else None, approx(accuracy.p) if accuracy else None,
        ))
    header = ('lambda', 'lambda_float', 'e_eps_exact', 'e_eps_float',
              'one_minus_beta_exact', 'one_minus_beta_float')
    return _render_rows(header, rows, args.format if args.format_given else 'csv')


def _wmc_timings(mech, m):
    """Seconds for one Pr[A(x) = y] query in exact and in float64 counting, at the first x and y"""
    x, y = mech.input_domain.first(), mech.output_domain.first()
    timings = []
    for exact_mode in (True, False):
        started = time.monotonic()
        compiler.prob_of(m, x, y, exact=exact_mode)
        timings.append(time.monotonic() - started)
    return timings


def cmd_bench(args):
    """Sizes, solver runs and phase timings over a range of n, for each mode"""
    modes = [args.mode] if args.mode else list(synthesis.MODES)
    sizes = range(args.n_min, args.n_max + 1)
    if args.mode == synthesis.EXHAUSTIVE and args.n_max > args.max_exhaustive_n:
        raise SizeGuardExceeded(
            f'exhaustive bench stops at n={args.max_exhaustive_n}; lower --n-max or raise --max-exhaustive-n')
    rows = []
    for n in sizes:
        args.n = n
        mech = make_mechanism(args)
        accuracy = mech.targets is not None and args.alpha is not None
        for mode in modes:
            available = mech.has_accuracy_sets if accuracy else mech.has_privacy_sets
            if mode == synthesis.RESTRICTED and not available:
                logger.info('bench: %s has no restricted sets, skipping', mech.name)
                continue
            if mode == synthesis.EXHAUSTIVE and n > args.max_exhaustive_n:
                logger.info('bench: exhaustive mode stops at n=%d', args.max_exhaustive_n)
                continue
            started = time.monotonic()
            if accuracy:
                report, m = synthesis.synthesize_accuracy(mech, args.alpha, mode=mode, jobs=args.jobs)
            else:
                report, m = synthesis.synthesize_privacy(mech, mode=mode, jobs=args.jobs)
            rows.append((
                mech.name, n, mode, exact(report.p), approx(report.p), report.solver_runs,
                m.stats['conditioned_size'], m.stats['full_size'],
                report.timings.get('build'), report.timings.get('inference'), report.timings.get('synthesis'),
                time.monotonic() - started, *_wmc_timings(mech, m),
            ))
    header = ('mechanism', 'n', 'mode', 'p_exact', 'p_float', 'solver_runs', 'bdd_size', 'bdd_full_size',
              'build_time', 'inference_time', 'synthesis_time', 'total_time', 'wmc_exact_time', 'wmc_float_time')
    return _render_rows(header, rows, args.format)


def cmd_infer(args):
    """Dump the probability matrix of the inference set of the chosen mode"""
    mech = make_mechanism(args)
    mode = args.mode or _default_mode(mech, 'privacy')
    m = mech.compile()
    if mode == synthesis.RESTRICTED:
        if args.alpha is not None and mech.has_accuracy_sets:
            I, _ = mech.accuracy_sets(args.alpha)
        else:
            I, _ = mech.privacy_sets()
        M = synthesis.inference(m, I, batched=True)
    else:
        I = synthesis.exhaustive_inference_set(mech)
        M = synthesis.inference(m, I, jobs=args.jobs)
    rows = [(format_input(x), format_input(y), exact(p), float(p)) for (x, y), p in M.items()]
    logger.info('infer: %d entries, %d solver run(s)', len(rows), M.solver_runs)
    return _render_rows(('input', 'output', 'p_exact', 'p_float'), rows, args.format)


def _default_mode(mech, kind):
    available = mech.has_privacy_sets if kind == 'privacy' else mech.has_accuracy_sets
    return synthesis.RESTRICTED if available else synthesis.EXHAUSTIVE


COMMANDS = {
    'privacy': cmd_privacy,
    'accuracy': cmd_accuracy,
    'rank': cmd_rank,
    'sweep': cmd_sweep,
    'bench': cmd_bench,
    'infer': cmd_infer,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--mech', choices=MECHANISMS, default='rr')
    common.add_argument('--program', metavar='FILE', help='run a .dpp program with exhaustive sets')
    common.add_argument('--n', type=int, default=2)
    common.add_argument('--lambda', dest='lam', type=rational, default=Fraction(1, 5))
    common.add_argument('--alpha', type=int, default=None)
    common.add_argument('--k', type=int, default=3, help='largest query value of above')
    common.add_argument('--threshold', type=int, default=1)
    common.add_argument('--lambda1', type=rational, default=Fraction(1, 2))
    common.add_argument('--lambda2', type=rational, default=Fraction(1, 2))
    common.add_argument('--mode', choices=synthesis.MODES, default=None,
                        help='default: restricted when the mechanism has symmetry sets')
    common.add_argument('--jobs', type=int, default=config.default_jobs())
    common.add_argument('--format', choices=('json', 'csv'), default=None)
    common.add_argument('-v', '--verbose', action='count', default=0)

    parser = argparse.ArgumentParser(prog='dpbound', description='Exact privacy and accuracy bounds')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('privacy', parents=[common], help='tight e^epsilon')
    accuracy = sub.add_parser('accuracy', parents=[common], help='tight 1 - beta at alpha')
    rank = sub.add_parser('rank', parents=[common], help='inputs with the lowest 1 - beta')
    rank.add_argument('--top', type=int, default=4, metavar='K',
                      help='number k of lowest inputs to list (--k is the query range of above)')
    sweep = sub.add_parser('sweep', parents=[common], help='bounds over a grid of lambda')
    sweep.add_argument('--lambdas', type=rational_list, default=None, help='comma separated, e.g. 1/10,1/5')
    bench = sub.add_parser('bench', parents=[common], help='sizes, solver runs and timings over n')
    bench.add_argument('--n-min', type=int, default=2)
    bench.add_argument('--n-max', type=int, default=8)
    bench.add_argument('--max-exhaustive-n', type=int, default=config.DEFAULT_BENCH_MAX_N)
    sub.add_parser('infer', parents=[common], help='dump the probability matrix')
    for p in (accuracy, rank):
        p.set_defaults(alpha_required=True)
    return parser


def configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    args.format_given = args.format is not None
    if args.format is None:
        args.format = 'csv' if args.command in ('rank', 'sweep', 'bench') else 'json'
    try:
        if getattr(args, 'alpha_required', False) and args.alpha is None:
            raise ParameterError(f'{args.command} needs --alpha')
        if args.jobs < 1:
            raise ParameterError(f'--jobs must be at least 1, got {args.jobs}')
        output = COMMANDS[args.command](args)
    except DpBoundError as e:
        print(f'dpbound: error: {e.message}', file=sys.stderr)
        return e.exit_code
    print(output)
    return 0


if __name__ == '__main__':
    sys.exit(main())
