"""Command-line entry point: ``stabchain <check> [flags] --report out.json``.

Exit status is 0 when every report passes, 1 when one fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import checks
from .fusion import FusionDataError
from .graphs import GraphError, NotUniformlyConnected
from .reports import CheckReport, write_reports
from .stabilization import RegisterMismatch

log = logging.getLogger('stabchain')

DEFAULT_TOL = 1e-8
SEEDED = ('graph-validate', 'alpha-check', 'trace-check', 'expectation')
INPUT_ERRORS = (OSError, GraphError, FusionDataError, NotUniformlyConnected, RegisterMismatch,
                ValueError, KeyError, IndexError)


class InputError(Exception):
    """Bad command line or configuration; maps to exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p, seed=False):
    p.add_argument('--tol', type=float, default=None, help=f'residual tolerance (default {DEFAULT_TOL:g})')
    p.add_argument('--report', type=Path, default=None, help='write the JSON report array here')
    if seed:
        p.add_argument('--seed', type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='stabchain', description='Finite-truncation checks for stabilized anyon chains.')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    p = sub.add_parser('graph-validate', help='net axioms of the path algebra')
    p.add_argument('--graph', required=True)
    p.add_argument('--max-interval', type=int, default=4)
    _common(p, seed=True)

    p = sub.add_parser('haag', help='truncated Haag duality')
    p.add_argument('--graph', required=True)
    p.add_argument('--total', type=int, nargs=2, required=True, metavar=('LO', 'HI'))
    p.add_argument('--inner', type=int, nargs='+', required=True,
                   help='LO HI of an interval, or --sites for an arbitrary finite set')
    p.add_argument('--sites', action='store_true', help='read --inner as a list of sites')
    p.add_argument('--ancilla', type=int, default=None, help='ancilla register dimension per site')
    p.add_argument('--max-spread', type=int, default=0)
    p.add_argument('--margin', type=int, default=None)
    _common(p)

    p = sub.add_parser('factorize', help='exactness of the interleaving bijections')
    p.add_argument('--graph', required=True)
    p.add_argument('--n', type=int, nargs='+', default=[2, 3])
    p.add_argument('--k', type=int, default=1)
    p.add_argument('--D', type=int, nargs='+', default=[1, 2, 3])
    p.add_argument('--max-merge', type=int, default=6, help='largest l, t and D in the merge sweep')
    _common(p)

    p = sub.add_parser('alpha-check', help='homomorphism and spread of the conjugation map')
    p.add_argument('--graph', default='loops:2')
    p.add_argument('--n', type=int, default=2)
    p.add_argument('--k', type=int, default=1)
    p.add_argument('--D', type=int, default=2)
    p.add_argument('--samples', type=int, default=100)
    _common(p, seed=True)

    p = sub.add_parser('trace-check', help='inclusion compatibility of the Markov trace')
    p.add_argument('--graph', nargs='+', default=['fibonacci_graph', 'tadpole_graph', 'skew_graph', 'loops:2'])
    p.add_argument('--max-interval', type=int, default=4)
    p.add_argument('--samples', type=int, default=100)
    _common(p, seed=True)

    p = sub.add_parser('tl-check', help='Temperley-Lieb relations of the Jones projections')
    p.add_argument('--graph', default='fibonacci_graph')
    p.add_argument('--length', type=int, default=5)
    _common(p)

    p = sub.add_parser('expectation', help='conditional expectation onto TL and its Pimsner-Popa basis')
    p.add_argument('--graph', default='fibonacci_graph')
    p.add_argument('--length', type=int, default=4)
    p.add_argument('--samples', type=int, default=8)
    _common(p, seed=True)

    for name, text in (('qsystem', 'Lagrangian Q-system axioms'), ('halfbraid', 'half-braiding identities')):
        p = sub.add_parser(name, help=text)
        p.add_argument('--fusion', required=True, help='fusion JSON file or a shipped name')
        p.add_argument('--labels', nargs='+', default=None, help='summands X of the algebra (default: all)')
        _common(p)

    p = sub.add_parser('pentagon', help='pentagon and unitarity of F-symbols')
    p.add_argument('--fusion', required=True)
    _common(p)

    p = sub.add_parser('suite', help='run the checks listed in a JSON config')
    p.add_argument('--config', type=Path, required=True)
    p.add_argument('--report', type=Path, default=None)
    return parser


def _tol(args, default=DEFAULT_TOL):
    return default if args.tol is None else args.tol


def dispatch(args) -> list[CheckReport]:
    cmd = args.command
    if cmd == 'graph-validate':
        return [checks.check_graph_validate(args.graph, args.max_interval, args.seed, _tol(args))]
    if cmd == 'haag':
        if not args.sites and len(args.inner) != 2:
            raise InputError('--inner takes LO HI; pass --sites for a list of sites')
        inner = args.inner if args.sites else range(args.inner[0], args.inner[1] + 1)
        return [checks.check_haag(args.graph, args.total, inner, args.ancilla, _tol(args),
                                  args.max_spread, args.margin)]
    if cmd == 'factorize':
        return [checks.check_phi_psi(args.max_merge, args.max_merge, args.max_merge),
                checks.check_factorize(args.graph, args.n, args.k, args.D)]
    if cmd == 'alpha-check':
        return [checks.check_alpha(args.graph, args.n, args.k, args.D, args.samples, args.seed, _tol(args))]
    if cmd == 'trace-check':
        return [checks.check_trace(args.graph, args.max_interval, args.samples, args.seed, _tol(args))]
    if cmd == 'tl-check':
        return [checks.check_tl(args.graph, args.length, _tol(args))]
    if cmd == 'expectation':
        return [checks.check_expectation(args.graph, args.length, args.seed, _tol(args), samples=args.samples)]
    if cmd == 'qsystem':
        return [checks.check_qsystem(args.fusion, args.labels, _tol(args))]
    if cmd == 'halfbraid':
        return [checks.check_halfbraid(args.fusion, args.labels, _tol(args))]
    if cmd == 'pentagon':
        return [checks.check_pentagon(args.fusion, _tol(args, 1e-10))]
    if cmd == 'suite':
        return run_suite(args.config)
    raise InputError(f'unknown command {cmd!r}')


def suite_argv(entry: dict, seed: int | None) -> list[str]:
    """Translate one config entry into command-line tokens."""
    if not isinstance(entry, dict) or 'check' not in entry:
        raise InputError(f'suite entry must be an object with a "check" key: {entry!r}')
    argv = [str(entry['check'])]
    if argv[0] == 'suite':
        raise InputError('suites cannot nest')
    for key, value in entry.items():
        if key in ('check', 'report'):
            continue
        flag = '--' + key.replace('_', '-') if key not in ('n', 'k', 'D') else '--' + key
        if value is True:
            argv.append(flag)
        elif value is False or value is None:
            continue
        elif isinstance(value, (list, tuple)):
            argv += [flag] + [str(v) for v in value]
        else:
            argv += [flag, str(value)]
    if seed is not None and 'seed' not in entry and argv[0] in SEEDED:
        argv += ['--seed', str(seed)]
    return argv


def run_suite(config_path: Path) -> list[CheckReport]:
    try:
        config = json.loads(Path(config_path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as err:
        raise InputError(f'malformed config: {err}') from err
    if not isinstance(config, dict) or not isinstance(config.get('checks', None), list):
        raise InputError('config must be an object with a "checks" list')
    entries = config['checks']
    if not entries:
        log.warning('suite config lists no checks')
        return []
    seed = config.get('seed')
    parser = build_parser()
    parsed = []
    for entry in entries:
        argv = suite_argv(entry, seed)
        parsed.append(parser.parse_args(argv))
    reports = []
    for args in parsed:
        reports.extend(dispatch(args))
    return reports


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format='%(levelname)s %(message)s', stream=sys.stderr)
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('-h', '--help'):
        parser.print_help()
        return 0 if argv else 2
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        reports = dispatch(args)
    except InputError as err:
        log.error('%s', err)
        return 2
    except INPUT_ERRORS as err:
        log.error('input error: %s', err)
        return 2
    for rep in reports:
        log.info('%s (%d ms)', rep.summary(), rep.elapsed_ms)
        for w in rep.warnings:
            log.warning('%s: %s', rep.check, w)
    if args.report is not None:
        try:
            write_reports(reports, args.report)
        except OSError as err:
            log.error('cannot write report: %s', err)
            return 2
    return 0 if all(r.passed for r in reports) else 1


if __name__ == '__main__':
    sys.exit(main())
