#!/usr/bin/env python3

"""
Command line front end: exact verification and search of Darboux polynomials, the graded cascade,
the generator table audit, the integral identity suite and trajectory checks.

Exit status is 0 on success, 1 when the mathematics says no (an invalid verification, an
obstructed cascade, a flagged drift) and 2 on a usage error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from fndarboux.darboux_exceptions import *
from fndarboux.expr import parse, parse_rational, substitute, to_string, to_json
from fndarboux.field import VectorField, fn_system, assistant_system, scaled_system
from fndarboux.params import ParamPoint
from fndarboux import calculus, darboux, graded, numeric


logger = logging.getLogger(__name__)

COMMANDS = ('verify', 'cofactor', 'search', 'first-integrals', 'cascade', 'table1', 'appendix',
            'simulate', 'drift', 'parse')

_INT_KEYS = {'deg', 'threads', 'seed', 'weight', 'verbose'}
_FLOAT_KEYS = {'step', 't_end', 'x0', 'y0', 'z0'}
_BOOL_KEYS = {'json'}
_LIST_KEYS = {'cofactor'}

DEFAULTS = {
    'deg': 4, 'seed': 0, 'step': 1e-4, 't_end': 0.5, 'system': None, 'json': False,
    'k0': '0', 'k1': '0', 'verbose': 0,
}


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    for name in ('a', 'b', 'c', 'd', 'm'):
        common.add_argument('--' + name, help='parameter {:s} as exact rational p/q'.format(name))
    common.add_argument('--deg', type=int, help='degree bound for search (default 4)')
    common.add_argument('--cofactor', action='append',
                        help='cofactor expression; repeat to give several search candidates')
    common.add_argument('--json', action='store_const', const=True,
                        help='write JSON to stdout instead of text')
    common.add_argument('--threads', type=int,
                        help='worker processes (default $DARBOUX_THREADS or 1)')
    common.add_argument('--seed', type=int, help='seed for random initial states (default 0)')
    common.add_argument('--step', type=float, help='integration step (default 1e-4)')
    common.add_argument('--t-end', type=float, dest='t_end', help='horizon (default 0.5)')
    common.add_argument('--out', help='CSV file for trajectory output')
    common.add_argument('--config', help='file of key = value lines; flags win')
    common.add_argument('-v', '--verbose', action='count',
                        help='log INFO to stderr, twice for DEBUG')
    common.add_argument('--f', help='polynomial expression')
    common.add_argument('--f0', help='top component for the cascade (default 1/2*x^4 - z^2)')
    common.add_argument('--k0', help='constant part of the cascade cofactor')
    common.add_argument('--k1', help='x coefficient of the cascade cofactor')
    common.add_argument('--weight', type=int, help='weight of the cascade top component')
    for name in ('x0', 'y0', 'z0'):
        common.add_argument('--' + name, type=float, help='initial ' + name[0])
    common.add_argument('--system', choices=('fn', 'assistant', 'scaled', 'user'),
                        help='vector field (default fn, or user when --P is given)')
    for name in ('P', 'Q', 'R'):
        common.add_argument('--' + name, help='component {:s} of a user field'.format(name))
    common.add_argument('--expr', help='expression for the parse command')
    return common


def build_parser():
    parser = argparse.ArgumentParser(
        prog='fn-darboux',
        description='Darboux polynomials of the FitzHugh-Nagumo travelling-wave system')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    common = _common_parser()
    helps = {
        'verify': 'check X(f) = k f exactly',
        'cofactor': 'recover the cofactor of f by exact division',
        'search': 'all Darboux polynomials up to --deg at a parameter point',
        'first-integrals': 'polynomial first integrals up to --deg',
        'cascade': 'run the weight-graded cascade from --f0',
        'table1': 'verify the six generators and audit the row 3 and 4 conditions',
        'appendix': 'check the integral reduction identities by differentiation',
        'simulate': 'integrate the field from (x0, y0, z0)',
        'drift': 'compare f along a trajectory with the transport law',
        'parse': 'print an expression in canonical form',
    }
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def _convert(key, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise UsageError('config key {:s}: bad value \'{:s}\''.format(key, value)) from None
    if key in _BOOL_KEYS:
        if value.lower() not in ('true', 'false', '1', '0', 'yes', 'no'):
            raise UsageError('config key {:s}: bad value \'{:s}\''.format(key, value))
        return value.lower() in ('true', '1', 'yes')
    if key in _LIST_KEYS:
        return [value]
    return value


def apply_config(args, path):
    """Fills options still unset from a key = value file."""
    try:
        with open(path, encoding='utf-8') as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise UsageError('--config: cannot read {:s}: {:s}'.format(path, e.strerror)) from None
    known = set(vars(args)) - {'command', 'config'}
    for number, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise UsageError('--config {:s} line {:d}: expected key = value'.format(path, number))
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.replace('-', '_')
        if key not in known:
            raise UsageError('--config {:s} line {:d}: unknown key \'{:s}\''.format(
                path, number, key))
        if getattr(args, key) is None:
            setattr(args, key, _convert(key, value))


def apply_defaults(args):
    for key, value in DEFAULTS.items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    if args.threads is None:
        env = os.environ.get('DARBOUX_THREADS')
        try:
            args.threads = int(env) if env else 1
        except ValueError:
            raise UsageError('DARBOUX_THREADS must be an integer, got \'{:s}\''.format(
                env)) from None
    if args.system is None:
        args.system = 'user' if args.P is not None else 'fn'


####################################################################################################


def _flag_rational(args, name):
    value = getattr(args, name)
    if value is None:
        return None
    try:
        return parse_rational(value)
    except ExprRationalError:
        raise UsageError('--{:s}: expected exact rational p/q, got \'{:s}\''.format(
            name, value)) from None


def _flag_poly(args, name, required=True):
    value = getattr(args, name)
    if value is None:
        if required:
            raise UsageError('--{:s} is required'.format(name))
        return None
    try:
        return parse(value)
    except ExprException as e:
        raise UsageError('--{:s}: {}'.format(name, e)) from None


def _params(args, required=True):
    values = {name: _flag_rational(args, name) for name in ('a', 'b', 'c', 'd', 'm')}
    missing = [name for name in ('a', 'b', 'c', 'd') if values[name] is None]
    if missing:
        if required:
            raise UsageError('missing parameter flag(s) {:s}'.format(
                ', '.join('--' + name for name in missing)))
        return None, values
    return ParamPoint(values['a'], values['b'], values['c'], values['d'],
                      values['m'] if values['m'] is not None else 0), values


def _field(args):
    if args.system == 'user':
        P, Q, R = (_flag_poly(args, name) for name in ('P', 'Q', 'R'))
        return VectorField(P, Q, R, 'user')
    return {'fn': fn_system, 'assistant': assistant_system, 'scaled': scaled_system}[
        args.system]()


def _single_cofactor(args, default=None):
    if not args.cofactor:
        if default is None:
            raise UsageError('--cofactor is required')
        return parse(default)
    if len(args.cofactor) > 1:
        raise UsageError('--cofactor given {:d} times, expected once'.format(len(args.cofactor)))
    try:
        return darboux.Cofactor(args.cofactor[0]).k
    except ExprException as e:
        raise UsageError('--cofactor: {}'.format(e)) from None
    except CertificateException as e:
        raise UsageError('--cofactor: {}'.format(e)) from None


def _emit(args, obj, text):
    if args.json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def _initial_state(args):
    rng = np.random.default_rng(args.seed)
    guess = rng.uniform(-1.0, 1.0, 3)
    values = [v if v is not None else float(g) for v, g in zip((args.x0, args.y0, args.z0),
                                                                  guess)]
    return numeric.State(*values)


####################################################################################################


def cmd_verify(args):
    f = _flag_poly(args, 'f')
    k = _single_cofactor(args)
    _, values = _params(args, required=False)
    constraints = darboux.ParamConstraint([(name, v) for name, v in values.items()
                                           if v is not None], label='flags')
    result = darboux.verify(f, k, _field(args), constraints)
    _emit(args, result.to_json(),
          'valid' if result.valid else 'invalid, residual {:s}'.format(
              to_string(result.residual)))
    return 0 if result.valid else 1


def cmd_cofactor(args):
    f = _flag_poly(args, 'f')
    _, values = _params(args, required=False)
    given = {name: v for name, v in values.items() if v is not None}
    V = _field(args).substitute(given)
    f = substitute(f, given)
    try:
        k = darboux.solve_cofactor(f, V)
    except NotDarbouxError as e:
        _emit(args, {'darboux': False, 'reason': e.reason}, str(e))
        return 1
    _emit(args, {'darboux': True, 'cofactor': str(k)}, 'cofactor {:s}'.format(str(k)))
    return 0


def _candidates(args, params):
    if args.cofactor:
        try:
            return [darboux.Cofactor(k).k for k in args.cofactor]
        except (ExprException, CertificateException) as e:
            raise UsageError('--cofactor: {}'.format(e)) from None
    if args.system == 'user':
        raise UsageError('--cofactor is required for a user field; the default candidates are '
                         'only complete for the FitzHugh-Nagumo system')
    return darboux.fn_cofactor_candidates(params.c, args.deg)


def cmd_search(args):
    params, _ = _params(args)
    if args.deg < 1:
        raise UsageError('--deg must be at least 1')
    results = darboux.search(_field(args), args.deg, _candidates(args, params), params,
                             args.threads)
    if not results:
        text = 'no Darboux polynomials found'
    else:
        lines = []
        for result in results:
            lines.append('cofactor {:s}: dimension {:d}'.format(to_string(result.k),
                                                                len(result.basis)))
            lines += ['  {:s}'.format(to_string(f)) for f in result.basis]
        text = '\n'.join(lines)
    _emit(args, {'params': params.to_json(), 'degree': args.deg,
                 'results': [r.to_json() for r in results]}, text)
    return 0


def cmd_first_integrals(args):
    params, _ = _params(args)
    basis = darboux.first_integrals(_field(args), args.deg, params, args.threads)
    if basis:
        text = '\n'.join(to_string(f) for f in basis)
    else:
        text = 'no polynomial first integrals up to degree {:d}'.format(args.deg)
    _emit(args, {'params': params.to_json(), 'degree': args.deg,
                 'first_integrals': [to_string(f) for f in basis]}, text)
    return 0


def cmd_cascade(args):
    params, _ = _params(args)
    F0 = _flag_poly(args, 'f0', required=False)
    if F0 is None:
        F0 = parse('1/2*x^4 - z^2')
    k0 = _flag_rational(args, 'k0')
    k1 = _flag_rational(args, 'k1')
    state = graded.cascade(F0, params, k0, k1, args.weight)
    _emit(args, state.to_json(), state.trace())
    return 0 if state.completed else 1


def cmd_table1(args):
    certificates, report = darboux.table1_certificates()
    _emit(args, {'certificates': [cert.to_json() for cert in certificates],
                 'discrepancies': report},
          darboux.render_table1(certificates, report))
    return 0 if all(cert.valid for cert in certificates) else 1


def cmd_appendix(args):
    report = calculus.appendix_suite(threads=args.threads)
    _emit(args, report.to_json(), report.render())
    return 0 if not report.failed else 1


def cmd_simulate(args):
    params, _ = _params(args)
    s0 = _initial_state(args)
    traj = numeric.integrate(_field(args), s0, args.t_end, args.step, params)
    if args.out:
        numeric.write_csv(args.out, np.column_stack([traj.times, traj.states]),
                          ('t', 'x', 'y', 'z'))
    final = traj.final()
    _emit(args, {'steps': len(traj) - 1, 'completed': traj.completed,
                 'initial': [s0.x, s0.y, s0.z], 'final': [final.t, final.x, final.y, final.z]},
          '{:d} steps, t = {:.6g}: (x, y, z) = ({:.12g}, {:.12g}, {:.12g}){:s}'.format(
              len(traj) - 1, final.t, final.x, final.y, final.z,
              '' if traj.completed else ' (diverged)'))
    return 0 if traj.completed else 1


def cmd_drift(args):
    params, _ = _params(args)
    f = _flag_poly(args, 'f')
    k = _single_cofactor(args, default='0')
    s0 = _initial_state(args)
    report = numeric.darboux_drift(_field(args), f, k, s0, args.t_end, args.step, params)
    if args.out:
        rows = [(t, s[0], s[1], s[2], fv, pv) for (t, fv, pv), s in
                zip(report.samples, report.trajectory.states)]
        numeric.write_csv(args.out, rows)
    flagged = report.flagged()
    _emit(args, {'max_relative_error': report.max_relative_error,
                 'max_abs_error': report.max_abs_error, 'flagged': flagged},
          'max relative error {:.3e}{:s}'.format(report.max_relative_error,
                                                 ' (flagged)' if flagged else ''))
    return 1 if flagged else 0


def cmd_parse(args):
    p = _flag_poly(args, 'expr')
    _emit(args, to_json(p), to_string(p))
    return 0


HANDLERS = {
    'verify': cmd_verify, 'cofactor': cmd_cofactor, 'search': cmd_search,
    'first-integrals': cmd_first_integrals, 'cascade': cmd_cascade, 'table1': cmd_table1,
    'appendix': cmd_appendix, 'simulate': cmd_simulate, 'drift': cmd_drift, 'parse': cmd_parse,
}


def main(argv=None):

    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            apply_config(args, args.config)
        apply_defaults(args)
        level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
        logging.basicConfig(level=level, stream=sys.stderr,
                            format='%(levelname)s %(name)s: %(message)s')
        return HANDLERS[args.command](args)
    except (UsageError, CertificateException, CascadePreconditionError) as e:
        print('error: {}'.format(e), file=sys.stderr)
        return 2
    except DarbouxException as e:
        print('error: {}'.format(e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
