"""Differential field used to check the integral reduction identities by differentiation.

Elements live in Q(sqrt2)(u, w)[sqrtQ] with Q = u^4/2 - 2w, extended by the three transcendental
integrals

    A = int du / sqrtQ,    B = int u^2 du / sqrtQ,    C = int u du / sqrtQ

and by logarithms of algebraic elements. Differentiation is with respect to u; w is a constant. An
identity int g du = F holds when d/du F - g normalizes to zero.
"""


import json
import logging
import math
import multiprocessing
import os
import re

from scipy.integrate import quad
from sympy import sqrt, Rational
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring

from fndarboux.darboux_exceptions import *


__all__ = ['Q2', 'SQRT2', 'URING', 'q2', 'RatFunc', 'QuadElem', 'DiffElem', 'IdentityResult',
           'AppendixReport', 'parse_manifest_expr', 'load_manifest', 'd_du', 'check_identity',
           'quadrature_check', 'appendix_suite', 'MANIFEST_PATH']


logger = logging.getLogger(__name__)


Q2 = QQ.algebraic_field(sqrt(2))
SQRT2 = Q2.from_sympy(sqrt(2))
URING, u, w = ring('u,w', Q2, lex)

MANIFEST_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'appendix.json')


def q2(p, q=0):
    """The element p + q sqrt2 for rationals p, q."""
    return Q2.from_sympy(Rational(p)) + Q2.from_sympy(Rational(q)) * SQRT2


def _poly(value):
    if hasattr(value, 'ring'):
        return value
    if isinstance(value, int):
        return URING.ground_new(q2(value))
    return URING.ground_new(value)


####################################################################################################


class RatFunc:
    """num / den over Q(sqrt2)[u, w]; equality is by cross multiplication."""

    __slots__ = ('num', 'den')

    def __init__(self, num, den=1):
        num, den = _poly(num), _poly(den)
        if not den:
            raise ZeroDivisionError('RatFunc with zero denominator')
        self.num = num
        self.den = den

    @classmethod
    def zero(cls):
        return cls(URING.zero)

    @classmethod
    def one(cls):
        return cls(URING.one)

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        return self.num * other.den == other.num * self.den

    def __add__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        if not self.num or not other.num:
            return RatFunc.zero()
        if self.den == other.num:
            return RatFunc(self.num, other.den)
        if self.num == other.den:
            return RatFunc(other.num, self.den)
        return RatFunc(self.num * other.num, self.den * other.den)

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError('inverse of zero RatFunc')
        return RatFunc(self.den, self.num)

    def diff(self):
        if self.den.is_ground:
            return RatFunc(self.num.diff(u), self.den)
        return RatFunc(self.num.diff(u) * self.den - self.num * self.den.diff(u), self.den**2)

    def evaluate(self, uv, wv):
        return _eval_poly(self.num, uv, wv) / _eval_poly(self.den, uv, wv)

    def __str__(self):
        if self.den == URING.one:
            return str(self.num.as_expr())
        return '({})/({})'.format(self.num.as_expr(), self.den.as_expr())


def _eval_poly(p, uv, wv):
    total = 0.0
    for (i, j), coeff in p.iterterms():
        total += float(Q2.to_sympy(coeff)) * uv**i * wv**j
    return total


Q_POLY = URING.ground_new(q2(Rational(1, 2))) * u**4 - 2 * w


class QuadElem:
    """r + s sqrtQ with RatFunc r, s; sqrtQ^2 is always rewritten to Q."""

    __slots__ = ('r', 's')

    def __init__(self, r=None, s=None):
        self.r = r if isinstance(r, RatFunc) else RatFunc(URING.zero if r is None else r)
        self.s = s if isinstance(s, RatFunc) else RatFunc(URING.zero if s is None else s)

    @classmethod
    def sqrt_q(cls):
        return cls(None, RatFunc.one())

    def __bool__(self):
        return bool(self.r) or bool(self.s)

    def __eq__(self, other):
        return not (self - other)

    def __add__(self, other):
        return QuadElem(self.r + other.r, self.s + other.s)

    def __neg__(self):
        return QuadElem(-self.r, -self.s)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        r = self.r * other.r + self.s * other.s * RatFunc(Q_POLY)
        s = self.r * other.s + self.s * other.r
        return QuadElem(r, s)

    def inverse(self):
        """(r - s sqrtQ) / (r^2 - s^2 Q)."""
        norm = self.r * self.r - self.s * self.s * RatFunc(Q_POLY)
        if not norm:
            raise NonAlgebraicOperationError('element {} has no inverse'.format(self))
        inv = norm.inverse()
        return QuadElem(self.r * inv, -self.s * inv)

    def diff(self):
        # d sqrtQ = u^3 sqrtQ / Q
        return QuadElem(self.r.diff(), self.s.diff() + self.s * RatFunc(u**3, Q_POLY))

    def evaluate(self, uv, wv):
        value = self.r.evaluate(uv, wv)
        if self.s:
            value += self.s.evaluate(uv, wv) * math.sqrt(_eval_poly(Q_POLY, uv, wv))
        return value

    def __str__(self):
        if not self.s:
            return str(self.r)
        if not self.r:
            return '({})*sqrtQ'.format(self.s)
        return '{} + ({})*sqrtQ'.format(self.r, self.s)


SLOTS = ('1', 'A', 'B', 'C')

# derivatives of A, B, C
_SLOT_DIFF = {
    'A': QuadElem(None, RatFunc(URING.one, Q_POLY)),
    'B': QuadElem(None, RatFunc(u**2, Q_POLY)),
    'C': QuadElem(None, RatFunc(u, Q_POLY)),
}


class DiffElem:
    """c_1 + c_A A + c_B B + c_C C + sum coef ln(arg) with QuadElem coefficients and arguments."""

    def __init__(self, slots=None, logs=None):
        self.slots = {name: QuadElem() for name in SLOTS}
        if slots:
            self.slots.update(slots)
        self.logs = list(logs or [])

    @classmethod
    def algebraic(cls, q):
        return cls({'1': q})

    @classmethod
    def constant(cls, value):
        return cls.algebraic(QuadElem(RatFunc(URING.ground_new(value))))

    @classmethod
    def transcendental(cls, name):
        return cls({name: QuadElem(RatFunc.one())})

    @classmethod
    def log(cls, arg):
        return cls(logs=[(QuadElem(RatFunc.one()), arg)])

    def is_algebraic(self):
        return not any(self.slots[name] for name in SLOTS[1:]) and not self._combined_logs()

    def _combined_logs(self):
        combined = []
        for coef, arg in self.logs:
            for i, (other_coef, other_arg) in enumerate(combined):
                if other_arg == arg:
                    combined[i] = (other_coef + coef, other_arg)
                    break
            else:
                combined.append((coef, arg))
        return [(coef, arg) for coef, arg in combined if coef]

    def __bool__(self):
        return any(self.slots[name] for name in SLOTS) or bool(self._combined_logs())

    def __add__(self, other):
        return DiffElem({name: self.slots[name] + other.slots[name] for name in SLOTS},
                        self.logs + other.logs)

    def __neg__(self):
        return DiffElem({name: -q for name, q in self.slots.items()},
                        [(-coef, arg) for coef, arg in self.logs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, q):
        return DiffElem({name: self.slots[name] * q for name in SLOTS},
                        [(coef * q, arg) for coef, arg in self.logs])

    def __mul__(self, other):
        if other.is_algebraic():
            return self.scale(other.slots['1'])
        if self.is_algebraic():
            return other.scale(self.slots['1'])
        raise NonAlgebraicOperationError('product of two transcendental elements')

    def inverse(self):
        if not self.is_algebraic():
            raise NonAlgebraicOperationError('inverse of a transcendental element')
        return DiffElem.algebraic(self.slots['1'].inverse())

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, n):
        if not self.is_algebraic():
            raise NonAlgebraicOperationError('power of a transcendental element')
        base = self.slots['1'] if n >= 0 else self.slots['1'].inverse()
        result = QuadElem(RatFunc.one())
        for _ in range(abs(n)):
            result = result * base
        return DiffElem.algebraic(result)

    def evaluate(self, uv, wv, A=0.0, B=0.0, C=0.0):
        values = {'1': 1.0, 'A': A, 'B': B, 'C': C}
        total = sum(self.slots[name].evaluate(uv, wv) * values[name] for name in SLOTS
                    if self.slots[name])
        for coef, arg in self.logs:
            total += coef.evaluate(uv, wv) * math.log(arg.evaluate(uv, wv))
        return total

    def __str__(self):
        parts = []
        for name in SLOTS:
            q = self.slots[name]
            if q:
                parts.append(str(q) if name == '1' else '({})*{:s}'.format(q, name))
        for coef, arg in self._combined_logs():
            parts.append('({})*ln({})'.format(coef, arg))
        return ' + '.join(parts) if parts else '0'


def d_du(e):
    """Formal derivative in u.

    d(c A) = c' A + c sqrtQ/Q, likewise for B and C with u^2 and u, and
    d(coef ln g) = coef' ln g + coef g'/g.
    """
    slots = {name: e.slots[name].diff() for name in SLOTS}
    for name in SLOTS[1:]:
        if e.slots[name]:
            slots['1'] = slots['1'] + e.slots[name] * _SLOT_DIFF[name]
    logs = []
    for coef, arg in e.logs:
        dcoef = coef.diff()
        if dcoef:
            logs.append((dcoef, arg))
        slots['1'] = slots['1'] + coef * arg.diff() * arg.inverse()
    return DiffElem(slots, logs)


def check_identity(integrand, antiderivative):
    """True when d/du antiderivative equals the integrand."""
    return not (d_du(antiderivative) - integrand)


####################################################################################################


_re_token = re.compile(r'\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()])'
                       r'|(?P<bad>\S))', re.ASCII)

_ATOMS = {
    'u': lambda: DiffElem.algebraic(QuadElem(RatFunc(u))),
    'w': lambda: DiffElem.algebraic(QuadElem(RatFunc(w))),
    'Q': lambda: DiffElem.algebraic(QuadElem(RatFunc(Q_POLY))),
    'sqrtQ': lambda: DiffElem.algebraic(QuadElem.sqrt_q()),
    'sqrt2': lambda: DiffElem.constant(SQRT2),
    'A': lambda: DiffElem.transcendental('A'),
    'B': lambda: DiffElem.transcendental('B'),
    'C': lambda: DiffElem.transcendental('C'),
}


class _ManifestParser:
    """
        expr   := ['+'|'-'] term (('+'|'-') term)*
        term   := unary (('*'|'/') unary)*
        unary  := ('+'|'-') unary | power
        power  := atom ('^' ['-'] int)?
        atom   := int | u | w | Q | sqrtQ | sqrt2 | A | B | C | 'ln' '(' expr ')' | '(' expr ')'
    """

    def __init__(self, text):
        self.text = text
        self.tokens = []
        pos = 0
        while True:
            match = _re_token.match(text, pos)
            if match is None or match.end() == pos:
                break
            pos = match.end()
            kind = match.lastgroup
            if kind == 'bad':
                raise ManifestSyntaxError(text, match.start(kind), 'unexpected \'{:s}\''.format(
                    match[kind]))
            self.tokens.append((kind, match[kind], match.start(kind)))
        self.tokens.append(('end', None, len(text)))
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != 'end':
            raise ManifestSyntaxError(self.text, pos, 'unexpected \'{:s}\''.format(val))
        return e

    def expr(self):
        kind, val, _ = self.peek()
        if kind == 'op' and val in '+-':
            self.advance()
            e = self.term()
            if val == '-':
                e = -e
        else:
            e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind != 'op' or val not in '+-':
                return e
            self.advance()
            e = e + self.term() if val == '+' else e - self.term()

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind != 'op' or val not in '*/':
                return e
            self.advance()
            e = e * self.unary() if val == '*' else e / self.unary()

    def unary(self):
        kind, val, _ = self.peek()
        if kind == 'op' and val in '+-':
            self.advance()
            e = self.unary()
            return -e if val == '-' else e
        return self.power()

    def power(self):
        e = self.atom()
        kind, val, _ = self.peek()
        if kind == 'op' and val == '^':
            self.advance()
            sign = 1
            if self.peek()[1] == '-':
                self.advance()
                sign = -1
            kind, val, pos = self.advance()
            if kind != 'num':
                raise ManifestSyntaxError(self.text, pos, 'exponent must be an integer')
            e = e ** (sign * int(val))
        return e

    def atom(self):
        kind, val, pos = self.advance()
        if kind == 'num':
            return DiffElem.constant(q2(int(val)))
        if kind == 'name':
            if val == 'ln':
                if self.advance()[1] != '(':
                    raise ManifestSyntaxError(self.text, pos, 'ln needs parentheses')
                arg = self.expr()
                if self.advance()[1] != ')':
                    raise ManifestSyntaxError(self.text, pos, 'unclosed ln(')
                if not arg.is_algebraic():
                    raise NonAlgebraicOperationError('logarithm of a transcendental element')
                return DiffElem.log(arg.slots['1'])
            if val in _ATOMS:
                return _ATOMS[val]()
            raise ManifestSyntaxError(self.text, pos, 'unknown name \'{:s}\''.format(val))
        if kind == 'op' and val == '(':
            e = self.expr()
            kind, val, pos = self.advance()
            if val != ')':
                raise ManifestSyntaxError(self.text, pos, 'expected \')\'')
            return e
        if kind == 'end':
            raise ManifestSyntaxError(self.text, pos, 'unexpected end of input')
        raise ManifestSyntaxError(self.text, pos, 'unexpected \'{:s}\''.format(val))


def parse_manifest_expr(text):
    """Parses a manifest expression over u, w, Q, sqrtQ, sqrt2, A, B, C and ln(...)."""
    return _ManifestParser(text).parse()


def load_manifest(path=MANIFEST_PATH):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


####################################################################################################


class IdentityResult:

    def __init__(self, name, status, residual=None, erratum=None, quad_error=None, reason=None):
        self.name = name
        self.status = status
        self.residual = residual
        self.erratum = erratum
        self.quad_error = quad_error
        self.reason = reason

    def to_json(self):
        return {'name': self.name, 'status': self.status, 'residual': self.residual,
                'erratum': self.erratum, 'quad_error': self.quad_error, 'reason': self.reason}


class AppendixReport:

    def __init__(self, results):
        self.results = results

    def count(self, status):
        return sum(1 for r in self.results if r.status == status)

    @property
    def passed(self):
        return self.count('pass')

    @property
    def failed(self):
        return self.count('fail')

    @property
    def skipped(self):
        return self.count('skip')

    @property
    def errata(self):
        return [r for r in self.results if r.erratum is not None]

    def summary(self):
        line = '{:d} passed, {:d} skipped (elliptic closed forms)'.format(self.passed,
                                                                          self.skipped)
        if self.failed:
            line = '{:d} failed, '.format(self.failed) + line
        return line

    def to_json(self):
        return {'passed': self.passed, 'failed': self.failed, 'skipped': self.skipped,
                'results': [r.to_json() for r in self.results]}

    def render(self):
        lines = []
        for r in self.results:
            line = '{:<6s} {:s}'.format(r.status.upper(), r.name)
            if r.status == 'skip':
                line += '  ({:s})'.format(r.reason)
            if r.quad_error is not None:
                line += '  quadrature rel. error {:.2e}'.format(r.quad_error)
            lines.append(line)
            if r.residual:
                lines.append('       residual: {:s}'.format(r.residual))
            if r.erratum is not None:
                lines.append('       printed form fails, residual: {:s}'.format(r.erratum))
        lines.append(self.summary())
        return '\n'.join(lines)


def _quad(fn, lo, hi):
    return quad(fn, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def quadrature_check(entry, lo=2.0, hi=3.0, wv=1.0):
    """Relative error between int_lo^hi integrand du and the antiderivative difference.

    A, B and C are evaluated by the same quadrature from lo, so only their derivatives matter.
    """
    integrand = parse_manifest_expr(entry['integrand'])
    antiderivative = parse_manifest_expr(entry['antiderivative'])
    sq = lambda t: math.sqrt(0.5 * t**4 - 2 * wv)
    transcendental = {
        'A': lambda t: _quad(lambda s: 1 / sq(s), lo, t),
        'B': lambda t: _quad(lambda s: s**2 / sq(s), lo, t),
        'C': lambda t: _quad(lambda s: s / sq(s), lo, t),
    }
    lhs = _quad(lambda t: integrand.evaluate(t, wv), lo, hi)
    ends = []
    for t in (lo, hi):
        values = {name: fn(t) for name, fn in transcendental.items()}
        ends.append(antiderivative.evaluate(t, wv, **values))
    rhs = ends[1] - ends[0]
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def _check_entry(entry, quadrature=True):
    name = entry['name']
    if entry.get('status') == 'skip':
        return IdentityResult(name, 'skip', reason=entry.get('reason', 'out of scope'))
    integrand = parse_manifest_expr(entry['integrand'])
    antiderivative = parse_manifest_expr(entry['antiderivative'])
    residual = d_du(antiderivative) - integrand
    status = 'fail' if residual else 'pass'
    result = IdentityResult(name, status, str(residual) if residual else None)
    if 'printed' in entry:
        printed = d_du(parse_manifest_expr(entry['printed'])) - integrand
        if printed:
            result.erratum = str(printed)
    if quadrature and status == 'pass':
        result.quad_error = quadrature_check(entry)
    logger.debug('%s: %s', name, status)
    return result


def _check_payload(payload):
    return _check_entry(*payload).to_json()


def appendix_suite(manifest=None, quadrature=True, threads=1):
    """Checks every identity of the manifest by differentiation.

    Args:
        manifest (list): Entries {name, integrand, antiderivative, [printed], [status, reason]};
            defaults to the bundled manifest.
        quadrature (bool): Also compare each passing identity against numeric quadrature.
        threads (int): Worker processes.

    Returns:
        AppendixReport
    """
    if manifest is None:
        manifest = load_manifest()
    if threads > 1:
        with multiprocessing.Pool(threads) as pool:
            rows = pool.map(_check_payload, [(entry, quadrature) for entry in manifest])
        results = [IdentityResult(**{k: v for k, v in row.items()}) for row in rows]
    else:
        results = [_check_entry(entry, quadrature) for entry in manifest]
    report = AppendixReport(results)
    logger.info('appendix suite: %s', report.summary())
    return report
