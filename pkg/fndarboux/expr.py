"""Exact multivariate polynomials over the rationals.

Every polynomial in this package lives in one shared sympy ring over QQ whose generators are the
three state variables x, y, z followed by the parameter symbols a, b, c, d, m, alpha. Monomials are
ordered lexicographically in that symbol order. This module adds the pieces sympy does not provide
in the form needed here: an expression parser with positioned errors, a canonical printer that
round-trips through the parser, a JSON codec, and weight grading with weight exponents (1,2,2) on
the state variables.
"""


import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring, PolyElement

from fndarboux.darboux_exceptions import *


__all__ = [
    'STATE_SYMBOLS', 'PARAMETER_SYMBOLS', 'SYMBOLS', 'RING', 'GENS', 'Poly',
    'VarKind', 'var_kind', 'gen', 'to_qq', 'const', 'parse_rational',
    'WeightSpec', 'DEFAULT_WEIGHTS',
    'parse', 'to_string', 'to_json', 'from_json',
    'add', 'mul', 'pow', 'neg', 'substitute', 'partial',
    'weight_components', 'state_degree', 'weight_degree',
]


STATE_SYMBOLS = ('x', 'y', 'z')
PARAMETER_SYMBOLS = ('a', 'b', 'c', 'd', 'm', 'alpha')
SYMBOLS = STATE_SYMBOLS + PARAMETER_SYMBOLS

RING, x, y, z, a, b, c, d, m, alpha = ring(','.join(SYMBOLS), QQ, lex)
GENS = dict(zip(SYMBOLS, RING.gens))

Poly = PolyElement


class VarKind(Enum):
    STATE = 'state'
    PARAMETER = 'parameter'


def var_kind(symbol):
    if symbol in STATE_SYMBOLS:
        return VarKind.STATE
    if symbol in PARAMETER_SYMBOLS:
        return VarKind.PARAMETER
    raise ExprUnknownSymbolError(symbol, 0, symbol)


def gen(symbol):
    """Returns the ring generator for a symbol name, or passes a generator through."""
    if isinstance(symbol, PolyElement):
        return symbol
    try:
        return GENS[symbol]
    except KeyError:
        raise ExprUnknownSymbolError(symbol, 0, symbol) from None


####################################################################################################


_re_rational = re.compile(r'^\s*([-+]?\d+)(?:\s*/\s*(\d+))?\s*$', re.ASCII)


def parse_rational(string):
    """Parses an exact rational written as an integer or as 'p/q'.

    Floats such as '0.5' are rejected so that exact commands never see rounded input.

    Args:
        string (str): The text to parse.

    Returns:
        Fraction: The value in lowest terms.

    Raises:
        ExprRationalError: When the text is not an integer or 'p/q' with q > 0.
    """
    match = _re_rational.fullmatch(string)
    if match is None: raise ExprRationalError(string)
    den = int(match[2]) if match[2] is not None else 1
    if den == 0: raise ExprRationalError(string)
    return Fraction(int(match[1]), den)


def to_qq(value):
    """Converts int, Fraction, 'p/q' strings and QQ elements to a QQ element."""
    if isinstance(value, str):
        value = parse_rational(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    return QQ.convert(value)


def const(value):
    """Returns the constant polynomial with the given rational value."""
    if isinstance(value, PolyElement):
        return value
    return RING.ground_new(to_qq(value))


####################################################################################################


@dataclass(frozen=True)
class WeightSpec:
    """Weight exponents of the state variables; parameter symbols always weigh 0."""
    sx: int = 1
    sy: int = 2
    sz: int = 2

    def weight(self, monom):
        return self.sx * monom[0] + self.sy * monom[1] + self.sz * monom[2]


DEFAULT_WEIGHTS = WeightSpec()


####################################################################################################


_re_token = re.compile(
    r'\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()])|(?P<bad>\S))',
    re.ASCII)


def _tokenize(text):
    tokens = []
    pos = 0
    while True:
        match = _re_token.match(text, pos)
        if match is None or match.end() == pos:
            break
        pos = match.end()
        kind = match.lastgroup
        tokens.append((kind, match[kind], match.start(kind)))
    tokens.append(('end', None, len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser for the polynomial expression grammar.

        expr     := ['+'|'-'] term (('+'|'-') term)*
        term     := factor ('*' factor)*
        factor   := base ('^' nat)?
        base     := rational | symbol | '(' expr ')'
        rational := int ('/' nat)?
    """

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, value):
        kind, val, pos = self.advance()
        if val != value:
            raise ExprSyntaxError(self.text, pos, 'expected \'{:s}\''.format(value))

    def parse(self):
        poly = self.expr()
        kind, val, pos = self.peek()
        if kind != 'end':
            raise ExprSyntaxError(self.text, pos, 'unexpected \'{:s}\''.format(val))
        return poly

    def expr(self):
        sign = 1
        kind, val, pos = self.peek()
        if kind == 'op' and val in '+-':
            self.advance()
            sign = -1 if val == '-' else 1
        poly = self.term() * sign
        while True:
            kind, val, pos = self.peek()
            if kind != 'op' or val not in '+-':
                return poly
            self.advance()
            if val == '+':
                poly = poly + self.term()
            else:
                poly = poly - self.term()

    def term(self):
        poly = self.factor()
        while self.peek()[1] == '*' and self.peek()[0] == 'op':
            self.advance()
            poly = poly * self.factor()
        return poly

    def factor(self):
        base = self.base()
        kind, val, pos = self.peek()
        if kind == 'op' and val == '^':
            self.advance()
            kind, val, pos = self.advance()
            if kind != 'num':
                raise ExprExponentError(self.text, pos)
            after_kind, after_val, _ = self.peek()
            if after_val == '/' or (after_kind == 'bad' and after_val == '.'):
                raise ExprExponentError(self.text, pos)
            return base ** int(val)
        return base

    def base(self):
        kind, val, pos = self.advance()
        if kind == 'num':
            num = int(val)
            den = 1
            if self.peek()[0] == 'op' and self.peek()[1] == '/':
                self.advance()
                kind, val, dpos = self.advance()
                if kind != 'num':
                    raise ExprSyntaxError(self.text, dpos, 'expected integer denominator')
                den = int(val)
                if den == 0:
                    raise ExprSyntaxError(self.text, dpos, 'zero denominator')
            return RING.ground_new(QQ(num, den))
        if kind == 'name':
            if val not in GENS:
                raise ExprUnknownSymbolError(self.text, pos, val)
            return GENS[val]
        if kind == 'op' and val == '(':
            poly = self.expr()
            self.expect(')')
            return poly
        if kind == 'end':
            raise ExprSyntaxError(self.text, pos, 'unexpected end of input')
        raise ExprSyntaxError(self.text, pos, 'unexpected \'{:s}\''.format(val))


def parse(text):
    """Parses an arithmetic expression over the nine symbols into a canonical polynomial.

    Args:
        text (str): Expression using integers, rationals p/q, the symbols x, y, z, a, b, c, d, m,
            alpha, the operators + - * ^ and parentheses. Whitespace is insignificant.

    Returns:
        Poly: The expanded polynomial.

    Raises:
        ExprSyntaxError: On malformed input; the exception carries the offending position.
        ExprUnknownSymbolError: When a name other than the nine symbols appears.
        ExprExponentError: When an exponent is negative or not an integer.
    """
    return _Parser(text).parse()


####################################################################################################


def _format_monom(monom):
    factors = []
    for name, exp in zip(SYMBOLS, monom):
        if exp == 1:
            factors.append(name)
        elif exp > 1:
            factors.append('{:s}^{:d}'.format(name, exp))
    return '*'.join(factors)


def to_string(p):
    """Prints a polynomial in the canonical form accepted back by parse().

    Terms appear in decreasing lexicographic order of x > y > z > a > b > c > d > m > alpha.
    """
    if not p:
        return '0'
    out = ''
    for monom, coeff in p.terms():
        num, den = int(QQ.numer(coeff)), int(QQ.denom(coeff))
        negative = num < 0
        num = abs(num)
        mono = _format_monom(monom)
        if not mono:
            body = str(num) if den == 1 else '{:d}/{:d}'.format(num, den)
        elif num == 1 and den == 1:
            body = mono
        elif den == 1:
            body = '{:d}*{:s}'.format(num, mono)
        else:
            body = '({:d}/{:d})*{:s}'.format(num, den, mono)
        if not out:
            out = '-' + body if negative else body
        else:
            out += (' - ' if negative else ' + ') + body
    return out


def to_json(p):
    """Serializes a polynomial as a list of {"exps", "num", "den"} objects (decimal strings)."""
    terms = []
    for monom, coeff in p.terms():
        exps = {name: exp for name, exp in zip(SYMBOLS, monom) if exp}
        terms.append({'exps': exps,
                      'num': str(int(QQ.numer(coeff))),
                      'den': str(int(QQ.denom(coeff)))})
    return terms


def from_json(obj):
    terms = {}
    for term in obj:
        monom = [0] * len(SYMBOLS)
        for name, exp in term['exps'].items():
            if name not in GENS:
                raise ExprUnknownSymbolError(str(term), 0, name)
            if not isinstance(exp, int) or exp < 0:
                raise ExprExponentError(str(term), 0)
            monom[SYMBOLS.index(name)] = exp
        coeff = QQ(int(term['num']), int(term['den']))
        monom = tuple(monom)
        terms[monom] = terms.get(monom, QQ(0)) + coeff
    return RING.from_dict({k: v for k, v in terms.items() if v})


####################################################################################################


def add(p, q):
    return p + q

def mul(p, q):
    return p * q

def pow(p, n):
    if n < 0:
        raise ExprExponentError(to_string(p), 0)
    return p ** n

def neg(p):
    return -p


def substitute(p, assignments):
    """Simultaneously substitutes polynomials (or rationals) for symbols.

    Args:
        p (Poly): The polynomial to transform.
        assignments (dict): Maps symbol names or generators to Poly, int, Fraction or 'p/q'.

    Returns:
        Poly: The result; every replaced symbol sees the original p, never a partial result.
    """
    if not assignments:
        return p
    pairs = [(gen(sym), const(value)) for sym, value in assignments.items()]
    return p.compose(pairs)


def partial(p, v):
    return p.diff(gen(v))


####################################################################################################


def weight_components(p, w=DEFAULT_WEIGHTS):
    """Splits p into weight-homogeneous components.

    Returns:
        list of (int, Poly): Components in strictly decreasing weight order; they sum to p.
    """
    buckets = {}
    for monom, coeff in p.iterterms():
        buckets.setdefault(w.weight(monom), {})[monom] = coeff
    return [(deg, RING.from_dict(buckets[deg])) for deg in sorted(buckets, reverse=True)]


def state_degree(p):
    """Total degree in x, y, z only; the zero polynomial has degree -1."""
    if not p:
        return -1
    return max(sum(monom[:3]) for monom in p.itermonoms())


def weight_degree(p, w=DEFAULT_WEIGHTS):
    weights = sorted({w.weight(monom) for monom in p.itermonoms()})
    if len(weights) != 1:
        raise NotHomogeneousError(weights)
    return weights[0]
