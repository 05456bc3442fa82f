"""Numeric parameter instances (a, b, c, d, m) of the travelling-wave system."""


from dataclasses import dataclass, fields
from fractions import Fraction

from sympy import Rational, sqrt
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import ring

from fndarboux.darboux_exceptions import *
from fndarboux.expr import parse_rational, substitute


__all__ = ['ParamPoint', 'Sqrt2Point', 'SQRT2_FIELD', 'SQRT2_RING']


def _to_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, int):
        return Fraction(value)
    # sympy QQ elements expose numerator/denominator
    return Fraction(int(value.numerator), int(value.denominator))


@dataclass(frozen=True)
class ParamPoint:
    """All-rational parameter values; m defaults to 0, which is the FitzHugh-Nagumo system proper."""
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    m: Fraction = Fraction(0)

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _to_fraction(getattr(self, f.name)))

    def __str__(self):
        return '(a, b, c, d, m) = ({})'.format(', '.join(str(v) for v in self.values()))

    def values(self):
        return (self.a, self.b, self.c, self.d, self.m)

    def assignments(self):
        return {'a': self.a, 'b': self.b, 'c': self.c, 'd': self.d, 'm': self.m}

    def apply(self, p):
        """Substitutes the parameter values into a polynomial."""
        return substitute(p, self.assignments())

    def apply_field(self, V):
        return V.substitute(self.assignments())

    def to_json(self):
        return {k: str(v) for k, v in self.assignments().items()}

    @classmethod
    def from_json(cls, obj):
        return cls(**{k: obj[k] for k in ('a', 'b', 'c', 'd')}, m=obj.get('m', '0'))


####################################################################################################


SQRT2_FIELD = QQ.algebraic_field(sqrt(2))
SQRT2_RING, _, _, _ = ring('x,y,z', SQRT2_FIELD, lex)


def _surd(p, q):
    return SQRT2_FIELD.from_sympy(Rational(p.numerator, p.denominator)
                                  + Rational(q.numerator, q.denominator) * sqrt(2))


def _surd_string(p, q):
    if not q:
        return str(p)
    tail = '{}*sqrt2'.format(q)
    if not p:
        return tail
    return '{} {} {}*sqrt2'.format(p, '-' if q < 0 else '+', abs(q))


@dataclass(frozen=True)
class Sqrt2Point:
    """Parameter values in Q(sqrt 2), each given as a pair (p, q) meaning p + q*sqrt(2).

    Used where a parameter locus has no rational point. m is fixed at 0.
    """
    a: tuple
    b: tuple
    c: tuple
    d: tuple

    def __post_init__(self):
        for f in fields(self):
            p, q = getattr(self, f.name)
            object.__setattr__(self, f.name, (_to_fraction(p), _to_fraction(q)))

    def assignments(self):
        return {'a': self.a, 'b': self.b, 'c': self.c, 'd': self.d}

    def apply(self, p):
        """Specializes a polynomial of the shared ring into SQRT2_RING (x, y, z over Q(sqrt 2)).

        Raises:
            FieldException: When p involves alpha.
        """
        values = [_surd(*v) for v in self.values()]
        gens = SQRT2_RING.gens
        result = SQRT2_RING.zero
        for monom, coeff in p.terms():
            state, params = monom[:3], monom[3:]
            if params[5]:
                raise FieldException('cannot specialize alpha at a Q(sqrt 2) point')
            if params[4]:
                continue
            term = SQRT2_RING.ground_new(SQRT2_FIELD.from_sympy(QQ.to_sympy(coeff)))
            for value, e in zip(values, params[:4]):
                if e:
                    term *= SQRT2_RING.ground_new(value**e)
            for gen, e in zip(gens, state):
                if e:
                    term *= gen**e
            result += term
        return result

    def values(self):
        return (self.a, self.b, self.c, self.d)

    def to_json(self):
        return {k: _surd_string(*v) for k, v in self.assignments().items()}
