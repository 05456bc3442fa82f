"""Polynomial vector fields in three state variables.

Contains the FitzHugh-Nagumo travelling-wave field, its assistant deformation (an extra m*x*z in
the y equation), the alpha-scaled form of the assistant system, the Lie derivative, the principal
operator L = z d/dx + m x z d/dy + x^3 d/dz, and alpha conjugation which moves a polynomial into
the scaled coordinates.
"""


from fndarboux.darboux_exceptions import *
from fndarboux.expr import (RING, x, y, z, a, b, c, d, m, alpha, DEFAULT_WEIGHTS, const,
                            parse, to_string, to_json, from_json, substitute)


__all__ = ['VectorField', 'ScaledSystem', 'fn_system', 'assistant_system', 'scaled_system',
           'lie_derivative', 'op_L', 'alpha_conjugate', 'max_weight']


class VectorField:
    """The field x' = P, y' = Q, z' = R with polynomial components."""

    def __init__(self, P, Q, R, label=''):
        self.P = const(P)
        self.Q = const(Q)
        self.R = const(R)
        self.label = label

    def __repr__(self):
        return 'VectorField({:s}: P={:s}, Q={:s}, R={:s})'.format(
            self.label, to_string(self.P), to_string(self.Q), to_string(self.R))

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.components() == other.components()

    def components(self):
        return (self.P, self.Q, self.R)

    def substitute(self, assignments, label=None):
        """Returns a new field with symbols replaced in every component."""
        return VectorField(substitute(self.P, assignments),
                           substitute(self.Q, assignments),
                           substitute(self.R, assignments),
                           self.label if label is None else label)

    def lie_derivative(self, f):
        return f.diff(x) * self.P + f.diff(y) * self.Q + f.diff(z) * self.R

    def to_json(self):
        return {'P': to_json(self.P), 'Q': to_json(self.Q), 'R': to_json(self.R),
                'label': self.label}

    @classmethod
    def from_json(cls, obj):
        return cls(from_json(obj['P']), from_json(obj['Q']), from_json(obj['R']),
                   obj.get('label', ''))

    @classmethod
    def from_strings(cls, P, Q, R, label='user'):
        """Builds a field from three expression strings (see expr.parse for the grammar)."""
        return cls(parse(P), parse(Q), parse(R), label)


class ScaledSystem(VectorField):
    """The assistant system rewritten in the coordinates (X, Y, Z, T).

    X, Y, Z reuse the state symbols x, y, z; alpha is an ordinary parameter symbol.
    """

    scaling = '(X, Y, Z, T) = (alpha*x, alpha^2*y, alpha^2*z, t/alpha)'

    def __init__(self, P, Q, R, base):
        super().__init__(P, Q, R, 'scaled')
        self.base = base


def fn_system():
    """x' = z, y' = b(x - dy), z' = x(x - 1)(x - a) + y + cz with symbolic parameters."""
    return VectorField(z, b * (x - d * y), x**3 - (1 + a) * x**2 + a * x + y + c * z, 'fn')


def assistant_system():
    fn = fn_system()
    return VectorField(fn.P, fn.Q + m * x * z, fn.R, 'assistant')


def scaled_system():
    P = z
    Q = -alpha * b * d * y + alpha**2 * b * x + m * x * z
    R = x**3 - alpha * ((a + 1) * x**2 - y - c * z) + alpha**2 * a * x
    return ScaledSystem(P, Q, R, assistant_system())


def lie_derivative(V, f):
    """Returns P*f_x + Q*f_y + R*f_z exactly."""
    return V.lie_derivative(f)


def op_L(f, m_value=m):
    """Applies L = z d/dx + m x z d/dy + x^3 d/dz; m_value may be the symbol m or a number."""
    mv = const(m_value)
    return z * f.diff(x) + mv * x * z * f.diff(y) + x**3 * f.diff(z)


def max_weight(f, w=DEFAULT_WEIGHTS):
    if not f:
        return 0
    return max(w.weight(monom) for monom in f.itermonoms())


_ALPHA = RING.gens.index(alpha)


def alpha_conjugate(f, l=None, w=DEFAULT_WEIGHTS):
    """Computes F(X, Y, Z) = alpha^l f(X/alpha, Y/alpha^2, Z/alpha^2).

    Each term of f gains the alpha power l minus its weight degree, so F at alpha = 1 is f again
    and the alpha coefficients of F are the weight components of f.

    Args:
        f (Poly): Polynomial to conjugate.
        l (int): Target weight. Defaults to the largest weight degree among the terms of f.
        w (WeightSpec): Weight exponents of the state variables.

    Returns:
        Poly: The conjugated polynomial.

    Raises:
        AlphaExponentError: When some term has weight degree larger than l.
    """
    if l is None:
        l = max_weight(f, w)
    terms = {}
    for monom, coeff in f.iterterms():
        weight = w.weight(monom)
        if weight > l:
            raise AlphaExponentError(l, weight)
        monom = list(monom)
        monom[_ALPHA] += l - weight
        monom = tuple(monom)
        terms[monom] = terms.get(monom, 0) + coeff
    return RING.from_dict({k: v for k, v in terms.items() if v})
