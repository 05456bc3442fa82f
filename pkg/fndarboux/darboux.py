"""Darboux polynomials of the FitzHugh-Nagumo travelling-wave system.

A polynomial f is a Darboux polynomial of the field X when X(f) = k f for a polynomial cofactor k,
which for these cubic fields has degree at most 2 in the state variables. This module verifies such
relations under parameter constraints, recovers cofactors by exact division, searches for all
Darboux polynomials of bounded degree at numeric parameter points, and holds the registry of the
six known generators of the FitzHugh-Nagumo system together with an audit of their conditions.
"""


import logging
import math
import multiprocessing
from dataclasses import dataclass
from fractions import Fraction

from sympy.polys.domains import QQ

from fndarboux.darboux_exceptions import *
from fndarboux.expr import (RING, GENS, SYMBOLS, x, y, z, a, b, c, d, const, parse, to_qq,
                            to_string, substitute, state_degree)
from fndarboux.field import VectorField, fn_system
from fndarboux.linalg import nullspace, rank
from fndarboux.params import ParamPoint, Sqrt2Point


__all__ = ['ParamPoint', 'ParamConstraint', 'Cofactor', 'Verification', 'DarbouxCertificate',
           'SearchResult', 'verify', 'solve_cofactor', 'search', 'first_integrals',
           'independent', 'span_contains', 'proposition1_check', 'table1_polynomials',
           'table1_certificates', 'render_table1', 'fn_cofactor_candidates',
           'in_biological_region', 'sample_biological_point', 'random_param_point',
           'is_irreducible']


logger = logging.getLogger(__name__)


####################################################################################################


def _poly_symbols(p):
    return {SYMBOLS[i] for monom in p.itermonoms() for i, e in enumerate(monom) if e}


class ParamConstraint:
    """Solved-form parameter conditions.

    substitutions is an ordered list of (symbol, numerator, denominator); a later entry may use
    symbols assigned by earlier entries but never its own symbol or a later one. relations are
    parameter polynomials that must vanish, nonvanishing those that must not.
    """

    def __init__(self, substitutions=(), relations=(), nonvanishing=(), label=''):
        self.substitutions = []
        for entry in substitutions:
            if len(entry) == 2:
                entry = (entry[0], entry[1], 1)
            symbol, num, den = entry[0], const(entry[1]), const(entry[2])
            if not den:
                raise ConstraintError('substitution for {} has a zero denominator'.format(symbol))
            self.substitutions.append((str(symbol), num, den))
        self.relations = [const(r) for r in relations]
        self.nonvanishing = [const(p) for p in nonvanishing]
        self.label = label
        self._check_triangular()

    def _check_triangular(self):
        assigned = [symbol for symbol, _, _ in self.substitutions]
        if len(set(assigned)) != len(assigned):
            raise ConstraintError('symbol assigned twice in {}'.format(assigned))
        for i, (symbol, num, den) in enumerate(self.substitutions):
            if symbol not in GENS:
                raise ConstraintError('unknown symbol {:s}'.format(symbol))
            used = _poly_symbols(num) | _poly_symbols(den)
            later = used & set(assigned[i:])
            if later:
                raise ConstraintError('substitutions are not triangular: {:s} uses {:s}'.format(
                    symbol, ', '.join(sorted(later))))

    def __str__(self):
        parts = []
        for symbol, num, den in self.substitutions:
            if den == 1:
                parts.append('{:s} = {:s}'.format(symbol, to_string(num)))
            else:
                parts.append('{:s} = ({:s})/({:s})'.format(symbol, to_string(num), to_string(den)))
        parts += ['{:s} = 0'.format(to_string(r)) for r in self.relations]
        parts += ['{:s} != 0'.format(to_string(p)) for p in self.nonvanishing]
        return ', '.join(parts) if parts else 'none'

    def _declared(self, p):
        """True when p is a nonzero constant or a rational multiple of a declared polynomial."""
        if p.is_ground:
            return bool(p)
        for q in self.nonvanishing:
            if p.monic() == q.monic():
                return True
        return False

    def apply(self, p):
        """Substitutes the solved forms, last to first, clearing every denominator.

        A denominator substitution s = num/den with p of degree n in s turns p into
        den^n p(num/den) = sum_j p_j num^j den^(n-j).
        """
        for symbol, num, den in reversed(self.substitutions):
            s = GENS[symbol]
            if den == 1:
                p = substitute(p, {s: num})
                continue
            if not self._declared(den):
                raise ConstraintError('denominator {:s} of {:s} is not declared nonvanishing'
                                      .format(to_string(den), symbol))
            n = p.degree(s)
            if n <= 0:
                continue
            cleared = RING.zero
            for j in range(n + 1):
                cleared += p.coeff_wrt(s, j) * num**j * den**(n - j)
            p = cleared
        return p

    def reduce(self, p):
        """apply(), then pseudo-reduction by each relation in its leading parameter."""
        p = self.apply(p)
        for relation in self.relations:
            relation = self.apply(relation)
            if not relation:
                continue
            if relation.is_ground:
                raise ConstraintError('relation {:s} = 0 is inconsistent'.format(
                    to_string(relation)))
            lead = min(i for monom in relation.itermonoms() for i, e in enumerate(monom) if e)
            dg = relation.degree(lead)
            lc = relation.coeff_wrt(lead, dg)
            if not self._declared(lc):
                raise ConstraintError('leading coefficient {:s} of {:s} in {:s} is not declared '
                                      'nonvanishing'.format(to_string(lc), to_string(relation),
                                                            SYMBOLS[lead]))
            df = p.degree(lead)
            p = p.prem(relation, lead)
            if lc.is_ground and df >= dg:
                p = p.quo_ground(lc.LC ** (df - dg + 1))
        return p

    def to_json(self):
        return {'substitutions': [{'symbol': s, 'num': to_string(n), 'den': to_string(dd)}
                                  for s, n, dd in self.substitutions],
                'relations': [to_string(r) for r in self.relations],
                'nonvanishing': [to_string(p) for p in self.nonvanishing],
                'label': self.label}

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def from_point(cls, params, label='point'):
        """Constraint that fixes every parameter to the values of a ParamPoint."""
        return cls([(k, v) for k, v in params.assignments().items()], label=label)


class Cofactor:
    """A cofactor polynomial; the state degree is at most 2."""

    def __init__(self, k):
        if isinstance(k, str):
            k = parse(k)
        self.k = const(k)
        if state_degree(self.k) > 2:
            raise CertificateException('cofactor {:s} has state degree {:d} > 2'.format(
                to_string(self.k), state_degree(self.k)))

    def __eq__(self, other):
        if isinstance(other, Cofactor):
            return self.k == other.k
        return NotImplemented

    def __str__(self):
        return to_string(self.k)


def _cofactor_poly(k):
    if isinstance(k, Cofactor):
        return k.k
    return Cofactor(k).k


@dataclass
class Verification:
    valid: bool
    residual: object

    def to_json(self):
        return {'valid': self.valid, 'residual': to_string(self.residual)}


def verify(f, k, V, constraints=None):
    """Checks X(f) = k f under parameter constraints.

    Args:
        f (Poly): Candidate Darboux polynomial.
        k: Cofactor, polynomial or expression string.
        V (VectorField): The field X.
        constraints (ParamConstraint): Conditions on the parameters; None means none.

    Returns:
        Verification: valid is True exactly when the reduced residual X(f) - k f is zero.

    Raises:
        ConstraintError: When a denominator or relation leading coefficient is not declared
            nonvanishing.
    """
    if constraints is None:
        constraints = ParamConstraint.none()
    residual = V.lie_derivative(f) - _cofactor_poly(k) * f
    residual = constraints.reduce(residual)
    return Verification(not residual, residual)


def solve_cofactor(f, V):
    """Recovers the cofactor of f by exact division of X(f) by f.

    Raises:
        NotDarbouxError: When f is zero, the division leaves a remainder, or the quotient has
            state degree above 2.
    """
    if not f:
        raise NotDarbouxError('0', 'zero polynomial')
    q, r = V.lie_derivative(f).div(f)
    if r:
        raise NotDarbouxError(to_string(f), 'remainder {:s}'.format(to_string(r)))
    if state_degree(q) > 2:
        raise NotDarbouxError(to_string(f), 'cofactor {:s} has degree > 2'.format(to_string(q)))
    return Cofactor(q)


####################################################################################################


@dataclass
class SearchResult:
    k: object
    basis: list

    def to_json(self):
        return {'cofactor': to_string(self.k), 'basis': [to_string(f) for f in self.basis]}


def fn_cofactor_candidates(c_value, D):
    """{0} and (4/3) n c for 1 <= n <= ceil(D/4)."""
    c_value = to_qq(c_value)
    candidates = [RING.zero]
    if c_value:
        for n in range(1, math.ceil(D / 4) + 1):
            candidates.append(const(QQ(4, 3) * n * c_value))
    return candidates


def _state_monomials(D):
    monoms = []
    for total in range(D + 1):
        for i in range(total, -1, -1):
            for j in range(total - i, -1, -1):
                monoms.append((i, j, total - i - j))
    return sorted(monoms, reverse=True)


def _is_numeric(p):
    return not any(any(monom[3:]) for monom in p.itermonoms())


def _null_space(V, k, D):
    """Basis of {f : X(f) = k f} among polynomials of state degree <= D."""
    basis = [mono for mono in _state_monomials(D) if k or any(mono)]
    pad = (0,) * (RING.ngens - 3)
    columns = [RING.from_dict({mono + pad: QQ(1)}) for mono in basis]
    rows = {}
    dok = {}
    for col, mono in enumerate(columns):
        image = V.lie_derivative(mono) - k * mono
        for monom, coeff in image.iterterms():
            row = rows.setdefault(monom, len(rows))
            dok[(row, col)] = coeff
    vectors = nullspace(dok, (len(rows), len(columns)))
    return [sum((columns[i] * val for i, val in vec.items()), RING.zero) for vec in vectors]


def _search_task(payload):
    P, Q, R, k, D = payload
    V = VectorField.from_strings(P, Q, R)
    return [to_string(f) for f in _null_space(V, parse(k), D)]


def search(V, D, candidates=None, params=None, threads=1):
    """Finds every Darboux polynomial of state degree <= D for each candidate cofactor.

    Args:
        V (VectorField): The field; parameter symbols must already be numeric unless params is
            given.
        D (int): Degree bound, at least 1.
        candidates (list): Cofactors to try. Defaults to the FitzHugh-Nagumo cofactor lattice at
            params.c, which is only complete for that system.
        params (ParamPoint): Parameter values applied to V before the search.
        threads (int): Worker processes; candidates are searched in parallel when above 1.

    Returns:
        list of SearchResult: One entry per candidate with a nonzero null space. Constants are
        excluded for the zero cofactor.
    """
    if D < 1:
        raise CertificateException('search needs degree bound D >= 1, got {:d}'.format(D))
    if params is not None:
        V = params.apply_field(V)
    if not all(_is_numeric(p) for p in V.components()):
        raise CertificateException('search needs a field with numeric parameters: {!r}'.format(V))
    if candidates is None:
        if params is None:
            raise CertificateException('cofactor candidates are required without a ParamPoint')
        candidates = fn_cofactor_candidates(params.c, D)
    candidates = [_cofactor_poly(k) for k in candidates]
    if params is not None:
        candidates = [params.apply(k) for k in candidates]

    if threads > 1 and len(candidates) > 1:
        payloads = [(to_string(V.P), to_string(V.Q), to_string(V.R), to_string(k), D)
                    for k in candidates]
        with multiprocessing.Pool(min(threads, len(candidates))) as pool:
            found = pool.map(_search_task, payloads)
        bases = [[parse(s) for s in strings] for strings in found]
    else:
        bases = [_null_space(V, k, D) for k in candidates]

    results = []
    for k, basis in zip(candidates, bases):
        logger.debug('cofactor %s: null space dimension %d', to_string(k), len(basis))
        if basis:
            results.append(SearchResult(k, basis))
    logger.info('search at degree %d: %d of %d candidates admit Darboux polynomials',
                D, len(results), len(candidates))
    return results


def first_integrals(V, D, params=None, threads=1):
    """Non-constant polynomial first integrals of state degree <= D."""
    if D < 1:
        return []
    results = search(V, D, [RING.zero], params, threads)
    return results[0].basis if results else []


def span_contains(basis, f):
    """True when f lies in the rational span of basis."""
    index = {}
    dok = {}
    for col, p in enumerate(list(basis) + [f]):
        for monom, coeff in p.iterterms():
            dok[(index.setdefault(monom, len(index)), col)] = coeff
    n = len(basis)
    left = {key: val for key, val in dok.items() if key[1] < n}
    return rank(left, (len(index), n)) == rank(dok, (len(index), n + 1))


def independent(f, g):
    """True when the gradients of f and g are generically independent."""
    fx, fy, fz = f.diff(x), f.diff(y), f.diff(z)
    gx, gy, gz = g.diff(x), g.diff(y), g.diff(z)
    minors = (fx * gy - fy * gx, fx * gz - fz * gx, fy * gz - fz * gy)
    return any(minors)


def proposition1_check(factors, V, params=None):
    """Checks that the cofactor of prod f_i^l_i is sum l_i k_i.

    Raises:
        NotDarbouxError: When one of the factors has no cofactor.
    """
    if params is not None:
        V = params.apply_field(V)
        factors = [(params.apply(f), l) for f, l in factors]
    total = RING.zero
    product = RING.one
    for f, l in factors:
        total += solve_cofactor(f, V).k * l
        product *= f**l
    return solve_cofactor(product, V).k == total


def is_irreducible(f):
    """Irreducibility over the coefficient domain; constants count as reducible."""
    if f.is_ground:
        return False
    _, factors = f.factor_list()
    return len(factors) == 1 and factors[0][1] == 1


####################################################################################################


def table1_polynomials():
    """The generators phi1 .. phi5 with symbolic parameters, keyed by name."""
    h = QQ(1, 2)
    phi1 = (h * x**4 - z**2 + 2 * x * y + QQ(2, 3) * c * x * z
            + (QQ(1, 9) * c**2 - 1) * x**2)
    phi3 = phi1 - h * d * y**2
    phi2 = (h * x**4 - z**2 + 2 * x * y + QQ(2, 3) * c * x * z - QQ(2, 3) * (a + 1) * x**3
            + (QQ(1, 9) * c**2 + a) * x**2 - QQ(2, 9) * c * (a + 1) * z
            - QQ(2, 3) * (a + 1) * y - QQ(2, 27) * c**2 * (a + 1) * x)
    phi4 = phi2 - h * d * y**2 + QQ(1, 3) * (a + 1) * y
    phi5 = QQ(1, 4) * x**4 - h * z**2 - QQ(1, 3) * (a + 1) * x**3 + x * y + h * a * x**2
    return {'phi1': phi1, 'phi2': phi2, 'phi3': phi3, 'phi4': phi4, 'phi5': phi5, 'y': y}


def _b_row12():
    return QQ(2, 27) * c**3 - QQ(1, 3) * c


def _b_row34():
    return QQ(2, 27) * c**3 - QQ(1, 9) * a**2 * c + QQ(1, 9) * a * c - QQ(1, 9) * c


_ALTERNATE_RELATION = c**2 + 3 * a**2 - 12 * a + 3


@dataclass
class _Row:
    row: int
    name: str
    k: object
    constraints: ParamConstraint
    instance: object
    alternate: ParamConstraint = None
    off_locus: ParamPoint = None


def _rows():
    phi = table1_polynomials()
    k = QQ(4, 3) * c
    nonzero12 = [c, b]
    nonzero34 = [c, b, a + 1]
    rows = [
        _Row(1, 'phi1', k, ParamConstraint(
            [('a', -1), ('b', _b_row12()), ('d', -c, b)], [], nonzero12,
            'a = -1, bd = -c, b = (2/27)c^3 - (1/3)c, c != 0'),
             ParamPoint(-1, 1, 3, -3)),
        _Row(2, 'phi3', k, ParamConstraint(
            [('a', -1), ('b', _b_row12()), ('d', -QQ(2, 3) * c, b)], [], nonzero12,
            'a = -1, bd = -(2/3)c, b = (2/27)c^3 - (1/3)c, c != 0'),
             ParamPoint(-1, 1, 3, -2)),
        _Row(3, 'phi2', k, ParamConstraint(
            [('b', _b_row34()), ('d', -c, b)], [2 * c**2 + 3 * a**2 - 12 * a + 3], nonzero34,
            'a != -1, bd = -c, b = (2/27)c^3 - (1/9)a^2c + (1/9)ac - (1/9)c, '
            '2c^2 + 3a^2 - 12a + 3 = 0'),
             Sqrt2Point((QQ(7, 2), 0), (0, QQ(-3, 4)), (0, QQ(3, 4)), (1, 0)),
             ParamConstraint([('b', _b_row34()), ('d', -c, b)], [_ALTERNATE_RELATION], nonzero34,
                             'c^2 + 3a^2 - 12a + 3 = 0'),
             ParamPoint(2, 1, 3, -3)),
        _Row(4, 'phi4', k, ParamConstraint(
            [('b', _b_row34()), ('d', -QQ(2, 3) * c, b)], [2 * c**2 + a**2 - 7 * a + 1],
            nonzero34,
            'a != -1, bd = -(2/3)c, b = (2/27)c^3 - (1/9)a^2c + (1/9)ac - (1/9)c, '
            '2c^2 + a^2 - 7a + 1 = 0'),
             Sqrt2Point((5, 0), (0, -3), (0, QQ(3, 2)), (QQ(1, 3), 0)),
             ParamConstraint([('b', _b_row34()), ('d', -QQ(2, 3) * c, b)], [_ALTERNATE_RELATION],
                             nonzero34, 'c^2 + 3a^2 - 12a + 3 = 0'),
             ParamPoint(2, 1, 3, -2)),
        _Row(5, 'y', RING.zero, ParamConstraint([('b', 0), ('c', 0)], label='b = c = 0'),
             ParamPoint(Fraction(1, 4), 0, 0, 1)),
        _Row(6, 'phi5', RING.zero, ParamConstraint([('b', 0), ('c', 0)], label='b = c = 0'),
             ParamPoint(Fraction(1, 4), 0, 0, 1)),
    ]
    return phi, rows


@dataclass
class DarbouxCertificate:
    row: int
    name: str
    f: object
    k: Cofactor
    constraints: ParamConstraint
    residual_witness: object
    irreducible: bool
    instance: object = None
    instance_valid: bool = False

    @property
    def valid(self):
        return not self.residual_witness

    def to_json(self):
        return {'row': self.row, 'name': self.name, 'f': to_string(self.f), 'k': str(self.k),
                'constraints': self.constraints.to_json(),
                'residual_witness': to_string(self.residual_witness),
                'irreducible': self.irreducible,
                'instance': None if self.instance is None else self.instance.to_json(),
                'instance_valid': self.instance_valid}


def table1_certificates():
    """Builds and verifies the six generators.

    Rows 3 and 4 carry two candidate conditions; both are verified and the report records which
    one reduces the residual to zero. The rational point (a, c) = (2, 3) lies on the alternate
    relation c^2 + 3a^2 - 12a + 3 = 0 but not on the tabulated one, and the report shows the
    residual the relation leaves there. Certificates are emitted with the condition that verified.

    Each certificate is also checked at an instance on its locus. The loci of rows 3 and 4 have no
    rational point, so their instances lie in Q(sqrt 2); irreducibility is decided there.

    Returns:
        tuple: (list of DarbouxCertificate, list of discrepancy dicts)
    """
    phi, rows = _rows()
    V = fn_system()
    certificates = []
    report = []
    for row in rows:
        f = phi[row.name]
        chosen = row.constraints
        result = verify(f, row.k, V, chosen)
        if row.alternate is not None:
            alternate = verify(f, row.k, V, row.alternate)
            inst = row.off_locus
            probe = verify(inst.apply(f), inst.apply(row.k), inst.apply_field(V))
            if result.valid:
                verdict = 'stated' if not alternate.valid else 'both'
            else:
                verdict = 'alternate' if alternate.valid else 'neither'
            report.append({
                'row': row.row, 'f': row.name,
                'stated': {'condition': to_string(row.constraints.relations[0]) + ' = 0',
                           'valid': result.valid, 'residual': to_string(result.residual)},
                'alternate': {'condition': to_string(row.alternate.relations[0]) + ' = 0',
                              'valid': alternate.valid,
                              'residual': to_string(alternate.residual)},
                'probe': {'point': inst.to_json(), 'valid': probe.valid,
                          'residual': to_string(probe.residual)},
                'verdict': verdict})
            if verdict == 'alternate':
                chosen, result = row.alternate, alternate
            logger.info('row %d: stated condition %s, alternate condition %s', row.row,
                        'holds' if report[-1]['stated']['valid'] else 'fails',
                        'holds' if alternate.valid else 'fails')
        on_instance = not row.instance.apply(verify(f, row.k, V).residual)
        if not on_instance:
            logger.warning('row %d: relation fails at %s', row.row, row.instance.to_json())
        irreducible = on_instance and is_irreducible(row.instance.apply(f))
        certificates.append(DarbouxCertificate(row.row, row.name, f, Cofactor(row.k), chosen,
                                               result.residual, irreducible, row.instance,
                                               on_instance))
    return certificates, report


def render_table1(certificates, report):
    lines = ['row  f     cofactor     residual  irreducible  conditions']
    for cert in certificates:
        lines.append('{:<4d} {:<5s} {:<12s} {:<9s} {:<12s} {:s}'.format(
            cert.row, cert.name, str(cert.k), 'zero' if cert.valid else 'NONZERO',
            'yes' if cert.irreducible else 'no', cert.constraints.label))
    for entry in report:
        lines.append('')
        lines.append('row {:d} ({:s}): verdict {:s}'.format(entry['row'], entry['f'],
                                                             entry['verdict']))
        for key in ('stated', 'alternate'):
            item = entry[key]
            lines.append('  {:<9s} {:s}: {:s}'.format(key, item['condition'],
                                                      'residual 0' if item['valid'] else
                                                      'residual ' + item['residual']))
        probe = entry['probe']
        lines.append('  probe at (a, b, c, d) = ({a}, {b}, {c}, {d}): '.format(**probe['point'])
                     + ('valid' if probe['valid'] else 'residual ' + probe['residual']))
    return '\n'.join(lines)


####################################################################################################


def in_biological_region(params, wave_speed=None):
    """0 < a < 1/2, d > 0 and eps = b c > 0.

    wave_speed 'positive' additionally demands c > 0, 'negative' demands c < 0, None accepts
    either sign.
    """
    if not (0 < params.a < Fraction(1, 2) and params.d > 0 and params.b * params.c > 0):
        return False
    if wave_speed == 'positive':
        return params.c > 0
    if wave_speed == 'negative':
        return params.c < 0
    if wave_speed is None:
        return True
    raise UsageError('wave_speed must be positive, negative or None, got {!r}'.format(wave_speed))


def _small_rational(rng, lo=1, hi=9):
    return Fraction(rng.randint(lo, hi), rng.randint(1, 4))


def sample_biological_point(rng, wave_speed='positive'):
    """Draws a ParamPoint inside the biological region from a random.Random instance."""
    a_value = Fraction(rng.randint(1, 49), 100)
    c_value = _small_rational(rng)
    if wave_speed == 'negative':
        c_value = -c_value
    elif wave_speed is None and rng.random() < 0.5:
        c_value = -c_value
    eps = _small_rational(rng)
    d_value = _small_rational(rng)
    return ParamPoint(a_value, eps / c_value, c_value, d_value)


def random_param_point(rng, zero_bc=False):
    """Random small rationals; b and c are both nonzero unless zero_bc, which sets them to 0."""
    sign = lambda: rng.choice((-1, 1))
    a_value = sign() * Fraction(rng.randint(0, 9), rng.randint(1, 4))
    d_value = sign() * _small_rational(rng)
    if zero_bc:
        return ParamPoint(a_value, 0, 0, d_value)
    return ParamPoint(a_value, sign() * _small_rational(rng), sign() * _small_rational(rng),
                      d_value)
