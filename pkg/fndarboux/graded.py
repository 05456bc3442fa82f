"""Weight-graded linear algebra for the operator L and the cascade it drives.

A Darboux polynomial f of the assistant system, moved into scaled coordinates and expanded in
powers of alpha, splits into weight-homogeneous pieces F_0, F_1, ... of weights l, l-1, ... that
satisfy a triangular family of equations

    L[F_j] = k1 x F_j + k0 F_{j-1} + bd y dF_{j-1}/dy + ((a+1)x^2 - y - cz) dF_{j-1}/dz
             - bx dF_{j-2}/dy - ax dF_{j-2}/dz

for j = 1 .. l+3 (with F_j = 0 for j > l). Each stage is solved here by exact linear algebra on the
slice of monomials of one weight. A right-hand side outside the image of L is an obstruction; the
cokernel coordinates say which combination fails. Kernel freedom at a stage is carried as fresh
unknowns t1, t2, ... that later obstruction conditions may pin down.
"""


import functools
import logging
from dataclasses import dataclass, field as dc_field
from enum import Enum

from sympy.polys.domains import QQ

from fndarboux.darboux_exceptions import *
from fndarboux.expr import RING, x, y, z, const, to_qq, to_string, weight_degree
from fndarboux.field import op_L
from fndarboux.linalg import Solver, rref


__all__ = ['GradedSlice', 'GradedMap', 'SolveResult', 'CascadeStage', 'CascadeState',
           'AnsatzFamily', 'Parity', 'graded_map', 'kernel_of_L', 'solve_L', 'cascade',
           'characteristic_invariants', 'characteristic_basis', 'kernel_dimension',
           'top_kernel_ansatz']


logger = logging.getLogger(__name__)


class GradedSlice:
    """State monomials x^i y^j z^k with i + 2j + 2k = weight, in decreasing lex order.

    Only the default weight exponents (1, 2, 2) are supported. Negative weights give an empty
    slice.
    """

    def __init__(self, weight):
        self.weight = weight
        basis = []
        if weight >= 0:
            for j in range(weight // 2 + 1):
                for k in range((weight - 2 * j) // 2 + 1):
                    basis.append((weight - 2 * j - 2 * k, j, k))
        self.basis = sorted(basis, reverse=True)
        self.index = {mono: i for i, mono in enumerate(self.basis)}

    def __len__(self):
        return len(self.basis)

    def monomial(self, idx):
        i, j, k = self.basis[idx]
        return x**i * y**j * z**k

    def coordinates(self, poly):
        """Coordinates of a numeric weight-homogeneous polynomial in this basis."""
        coords = {}
        for monom, coeff in poly.iterterms():
            if any(monom[3:]):
                raise GradedException('slice coordinates need numeric coefficients, got {:s}'
                                      .format(to_string(poly)))
            idx = self.index.get(monom[:3])
            if idx is None:
                raise GradedException('{:s} does not lie in the weight {:d} slice'.format(
                    to_string(poly), self.weight))
            coords[idx] = coeff
        return coords

    def poly(self, vec):
        terms = {}
        for idx, coeff in vec.items():
            if coeff:
                terms[self.basis[idx] + (0,) * (RING.ngens - 3)] = coeff
        return RING.from_dict(terms)


class GradedMap:
    """The operator F -> L[F] - k1 x F from the weight w slice to the weight w+1 slice.

    The matrix column for a source monomial holds the coordinates of its image in the target
    basis. m and k1 are fixed rationals.
    """

    def __init__(self, weight, m_value=0, k1=0):
        self.source = GradedSlice(weight)
        self.target = GradedSlice(weight + 1)
        self.m_value = to_qq(m_value)
        self.k1 = to_qq(k1)
        self.matrix = {}
        for col in range(len(self.source)):
            mono = self.source.monomial(col)
            image = op_L(mono, self.m_value) - const(self.k1) * x * mono
            for row, val in self.target.coordinates(image).items():
                self.matrix[(row, col)] = val
        self.shape = (len(self.target), len(self.source))
        self._solver = None

    @property
    def solver(self):
        if self._solver is None:
            self._solver = Solver(self.matrix, self.shape)
        return self._solver

    def apply(self, F):
        return op_L(F, self.m_value) - const(self.k1) * x * F

    def rank(self):
        return self.solver.rank

    def kernel(self):
        return [self.source.poly(vec) for vec in self.solver.kernel()]


@functools.lru_cache(maxsize=256)
def _cached_map(weight, m_value, k1):
    return GradedMap(weight, m_value, k1)


def graded_map(weight, m_value=0, k1=0):
    return _cached_map(weight, to_qq(m_value), to_qq(k1))


def kernel_of_L(weight, m_value=0, k1=0):
    """Exact basis of {F of the given weight : L[F] = k1 x F}.

    Basis element number i has coefficient 1 on the i-th x-free monomial y^p z^(2q) of the
    slice and 0 on the other x-free monomials.
    """
    return graded_map(weight, m_value, k1).kernel()


@dataclass
class SolveResult:
    """Outcome of one graded solve: a particular solution or the cokernel obstruction."""
    solution: object
    kernel: list
    obstruction: list

    @property
    def solvable(self):
        return not any(self.obstruction)


def solve_L(g, weight, m_value=0, k1=0):
    """Solves L[F] - k1 x F = g for F of the given weight.

    Args:
        g (Poly): Numeric weight-homogeneous right-hand side of weight `weight + 1`.
        weight (int): Weight of the unknown F.
        m_value: Rational value of m.
        k1: Rational coefficient of the x F coupling.

    Returns:
        SolveResult: `solution` is the particular solution with free columns set to zero (None
        when g is obstructed), `kernel` the freedom, `obstruction` the cokernel coordinates of g.
    """
    gmap = graded_map(weight, m_value, k1)
    coords = gmap.target.coordinates(g)
    obstruction = gmap.solver.obstruction(coords)
    kernel = gmap.kernel()
    if any(obstruction):
        return SolveResult(None, kernel, obstruction)
    return SolveResult(gmap.source.poly(gmap.solver.particular(coords)), kernel, obstruction)


####################################################################################################


class _Affine:
    """A polynomial depending affinely on the cascade unknowns: const + sum t_u * parts[u]."""

    def __init__(self, const_part, parts=None):
        self.const = const_part
        self.parts = dict(parts or {})

    @classmethod
    def zero(cls):
        return cls(RING.zero)

    def map(self, fn):
        parts = {u: fn(p) for u, p in self.parts.items()}
        return _Affine(fn(self.const), {u: p for u, p in parts.items() if p})

    def __add__(self, other):
        parts = dict(self.parts)
        for u, p in other.parts.items():
            parts[u] = parts.get(u, RING.zero) + p
        return _Affine(self.const + other.const, {u: p for u, p in parts.items() if p})

    def __sub__(self, other):
        return self + other.map(lambda p: -p)

    def substitute(self, uid, value, coeffs):
        """Replaces t_uid by value + sum coeffs[u] * t_u."""
        part = self.parts.get(uid)
        if part is None:
            return self
        parts = {u: p for u, p in self.parts.items() if u != uid}
        for u, coeff in coeffs.items():
            parts[u] = parts.get(u, RING.zero) + part * const(coeff)
        return _Affine(self.const + part * const(value), {u: p for u, p in parts.items() if p})

    def format(self, names):
        out = to_string(self.const)
        for u in sorted(self.parts):
            out += ' + {:s}*({:s})'.format(names[u], to_string(self.parts[u]))
        return out


@dataclass
class CascadeStage:
    index: int
    weight: int
    rhs: str
    solution: str = None
    kernel_freedom: list = dc_field(default_factory=list)
    conditions: list = dc_field(default_factory=list)
    obstruction: list = None

    def to_json(self):
        return {'stage': self.index, 'weight': self.weight, 'rhs': self.rhs,
                'solution': self.solution, 'kernel_freedom': self.kernel_freedom,
                'conditions': self.conditions, 'obstruction': self.obstruction}


@dataclass
class CascadeState:
    """A finished cascade run.

    `chain` holds F_0 .. F_l with every still-free unknown set to zero, and is empty when an
    obstruction stopped the run.
    """
    params: object
    k0: object
    k1: object
    weight: int
    F0: object
    chain: list
    stages: list
    free_constants: list
    obstruction: tuple = None

    @property
    def completed(self):
        return self.obstruction is None

    @property
    def polynomial(self):
        """The Darboux polynomial f = F_0 + ... + F_l of the assistant system."""
        if self.obstruction is not None:
            return None
        return sum(self.chain, RING.zero)

    def to_json(self):
        return {'params': self.params.to_json(), 'k0': str(self.k0), 'k1': str(self.k1),
                'weight': self.weight, 'F0': to_string(self.F0),
                'stages': [stage.to_json() for stage in self.stages],
                'free_constants': self.free_constants,
                'obstruction': None if self.obstruction is None else
                               {'stage': self.obstruction[0], 'vector': self.obstruction[1]},
                'polynomial': None if self.polynomial is None else to_string(self.polynomial)}

    def trace(self):
        lines = ['cascade at {}, k = {} x + {}, F0 = {:s} (weight {:d})'.format(
            self.params, self.k1, self.k0, to_string(self.F0), self.weight)]
        for stage in self.stages:
            lines.append('  stage {:d} (weight {:d}): L[F] - k1 x F = {:s}'.format(
                stage.index, stage.weight, stage.rhs))
            for cond in stage.conditions:
                lines.append('    condition: {:s}'.format(cond))
            if stage.obstruction is not None:
                lines.append('    OBSTRUCTION, cokernel coordinates [{:s}]'.format(
                    ', '.join(stage.obstruction)))
                continue
            lines.append('    F_{:d} = {:s}'.format(stage.index, stage.solution))
            if stage.kernel_freedom:
                lines.append('    kernel freedom: {:s}'.format(', '.join(stage.kernel_freedom)))
        if self.completed:
            lines.append('  free constants set to 0: {:s}'.format(
                ', '.join(self.free_constants) if self.free_constants else 'none'))
            lines.append('  f = {:s}'.format(to_string(self.polynomial)))
        return '\n'.join(lines)


def _stage_rhs(prev, prev2, params, k0):
    bd = const(params.b * params.d)
    shift = const(params.a + 1) * x**2 - y - const(params.c) * z
    bx = const(params.b) * x
    ax = const(params.a) * x
    rhs = prev.map(lambda p: const(k0) * p + bd * y * p.diff(y) + shift * p.diff(z))
    return rhs - prev2.map(lambda p: bx * p.diff(y) + ax * p.diff(z))


def _solve_conditions(rows, unknowns):
    """Row-reduces linear conditions const + sum coef_u t_u = 0.

    Returns:
        tuple: (consistent, substitutions) with substitutions a list of
        (uid, value, {free uid: coeff}) meaning t_uid = value + sum coeff * t_free.
    """
    cols = {u: i for i, u in enumerate(unknowns)}
    n = len(unknowns)
    dok = {}
    for r, (const_val, coefs) in enumerate(rows):
        for u, val in coefs.items():
            dok[(r, cols[u])] = val
        dok[(r, n)] = -const_val
    entries, pivots = rref(dok, (len(rows), n + 1))
    if n in pivots:
        return False, []
    subs = []
    for r, col in enumerate(pivots):
        uid = unknowns[col]
        value = entries.get((r, n), QQ(0))
        coeffs = {}
        for (rr, cc), val in entries.items():
            if rr == r and cc < n and cc != col and val:
                coeffs[unknowns[cc]] = -val
        subs.append((uid, value, coeffs))
    return True, subs


def cascade(F0, params, k0, k1=0, l=None):
    """Runs the graded cascade from a top component F0.

    Args:
        F0 (Poly): Weight-homogeneous polynomial of weight l in x, y, z with L[F0] = k1 x F0.
        params (ParamPoint): Numeric a, b, c, d, m.
        k0: Constant part of the cofactor k = k1 x + k0.
        k1: Coefficient of x in the cofactor.
        l (int): Weight of F0; inferred when omitted.

    Returns:
        CascadeState: The completed chain, or the first stage whose right-hand side lies outside
        the image of the stage operator.

    Raises:
        CascadePreconditionError: When F0 is not weight-homogeneous of weight l or is not
            annihilated by L - k1 x.
    """
    F0 = params.apply(F0)
    k0, k1 = to_qq(k0), to_qq(k1)
    try:
        deg = weight_degree(F0)
    except NotHomogeneousError as e:
        raise CascadePreconditionError('F0 must be weight homogeneous: {}'.format(e)) from None
    if l is None:
        l = deg
    if deg != l:
        raise CascadePreconditionError('F0 has weight {:d}, expected {:d}'.format(deg, l))
    top = graded_map(l, params.m, k1)
    if top.apply(F0):
        raise CascadePreconditionError('L[F0] - k1 x F0 = {:s} is not zero'.format(
            to_string(top.apply(F0))))

    names = {}
    chain = [_Affine(F0)]
    stages = []

    def fresh():
        uid = len(names)
        names[uid] = 't{:d}'.format(uid + 1)
        return uid

    for j in range(1, l + 4):
        weight = l - j
        prev2 = chain[j - 2] if j >= 2 else _Affine.zero()
        rhs = _stage_rhs(chain[j - 1], prev2, params, k0)
        gmap = graded_map(weight, params.m, k1)
        stage = CascadeStage(j, weight, rhs.format(names))
        stages.append(stage)

        rows = []
        for row in gmap.solver.cokernel:
            const_val = Solver._dot(row, gmap.target.coordinates(rhs.const))
            coefs = {}
            for u, part in rhs.parts.items():
                val = Solver._dot(row, gmap.target.coordinates(part))
                if val:
                    coefs[u] = val
            if const_val or coefs:
                rows.append((const_val, coefs))

        if rows:
            unknowns = sorted({u for _, coefs in rows for u in coefs})
            consistent, subs = _solve_conditions(rows, unknowns)
            if not consistent:
                g0 = gmap.target.coordinates(rhs.const)
                vector = [str(Solver._dot(row, g0)) for row in gmap.solver.cokernel]
                stage.obstruction = vector
                logger.info('cascade obstructed at stage %d (weight %d)', j, weight)
                return CascadeState(params, k0, k1, l, F0, [], stages,
                                    [names[u] for u in sorted(names)], (j, vector))
            for uid, value, coeffs in subs:
                chain = [F.substitute(uid, value, coeffs) for F in chain]
                rhs = rhs.substitute(uid, value, coeffs)
                rel = ' + '.join('{}*{:s}'.format(cv, names[u]) for u, cv in coeffs.items())
                stage.conditions.append('{:s} = {}{:s}'.format(
                    names[uid], value, ' + ' + rel if rel else ''))
                del names[uid]

        Fj = _Affine(gmap.source.poly(gmap.solver.particular(
            gmap.target.coordinates(rhs.const))))
        for u, part in rhs.parts.items():
            Fj = Fj + _Affine(RING.zero, {u: gmap.source.poly(
                gmap.solver.particular(gmap.target.coordinates(part)))})
        for kvec in gmap.kernel():
            uid = fresh()
            Fj = Fj + _Affine(RING.zero, {uid: kvec})
            stage.kernel_freedom.append(names[uid])
        chain.append(Fj)
        stage.solution = Fj.format(names)
        logger.debug('stage %d: F = %s', j, stage.solution)

    free = [names[u] for u in sorted(names)]
    final = [F.const for F in chain[:l + 1]]
    logger.info('cascade completed with %d free constants', len(free))
    return CascadeState(params, k0, k1, l, F0, final, stages, free)


####################################################################################################


def characteristic_invariants(m_value=0):
    """v = y - m x^2 / 2 and w = x^4 / 4 - z^2 / 2, the polynomial invariants of L."""
    mv = const(to_qq(m_value))
    v = y - mv * x**2 * QQ(1, 2)
    w = x**4 * QQ(1, 4) - z**2 * QQ(1, 2)
    return v, w


def characteristic_basis(weight, m_value=0):
    """Products v^i w^j with 2i + 4j = weight."""
    v, w = characteristic_invariants(m_value)
    basis = []
    for j in range(weight // 4 + 1):
        rest = weight - 4 * j
        if rest % 2 == 0:
            basis.append(v**(rest // 2) * w**j)
    return basis


def kernel_dimension(weight):
    """#{(i, j) >= 0 : 2i + 4j = weight}"""
    return sum(1 for j in range(weight // 4 + 1) if (weight - 4 * j) % 2 == 0)


class Parity(Enum):
    ODD = 'odd'
    EVEN = 'even'


class AnsatzFamily:
    """sum_i a_i * members[i] with unknown coefficients named in `unknowns`."""

    def __init__(self, unknowns, members, weight):
        self.unknowns = unknowns
        self.members = members
        self.weight = weight

    def __len__(self):
        return len(self.members)

    def instantiate(self, values):
        """Evaluates the family at {unknown name: rational}; missing unknowns count as 0."""
        total = RING.zero
        for name, member in zip(self.unknowns, self.members):
            if name in values:
                total += const(values[name]) * member
        return total


def top_kernel_ansatz(n, parity, m_value=0):
    """Top-component families built from the invariants v and w.

    The odd form sum_{i=1..n} a_i v^(2i-1) w^(n-i) has weight 4n-2; the even form
    sum_{i=0..n} a_i v^(2i) w^(n-i) has weight 4n.
    """
    parity = Parity(parity)
    v, w = characteristic_invariants(m_value)
    if parity is Parity.ODD:
        if n < 1:
            raise GradedException('odd ansatz needs n >= 1')
        idx = range(1, n + 1)
        members = [v**(2 * i - 1) * w**(n - i) for i in idx]
        weight = 4 * n - 2
    else:
        if n < 0:
            raise GradedException('even ansatz needs n >= 0')
        idx = range(0, n + 1)
        members = [v**(2 * i) * w**(n - i) for i in idx]
        weight = 4 * n
    return AnsatzFamily(['a{:d}'.format(i) for i in idx], members, weight)
