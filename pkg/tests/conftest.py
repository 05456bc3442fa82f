import random
from fractions import Fraction

import pytest
from sympy.polys.domains import QQ

from fndarboux.expr import RING, SYMBOLS, parse
from fndarboux.params import ParamPoint
from fndarboux.darboux import table1_polynomials


SEED = 20240917


def random_poly(rng, max_terms=4, max_exp=2, symbols=SYMBOLS[:6]):
    """A small random polynomial over the given symbols with coefficients p/q, |p| <= 5."""
    p = RING.zero
    gens = [RING.gens[SYMBOLS.index(s)] for s in symbols]
    for _ in range(rng.randint(1, max_terms)):
        term = RING.ground_new(QQ(rng.randint(-5, 5), rng.randint(1, 3)))
        for g in gens:
            term *= g**rng.randint(0, max_exp)
        p += term
    return p


@pytest.fixture
def rng():
    return random.Random(SEED)


@pytest.fixture
def phi():
    return table1_polynomials()


@pytest.fixture
def row1_point():
    return ParamPoint(-1, 1, 3, -3)


@pytest.fixture
def row2_point():
    return ParamPoint(-1, 1, 3, -2)


@pytest.fixture
def integrable_point():
    return ParamPoint(Fraction(1, 4), 0, 0, 1)


@pytest.fixture
def biological_point():
    return ParamPoint(Fraction(1, 4), 1, 1, 1)


@pytest.fixture
def phi1_row1():
    return parse('1/2*x^4 - z^2 + 2*x*y + 2*x*z')
