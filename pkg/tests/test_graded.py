import json
import random
from fractions import Fraction

import pytest
from sympy.polys.domains import QQ

from fndarboux.darboux_exceptions import *
from fndarboux.expr import parse, weight_degree
from fndarboux.expr import x, y, z
from fndarboux.field import op_L, fn_system
from fndarboux.darboux import random_param_point, span_contains, verify
from fndarboux.graded import *
from fndarboux.linalg import rank

from conftest import SEED


def _random_slice_poly(rng, weight):
    s = GradedSlice(weight)
    return s.poly({i: QQ(rng.randint(-5, 5), rng.randint(1, 3)) for i in range(len(s))})


class TestSlices:
    def test_slice_basis(self):
        assert GradedSlice(3).basis == [(3, 0, 0), (1, 1, 0), (1, 0, 1)]
        assert len(GradedSlice(0)) == 1
        assert len(GradedSlice(-1)) == 0

    def test_coordinates(self):
        s = GradedSlice(2)
        p = parse('x^2 - 3*z')
        assert s.poly(s.coordinates(p)) == p

    def test_wrong_weight(self):
        with pytest.raises(GradedException):
            GradedSlice(2).coordinates(x)

    def test_symbolic_coefficient(self):
        with pytest.raises(GradedException):
            GradedSlice(2).coordinates(parse('a*y'))


class TestKernel:
    @pytest.mark.parametrize('m_value', [0, 1, -2])
    def test_dimension(self, m_value):
        for weight in range(0, 21):
            kernel = kernel_of_L(weight, m_value)
            assert len(kernel) == kernel_dimension(weight), weight
            for F in kernel:
                assert op_L(F, m_value) == 0

    @pytest.mark.parametrize('m_value', [0, 1, -2])
    def test_spanned_by_invariants(self, m_value):
        for weight in range(2, 21, 2):
            kernel = kernel_of_L(weight, m_value)
            basis = characteristic_basis(weight, m_value)
            assert len(basis) == len(kernel)
            for F in basis:
                assert span_contains(kernel, F)

    def test_odd_weights(self):
        for weight in range(1, 20, 2):
            assert kernel_dimension(weight) == 0
            assert kernel_of_L(weight) == []

    def test_dimension_formula(self):
        assert [kernel_dimension(w) for w in range(0, 13, 2)] == [1, 1, 2, 2, 3, 3, 4]

    @pytest.mark.parametrize('k1', [1, -1, QQ(1, 2), 3])
    def test_nonzero_k1_has_no_kernel(self, k1):
        for weight in range(0, 13):
            for m_value in (0, 1):
                assert kernel_of_L(weight, m_value, k1) == []


class TestSolve:
    def test_solvable(self):
        result = solve_L(z, 1)
        assert result.solvable
        assert result.solution == x

    def test_obstructed(self):
        result = solve_L(y, 1)
        assert not result.solvable
        assert result.solution is None

    def test_particular_plus_kernel(self):
        g = op_L(parse('x^2*y + 3*y*z'), 0)
        result = solve_L(g, 4)
        assert result.solvable
        assert op_L(result.solution, 0) == g
        assert len(result.kernel) == kernel_dimension(4)

    def test_round_trip(self):
        rng = random.Random(SEED)
        for _ in range(100):
            weight = rng.randint(0, 10)
            m_value = rng.choice((0, 1, -2, QQ(1, 3)))
            k1 = rng.choice((0, 0, 1, QQ(-1, 2)))
            F = _random_slice_poly(rng, weight)
            G = op_L(F, m_value) - k1 * x * F
            result = solve_L(G, weight, m_value, k1)
            assert result.solvable, (weight, m_value, k1)
            particular = result.solution
            assert op_L(particular, m_value) - k1 * x * particular == G
            assert span_contains(result.kernel, particular - F)

    def test_obstruction_matches_rank(self):
        rng = random.Random(SEED)
        seen = set()
        for _ in range(100):
            weight = rng.randint(0, 10)
            m_value = rng.choice((0, 1, -2))
            k1 = rng.choice((0, 1))
            if rng.random() < 0.5:
                F = _random_slice_poly(rng, weight)
                G = op_L(F, m_value) - k1 * x * F
            else:
                G = _random_slice_poly(rng, weight + 1)
            gmap = graded_map(weight, m_value, k1)
            augmented = dict(gmap.matrix)
            for row, val in gmap.target.coordinates(G).items():
                augmented[(row, gmap.shape[1])] = val
            nrows, ncols = gmap.shape
            consistent = rank(augmented, (nrows, ncols + 1)) == rank(gmap.matrix, gmap.shape)
            result = solve_L(G, weight, m_value, k1)
            assert result.solvable == consistent, (weight, m_value, k1)
            assert (result.solution is not None) == consistent
            seen.add(consistent)
        assert seen == {True, False}


class TestCascade:
    def test_reproduces_phi1(self, row1_point, phi1_row1):
        state = cascade(parse('1/2*x^4 - z^2'), row1_point, 4)
        assert state.completed
        assert state.polynomial == phi1_row1
        assert 'f = ' in state.trace()

    def test_biological_point_obstructed(self, biological_point):
        state = cascade(parse('1/2*x^4 - z^2'), biological_point, Fraction(4, 3))
        assert not state.completed
        assert state.polynomial is None
        stage, vector = state.obstruction
        assert stage >= 2
        assert any(v != '0' for v in vector)
        assert 'OBSTRUCTION' in state.trace()

    @pytest.mark.parametrize('n', [1, 2, 3])
    def test_powers_of_phi5(self, n, phi, integrable_point):
        _, w = characteristic_invariants()
        state = cascade(w**n, integrable_point, 0)
        assert state.completed
        assert state.polynomial == integrable_point.apply(phi['phi5'])**n

    @pytest.mark.parametrize('p, q', [(1, 1), (2, 1), (1, 2)])
    def test_products_with_y(self, p, q, phi, integrable_point):
        _, w = characteristic_invariants()
        state = cascade(y**p * w**q, integrable_point, 0)
        assert state.polynomial == y**p * integrable_point.apply(phi['phi5'])**q

    @pytest.mark.parametrize('k0', [0, Fraction(4, 3), 2])
    def test_y_is_obstructed_off_integrable_locus(self, k0, biological_point):
        state = cascade(y, biological_point, k0)
        assert state.obstruction[0] == 1

    def test_odd_ansatz_with_nonzero_k0_obstructed(self):
        rng = random.Random(SEED)
        for _ in range(30):
            point = random_param_point(rng)
            n = rng.choice((1, 2))
            family = top_kernel_ansatz(n, 'odd')
            values = {name: QQ(rng.choice((-1, 1)) * rng.randint(1, 5), rng.randint(1, 3))
                      for name in family.unknowns}
            k0 = QQ(rng.choice((-1, 1)) * rng.randint(1, 9), rng.randint(1, 4))
            state = cascade(family.instantiate(values), point, k0)
            assert not state.completed, (point, n, k0)
            assert state.obstruction[0] <= 2, (point, n, k0)

    def test_y_passes_stage1_when_k0_cancels(self):
        rng = random.Random(SEED)
        for _ in range(10):
            point = random_param_point(rng)
            state = cascade(y, point, -point.b * point.d)
            assert state.obstruction[0] == 2

    def test_result_is_darboux(self, row1_point):
        state = cascade(parse('1/2*x^4 - z^2'), row1_point, 4)
        V = row1_point.apply_field(fn_system())
        assert verify(state.polynomial, 4, V).valid
        assert [weight_degree(F) for F in state.chain if F] == [4, 3]
        assert len(state.chain) == 5

    def test_json(self, row1_point):
        state = cascade(parse('1/2*x^4 - z^2'), row1_point, 4)
        obj = json.loads(json.dumps(state.to_json()))
        assert obj['obstruction'] is None
        assert obj['polynomial'] == '(1/2)*x^4 + 2*x*y + 2*x*z - z^2'
        assert obj['stages'][0]['stage'] == 1

    def test_not_homogeneous(self, row1_point):
        with pytest.raises(CascadePreconditionError):
            cascade(x + y, row1_point, 0)

    def test_not_in_kernel(self, row1_point):
        with pytest.raises(CascadePreconditionError):
            cascade(x**2, row1_point, 0)

    def test_wrong_weight(self, row1_point):
        with pytest.raises(CascadePreconditionError):
            cascade(y, row1_point, 0, l=4)


class TestAnsatz:
    def test_odd(self):
        family = top_kernel_ansatz(2, 'odd')
        v, w = characteristic_invariants()
        assert family.weight == 6
        assert family.unknowns == ['a1', 'a2']
        assert family.members == [v * w, v**3]

    def test_even(self):
        family = top_kernel_ansatz(1, Parity.EVEN)
        v, w = characteristic_invariants()
        assert family.weight == 4
        assert len(family) == 2
        assert family.instantiate({'a0': 1}) == w
        assert family.instantiate({'a0': 2, 'a1': QQ(-1, 2)}) == 2 * w - v**2 * QQ(1, 2)

    @pytest.mark.parametrize('n, parity', [(1, 'odd'), (3, 'odd'), (0, 'even'), (2, 'even')])
    def test_members_in_kernel(self, n, parity):
        family = top_kernel_ansatz(n, parity, m_value=1)
        for member in family.members:
            assert op_L(member, 1) == 0
            assert weight_degree(member) == family.weight

    def test_bad_order(self):
        with pytest.raises(GradedException):
            top_kernel_ansatz(0, 'odd')
        with pytest.raises(ValueError):
            top_kernel_ansatz(1, 'prime')
