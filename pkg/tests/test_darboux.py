import json
import random
from fractions import Fraction

import pytest
from sympy.polys.domains import QQ

from fndarboux.darboux_exceptions import *
from fndarboux.expr import RING, parse, to_string
from fndarboux.expr import x, y, z, a, b, c, d
from fndarboux.field import fn_system, assistant_system
from fndarboux.darboux import *
from fndarboux.darboux import _b_row12, _b_row34
from fndarboux.params import ParamPoint, Sqrt2Point, SQRT2_RING

from conftest import SEED


def _row1_constraints():
    return ParamConstraint([('a', -1), ('b', _b_row12()), ('d', -c, b)], [], [c, b])


class TestVerify:
    def test_phi1_symbolic_in_c(self, phi):
        result = verify(phi['phi1'], QQ(4, 3) * c, fn_system(), _row1_constraints())
        assert result.valid
        assert result.residual == 0

    def test_y_first_integral(self):
        result = verify(y, 0, fn_system(), ParamConstraint([('b', 0), ('c', 0)]))
        assert result.valid

    def test_invalid_residual(self):
        result = verify(x, 0, fn_system())
        assert not result.valid
        assert to_string(result.residual) == 'z'
        assert result.to_json() == {'valid': False, 'residual': 'z'}

    def test_string_cofactor(self, phi1_row1, row1_point):
        V = row1_point.apply_field(fn_system())
        assert verify(phi1_row1, '4', V).valid
        assert not verify(phi1_row1, '3', V).valid

    def test_from_point(self, phi, row1_point):
        constraints = ParamConstraint.from_point(row1_point)
        assert verify(phi['phi1'], QQ(4, 3) * c, fn_system(), constraints).valid

    def test_cofactor_degree(self):
        with pytest.raises(CertificateException):
            Cofactor('x^3')
        assert Cofactor('x^2*a^4') == Cofactor(parse('a^4*x^2'))


class TestConstraints:
    def test_not_triangular(self):
        with pytest.raises(ConstraintError):
            ParamConstraint([('b', c), ('c', b)])

    def test_self_reference(self):
        with pytest.raises(ConstraintError):
            ParamConstraint([('b', b + 1)])

    def test_assigned_twice(self):
        with pytest.raises(ConstraintError):
            ParamConstraint([('b', 1), ('b', 2)])

    def test_zero_denominator(self):
        with pytest.raises(ConstraintError):
            ParamConstraint([('d', 1, 0)])

    def test_undeclared_denominator(self):
        with pytest.raises(ConstraintError):
            verify(y, 0, fn_system(), ParamConstraint([('d', -c, b)]))

    def test_undeclared_leading_coefficient(self):
        with pytest.raises(ConstraintError):
            verify(y, 0, fn_system(), ParamConstraint(relations=[a * c - 1]))

    def test_inconsistent_relation(self):
        with pytest.raises(ConstraintError):
            verify(y, 0, fn_system(), ParamConstraint(relations=[RING.one]))

    def test_denominator_clearing(self):
        constraints = ParamConstraint([('d', -c, b)], nonvanishing=[b])
        # b*d + c vanishes once d = -c/b
        assert constraints.apply(b * d + c) == 0
        assert constraints.apply(d**2) == c**2

    def test_relation_reduction(self):
        constraints = ParamConstraint(relations=[a**2 - 2])
        assert constraints.reduce(a**3) == 2 * a
        assert constraints.reduce(a**2 * c - 2 * c) == 0

    def test_json(self):
        obj = _row1_constraints().to_json()
        assert obj['substitutions'][2] == {'symbol': 'd', 'num': '-c', 'den': 'b'}
        assert json.loads(json.dumps(obj)) == obj


class TestSolveCofactor:
    def test_phi5(self, phi, integrable_point):
        V = integrable_point.apply_field(fn_system())
        assert solve_cofactor(integrable_point.apply(phi['phi5']), V).k == 0

    def test_phi1(self, phi1_row1, row1_point):
        V = row1_point.apply_field(fn_system())
        assert solve_cofactor(phi1_row1, V) == Cofactor(4)

    def test_not_darboux(self):
        with pytest.raises(NotDarbouxError):
            solve_cofactor(x, fn_system())

    def test_zero(self):
        with pytest.raises(NotDarbouxError):
            solve_cofactor(RING.zero, fn_system())

    def test_symbolic(self, phi):
        V = fn_system().substitute({'a': -1, 'd': -3, 'c': 3, 'b': 1})
        assert str(solve_cofactor(phi['phi1'].compose(c, RING(3)), V)) == '4'


class TestSearch:
    def test_integrable_point(self, phi, integrable_point):
        results = search(fn_system(), 4, params=integrable_point)
        assert len(results) == 1
        assert results[0].k == 0
        basis = results[0].basis
        assert len(basis) == 5
        phi5 = integrable_point.apply(phi['phi5'])
        for f in (y, y**2, y**3, y**4, phi5):
            assert span_contains(basis, f)
        assert not span_contains(basis, x)

    def test_span_contains(self):
        assert span_contains([], RING.zero)
        assert not span_contains([], x)
        assert span_contains([x, y * z], 2 * x - QQ(1, 3) * y * z)
        assert not span_contains([x, y * z], x + z)
        assert span_contains([x, y], RING.zero)

    def test_row1_point(self, phi1_row1, row1_point):
        results = search(fn_system(), 4, params=row1_point)
        assert [to_string(r.k) for r in results] == ['4']
        assert len(results[0].basis) == 1
        assert span_contains(results[0].basis, phi1_row1)

    def test_biological_point_empty(self, biological_point):
        assert search(fn_system(), 4, params=biological_point) == []

    def test_parallel_matches_serial(self, row1_point):
        serial = search(fn_system(), 4, params=row1_point)
        parallel = search(fn_system(), 4, params=row1_point, threads=2)
        assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]

    def test_explicit_candidates(self, row1_point):
        V = row1_point.apply_field(fn_system())
        results = search(V, 4, candidates=['4', 'x'])
        assert len(results) == 1

    def test_candidates(self):
        assert fn_cofactor_candidates(3, 4) == [RING.zero, RING(4)]
        assert fn_cofactor_candidates(3, 5) == [RING.zero, RING(4), RING(8)]
        assert fn_cofactor_candidates(0, 8) == [RING.zero]

    def test_errors(self, row1_point):
        with pytest.raises(CertificateException):
            search(fn_system(), 0, params=row1_point)
        with pytest.raises(CertificateException):
            search(fn_system(), 4, candidates=[0])
        with pytest.raises(CertificateException):
            search(row1_point.apply_field(fn_system()), 4)

    def test_first_integrals(self, integrable_point, row1_point):
        assert len(first_integrals(fn_system(), 4, integrable_point)) == 5
        assert first_integrals(fn_system(), 4, row1_point) == []
        assert first_integrals(fn_system(), 0, integrable_point) == []

    def test_soundness(self, rng, integrable_point):
        V = integrable_point.apply_field(fn_system())
        (result,) = search(V, 4, candidates=[0])
        for _ in range(200):
            f = sum((b_i * QQ(rng.randint(-3, 3), rng.randint(1, 3)) for b_i in result.basis),
                    RING.zero)
            assert verify(f, result.k, V).valid

    def test_assistant_at_zero_m(self, row1_point):
        assert (search(assistant_system(), 4, params=row1_point)[0].to_json()
                == search(fn_system(), 4, params=row1_point)[0].to_json())


class TestDichotomy:
    def test_zero_b_and_c(self, phi):
        rng = random.Random(SEED)
        for _ in range(5):
            point = random_param_point(rng, zero_bc=True)
            integrals = first_integrals(fn_system(), 4, point)
            assert len(integrals) == 5
            assert span_contains(integrals, point.apply(phi['phi5']))

    def test_nonzero_b_and_c(self):
        rng = random.Random(SEED)
        for _ in range(20):
            point = random_param_point(rng)
            assert point.b != 0 and point.c != 0
            assert first_integrals(fn_system(), 4, point) == []

    def test_biological_region_degree_six(self):
        rng = random.Random(SEED)
        for _ in range(10):
            point = sample_biological_point(rng)
            assert in_biological_region(point, 'positive')
            assert search(fn_system(), 6, params=point) == []

    @pytest.mark.parametrize('k1', [1, -1, QQ(1, 2), QQ(-4, 3)])
    def test_cofactors_are_constant(self, k1):
        rng = random.Random(SEED)
        for _ in range(3):
            point = random_param_point(rng)
            candidates = [k0 + k1 * x for k0 in fn_cofactor_candidates(point.c, 4)]
            assert search(fn_system(), 3, candidates=candidates, params=point) == []


class TestProducts:
    def test_independent(self, phi, integrable_point):
        phi5 = integrable_point.apply(phi['phi5'])
        assert independent(y, phi5)
        assert not independent(phi5, 2 * phi5 + 1)
        assert not independent(y, y**3)

    def test_square(self, phi1_row1, row1_point):
        assert proposition1_check([(phi1_row1, 2)], fn_system(), row1_point)
        V = row1_point.apply_field(fn_system())
        assert solve_cofactor(phi1_row1**2, V).k == 8

    def test_additivity(self, rng, phi, integrable_point):
        pool = [y, phi['phi5']]
        for _ in range(200):
            factors = [(f, rng.randint(1, 2)) for f in pool if rng.random() < 0.7] or [(y, 1)]
            assert proposition1_check(factors, fn_system(), integrable_point)

    def test_non_darboux_factor(self, row1_point):
        with pytest.raises(NotDarbouxError):
            proposition1_check([(x, 1)], fn_system(), row1_point)

    def test_irreducible(self, phi1_row1, phi, integrable_point):
        assert is_irreducible(phi1_row1)
        assert not is_irreducible(y * integrable_point.apply(phi['phi5']))
        assert not is_irreducible(RING(3))


class TestTable1:
    @pytest.fixture(scope='class')
    def table(self):
        return table1_certificates()

    def test_all_valid(self, table):
        certificates, _ = table
        assert [cert.row for cert in certificates] == [1, 2, 3, 4, 5, 6]
        assert [cert.name for cert in certificates] == ['phi1', 'phi3', 'phi2', 'phi4', 'y',
                                                        'phi5']
        for cert in certificates:
            assert cert.valid, cert.row
            assert cert.irreducible, cert.row

    def test_cofactors(self, table):
        certificates, _ = table
        assert [str(cert.k) for cert in certificates] == ['(4/3)*c'] * 4 + ['0'] * 2

    def test_stated_conditions_hold(self, table):
        _, report = table
        assert [entry['row'] for entry in report] == [3, 4]
        for entry in report:
            assert entry['verdict'] == 'stated'
            assert entry['stated']['valid']
            assert not entry['alternate']['valid']
            assert entry['alternate']['residual'] != '0'

    def test_probe(self, table):
        _, report = table
        assert [entry['probe']['residual'] for entry in report] == ['2*x', '3*x']
        assert not any(entry['probe']['valid'] for entry in report)

    def test_json(self, table):
        certificates, report = table
        obj = json.loads(json.dumps([cert.to_json() for cert in certificates]))
        assert obj[0]['residual_witness'] == '0'
        assert obj[0]['instance'] == {'a': '-1', 'b': '1', 'c': '3', 'd': '-3', 'm': '0'}

    def test_render(self, table):
        text = render_table1(*table)
        assert 'verdict stated' in text
        assert 'NONZERO' not in text

    def test_instances_on_locus(self, table):
        certificates, _ = table
        for cert in certificates:
            assert cert.instance_valid, cert.row
            assert cert.irreducible, cert.row
        assert [type(cert.instance) for cert in certificates] == (
            [ParamPoint] * 2 + [Sqrt2Point] * 2 + [ParamPoint] * 2)
        assert certificates[2].to_json()['instance'] == {
            'a': '7/2', 'b': '-3/4*sqrt2', 'c': '3/4*sqrt2', 'd': '1'}

    def test_rational_instances(self, table):
        certificates, _ = table
        # rows 3 and 4 have no rational point on their locus
        for cert in certificates:
            if cert.row in (3, 4):
                continue
            point = cert.instance
            V = point.apply_field(fn_system())
            assert verify(point.apply(cert.f), point.apply(cert.k.k), V).valid


class TestBiological:
    def test_region(self, biological_point):
        assert in_biological_region(biological_point)
        assert in_biological_region(biological_point, 'positive')
        assert not in_biological_region(biological_point, 'negative')

    def test_negative_wave_speed(self):
        point = ParamPoint(Fraction(1, 4), -1, -1, 1)
        assert in_biological_region(point)
        assert not in_biological_region(point, 'positive')
        assert in_biological_region(point, 'negative')

    def test_outside(self):
        assert not in_biological_region(ParamPoint(Fraction(1, 2), 1, 1, 1))
        assert not in_biological_region(ParamPoint(Fraction(1, 4), 1, 1, 0))
        assert not in_biological_region(ParamPoint(Fraction(1, 4), -1, 1, 1))

    def test_bad_flag(self, biological_point):
        with pytest.raises(UsageError):
            in_biological_region(biological_point, 'sideways')

    @pytest.mark.parametrize('wave_speed', ['positive', 'negative', None])
    def test_sampling(self, wave_speed):
        rng = random.Random(SEED)
        for _ in range(50):
            assert in_biological_region(sample_biological_point(rng, wave_speed), wave_speed)


class TestSqrt2Point:
    ROW3 = Sqrt2Point((QQ(7, 2), 0), (0, QQ(-3, 4)), (0, QQ(3, 4)), (1, 0))
    ROW4 = Sqrt2Point((5, 0), (0, -3), (0, QQ(3, 2)), (QQ(1, 3), 0))

    def test_row3_locus(self):
        point = self.ROW3
        assert not point.apply(2 * c**2 + 3 * a**2 - 12 * a + 3)
        assert not point.apply(b - _b_row34())
        assert not point.apply(b * d + c)
        assert point.apply(c**2 + 3 * a**2 - 12 * a + 3)

    def test_row4_locus(self):
        point = self.ROW4
        assert not point.apply(2 * c**2 + a**2 - 7 * a + 1)
        assert not point.apply(b - _b_row34())
        assert not point.apply(3 * b * d + 2 * c)

    def test_darboux_relation(self, phi):
        residual = verify(phi['phi2'], QQ(4, 3) * c, fn_system()).residual
        assert residual
        assert not self.ROW3.apply(residual)
        assert ParamPoint(2, 1, 3, -3).apply(residual)

    def test_apply(self):
        point = self.ROW3
        X, Y, Z = SQRT2_RING.gens
        assert point.apply(x * y + 2 * a) == X * Y + 7
        assert point.apply(c**2 * z) == SQRT2_RING(QQ(9, 8)) * Z
        assert point.apply(parse('m*x + 1')) == SQRT2_RING.one

    def test_irreducible(self, phi):
        assert is_irreducible(self.ROW3.apply(phi['phi2']))
        assert not is_irreducible(self.ROW3.apply(c**2 * x**2 - z**2))
        assert is_irreducible(parse('9/8*x^2 - z^2'))
        assert not is_irreducible(self.ROW3.apply(phi['phi2'] * y))

    def test_alpha(self):
        with pytest.raises(FieldException):
            self.ROW3.apply(parse('alpha*x'))
