import math

import numpy as np
import pytest

from fndarboux.darboux_exceptions import *
from fndarboux.expr import RING, parse
from fndarboux.expr import x, z
from fndarboux.field import VectorField, fn_system
from fndarboux.darboux import table1_certificates
from fndarboux.numeric import *

from conftest import SEED


def _start_off_surface(fn, rng, scale=0.1):
    while True:
        s = rng.uniform(-1.0, 1.0, 3)
        if abs(fn(*s)) >= scale:
            return State(*s)


class TestIntegrate:
    def test_zero_field(self):
        traj = integrate(VectorField(0, 0, 0), State(0.3, -0.2, 0.7), 0.1, 0.01)
        assert traj.completed
        assert len(traj) == 11
        assert np.all(traj.states == np.array([0.3, -0.2, 0.7]))

    def test_equilibrium(self, row1_point):
        traj = integrate(fn_system(), State(0.0, 0.0, 0.0), 0.5, 1e-3, row1_point)
        assert np.all(traj.states == 0.0)
        assert traj.final().t == pytest.approx(0.5)

    def test_ends_exactly_at_horizon(self):
        traj = integrate(VectorField(1, 0, 0), State(0.0, 0.0, 0.0), 1.0, 0.3)
        assert len(traj) == 5
        assert traj.final().t == pytest.approx(1.0)
        assert traj.final().x == pytest.approx(1.0)

    def test_bad_step(self):
        with pytest.raises(NumericException):
            integrate(VectorField(0, 0, 0), State(0.0, 0.0, 0.0), 1.0, 0.0)
        with pytest.raises(NumericException):
            integrate(VectorField(0, 0, 0), State(0.0, 0.0, 0.0), -1.0, 0.1)

    def test_divergence(self):
        with np.errstate(over='ignore', invalid='ignore'):
            traj = integrate(VectorField(x**2, 0, 0), State(1.0, 0.0, 0.0), 3.0, 0.01)
        assert not traj.completed
        assert traj.final().t < 3.0

    def test_symbolic_parameters(self):
        with pytest.raises(NumericException):
            integrate(fn_system(), State(0.0, 0.0, 0.0), 1.0, 0.1)

    def test_order(self, row1_point):
        V = fn_system()
        s0 = State(0.3, -0.2, 0.1)
        reference = integrate(V, s0, 0.5, 1e-4, row1_point).final().vector()
        coarse = integrate(V, s0, 0.5, 0.02, row1_point).final().vector()
        fine = integrate(V, s0, 0.5, 0.01, row1_point).final().vector()
        ratio = np.linalg.norm(coarse - reference) / np.linalg.norm(fine - reference)
        assert 8.0 <= ratio <= 32.0


class TestDrift:
    def test_first_integral_conserved(self, phi, integrable_point):
        f = integrable_point.apply(phi['phi5'])
        rng = np.random.default_rng(SEED)
        s0 = _start_off_surface(compile_poly(f), rng)
        report = darboux_drift(fn_system(), f, 0, s0, 1.0, 1e-4, integrable_point)
        assert report.max_relative_error <= 1e-8
        assert not report.flagged()

    def test_y_exactly_constant(self, integrable_point):
        traj = integrate(fn_system(), State(0.2, 0.4, -0.3), 1.0, 1e-3, integrable_point)
        assert np.all(traj.states[:, 1] == 0.4)

    def test_certified_pairs(self):
        rng = np.random.default_rng(SEED)
        certificates, _ = table1_certificates()
        for cert in certificates:
            if cert.row in (3, 4):
                continue
            point = cert.instance
            f = point.apply(cert.f)
            fn = compile_poly(f)
            for _ in range(5):
                s0 = _start_off_surface(fn, rng)
                report = darboux_drift(fn_system(), cert.f, cert.k.k, s0, 0.5, 1e-4, point)
                assert report.max_relative_error <= 1e-6, (cert.row, s0)

    def test_negative_control(self, row1_point):
        report = darboux_drift(fn_system(), x, RING.zero, State(0.5, 0.0, 0.8), 0.5, 1e-4,
                               row1_point)
        assert report.max_relative_error > 1e-2
        assert report.flagged()

    def test_invariant_surface(self, phi1_row1, row1_point):
        V = row1_point.apply_field(fn_system())
        s0 = surface_sample(phi1_row1, x=1.0, y=0.0)
        fn = compile_poly(phi1_row1)
        traj = integrate(V, s0, 0.5, 1e-4)
        values = [abs(fn(*s)) for s in traj.states]
        assert max(values) <= 1e-8

    def test_samples(self, phi1_row1, row1_point):
        V = row1_point.apply_field(fn_system())
        report = darboux_drift(V, phi1_row1, 4, State(0.1, 0.2, 0.3), 0.1, 1e-3, every=10)
        assert len(report.samples) == 11
        t, value, predicted = report.samples[-1]
        assert t == pytest.approx(0.1)
        assert value == pytest.approx(predicted, rel=1e-9)


class TestSurface:
    def test_double_root(self, phi, integrable_point):
        f = integrable_point.apply(phi['phi5'])
        state = surface_sample(f, x=0.0, y=0.0)
        assert state.z == pytest.approx(0.0, abs=1e-9)

    def test_quadratic(self, phi1_row1):
        state = surface_sample(phi1_row1, x=1.0, y=0.0)
        assert state.z == pytest.approx(1.0 - math.sqrt(1.5), abs=1e-12)
        wide = surface_sample(phi1_row1, box=((-1, 1), (-1, 1), (2, 3)), x=1.0, y=0.0)
        assert wide.z == pytest.approx(1.0 + math.sqrt(1.5), abs=1e-12)

    def test_random_points(self, phi1_row1):
        rng = np.random.default_rng(SEED)
        fn = compile_poly(phi1_row1)
        for _ in range(20):
            state = surface_sample(phi1_row1, rng=rng)
            assert abs(fn(state.x, state.y, state.z)) <= 1e-12
            assert -1.0 <= state.z <= 1.0

    def test_constant(self):
        with pytest.raises(NoRealRootError):
            surface_sample(RING.one)

    def test_no_real_root(self):
        with pytest.raises(NoRealRootError):
            surface_sample(z**2 + 1, tries=10)


class TestCompile:
    def test_values(self):
        fn = compile_poly(parse('1/2*x^4 - z^2 + 2*x*y'))
        assert fn(1.0, 2.0, 3.0) == pytest.approx(0.5 - 9.0 + 4.0)
        assert compile_poly(RING(3))(0.0, 0.0, 0.0) == 3.0

    def test_symbolic(self):
        with pytest.raises(NumericException):
            compile_poly(parse('a*x'))

    def test_csv(self, tmp_path):
        path = tmp_path / 'trajectory.csv'
        rows = [(0.0, 1.0, 2.0, 3.0, 4.0, 4.0), (0.1, 1.5, 2.5, 3.5, 4.5, 4.5)]
        write_csv(str(path), rows)
        lines = path.read_text().splitlines()
        assert lines[0] == 't,x,y,z,f,predicted'
        assert np.allclose(np.loadtxt(str(path), delimiter=',', skiprows=1), rows)
