"""Floating-point checks of the exact results along trajectories.

Trajectories come from the classical fourth-order Runge-Kutta scheme with a fixed step. For a
Darboux pair (f, k) the value of f along a solution obeys f(t) = f(0) exp(int_0^t k ds); the
integral of k is carried as a fourth state component so it sees the same scheme as x, y, z.
"""


import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import newton
from sympy import horner, lambdify

from fndarboux.darboux_exceptions import *
from fndarboux.expr import RING, z, const, to_string


__all__ = ['State', 'Trajectory', 'DriftReport', 'compile_poly', 'rk4', 'integrate',
           'darboux_drift', 'surface_sample', 'write_csv']


logger = logging.getLogger(__name__)

_STATE_SYMBOLS = RING.symbols[:3]


@dataclass
class State:
    x: float
    y: float
    z: float
    t: float = 0.0

    def vector(self):
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass
class Trajectory:
    """Dense output: times[i] and states[i] after i steps; completed is False after divergence."""
    times: np.ndarray
    states: np.ndarray
    completed: bool = True

    def __len__(self):
        return len(self.times)

    def final(self):
        x, y, z_value = self.states[-1][:3]
        return State(x, y, z_value, self.times[-1])


@dataclass
class DriftReport:
    max_relative_error: float
    max_abs_error: float
    samples: list = dc_field(default_factory=list)
    trajectory: Trajectory = None

    def flagged(self, tol=1e-6):
        return not self.max_relative_error <= tol


def compile_poly(f):
    """Float evaluator g(x, y, z) of a polynomial with numeric parameters, in Horner form."""
    if any(any(monom[3:]) for monom in f.itermonoms()):
        raise NumericException('cannot evaluate {:s}: parameters are still symbolic'.format(
            to_string(f)))
    expr = f.as_expr()
    if f.is_ground:
        value = float(expr)
        return lambda x, y, z: value
    return lambdify(_STATE_SYMBOLS, horner(expr, *_STATE_SYMBOLS), 'math')


def _field_rhs(V, extra=()):
    fns = [compile_poly(p) for p in V.components()] + [compile_poly(p) for p in extra]

    def rhs(s):
        return np.array([fn(s[0], s[1], s[2]) for fn in fns], dtype=float)
    return rhs


def rk4(rhs, s0, t_end, step):
    """Fixed-step classical Runge-Kutta from t = 0 to t_end.

    The step is shrunk slightly so that a whole number of steps ends exactly at t_end.

    Returns:
        Trajectory
    """
    if not step > 0 or not t_end > 0:
        raise NumericException('step and t_end must be positive, got {} and {}'.format(
            step, t_end))
    n = max(1, int(math.ceil(t_end / step - 1e-9)))
    h = t_end / n
    states = np.empty((n + 1, len(s0)))
    states[0] = s0
    s = np.array(s0, dtype=float)
    for i in range(n):
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h * k2)
        k4 = rhs(s + h * k3)
        s = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            logger.warning('state diverged at t = %g after %d steps', (i + 1) * h, i + 1)
            return Trajectory(np.arange(i + 1) * h, states[:i + 1], completed=False)
        states[i + 1] = s
    return Trajectory(np.arange(n + 1) * h, states)


def integrate(V, s0, t_end, step, params=None):
    """Trajectory of V from s0.

    Args:
        V (VectorField): Field with numeric parameters, or symbolic ones together with params.
        s0 (State): Initial state; s0.t is ignored and time starts at 0.
        t_end (float): Horizon.
        step (float): Nominal step.
        params (ParamPoint): Applied to V first when given.
    """
    if params is not None:
        V = params.apply_field(V)
    return rk4(_field_rhs(V), s0.vector(), t_end, step)


def darboux_drift(V, f, k, s0, t_end, step, params=None, every=1):
    """Compares f along a trajectory with f(s0) exp(int k).

    Args:
        every (int): Keep one sample per this many steps in the report.

    Returns:
        DriftReport: The largest |f - predicted| / max(|f|, 1e-300) and the largest absolute
        difference over all steps.
    """
    f, k = const(f), const(k)
    if params is not None:
        V = params.apply_field(V)
        f = params.apply(f)
        k = params.apply(k)
    fn = compile_poly(f)
    traj = rk4(_field_rhs(V, [k]), np.append(s0.vector(), 0.0), t_end, step)
    f0 = fn(s0.x, s0.y, s0.z)
    max_rel = 0.0
    max_abs = 0.0
    samples = []
    for i, (t, s) in enumerate(zip(traj.times, traj.states)):
        value = fn(s[0], s[1], s[2])
        predicted = f0 * math.exp(s[3])
        err = abs(value - predicted)
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / max(abs(value), 1e-300))
        if i % every == 0:
            samples.append((float(t), value, predicted))
    if not traj.completed:
        max_rel = math.inf
    logger.info('drift of %s: max relative error %.3e', to_string(f), max_rel)
    return DriftReport(max_rel, max_abs, samples, traj)


def surface_sample(f, box=((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)), rng=None, tries=100,
                   x=None, y=None):
    """A point of {f = 0} inside box, found by solving for z at sampled (x, y).

    Args:
        f (Poly): Numeric polynomial depending on z.
        box: ((xlo, xhi), (ylo, yhi), (zlo, zhi)).
        rng (numpy.random.Generator): Source of the (x, y) samples.
        tries (int): Number of (x, y) samples before giving up.
        x, y (float): Fix the corresponding coordinate instead of sampling it.

    Raises:
        NoRealRootError: When no sample has a real root with z inside the box.
    """
    degree = f.degree(z)
    if degree < 1:
        raise NoRealRootError(to_string(f), 0)
    if rng is None:
        rng = np.random.default_rng(0)
    fn = compile_poly(f)
    coeff_fns = [compile_poly(f.coeff_wrt(z, j)) for j in range(degree, -1, -1)]
    (xlo, xhi), (ylo, yhi), (zlo, zhi) = box
    for attempt in range(tries):
        xv = float(x) if x is not None else rng.uniform(xlo, xhi)
        yv = float(y) if y is not None else rng.uniform(ylo, yhi)
        coeffs = np.trim_zeros(np.array([g(xv, yv, 0.0) for g in coeff_fns]), 'f')
        if len(coeffs) < 2:
            continue
        for root in np.roots(coeffs):
            if abs(root.imag) > 1e-9 or not zlo <= root.real <= zhi:
                continue
            zv = root.real
            g = lambda t: fn(xv, yv, t)
            try:
                polished = newton(g, zv, tol=1e-15, maxiter=50)
                if abs(g(polished)) < abs(g(zv)):
                    zv = polished
            except (RuntimeError, ZeroDivisionError):
                pass
            if abs(fn(xv, yv, zv)) <= 1e-12 and zlo <= zv <= zhi:
                logger.debug('surface point after %d tries', attempt + 1)
                return State(xv, yv, zv)
        if x is not None and y is not None:
            break
    raise NoRealRootError(to_string(f), tries)


def write_csv(path, rows, header=('t', 'x', 'y', 'z', 'f', 'predicted')):
    """Writes rows of floats with a header line."""
    np.savetxt(path, np.asarray(rows, dtype=float), delimiter=',', header=','.join(header),
               comments='', fmt='%.17g')
