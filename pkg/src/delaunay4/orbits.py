"""Periodic Emden-Fowler orbits of the Fowler ODE.

For a Fowler parameter ``a`` in ``(0, a0]`` the orbit starts at its minimum,
``(v, v', v'', v''') = (a, 0, b(a), 0)``, and the critical curvature ``b(a)``
separates trajectories that cross zero from those that blow up.  Orbits are
reversible: ``v(T - t) = v(t)``, so one half period determines the whole orbit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .constants import DimensionParams, make_params
from .dynamics import (Trajectory, energy_scale, hamiltonian, integrate, make_field,
                       relative_drift)
from .errors import (BracketNotFound, NoReturnFound, NumericalFailure, ToleranceNotMet,
                     ValidationError)

# time-reversal about a section point: (v, v', v'', v''') -> (v, -v', v'', -v''')
REVERSOR = np.array([1.0, -1.0, 1.0, -1.0])

SHOOT_TOLERANCE = 1e-13
BRACKET_RTOL = 1e-12
PERIODICITY_TOL = 1e-7
SAMPLES_PER_PERIOD = 4096


def cylinder_frequency(params: DimensionParams) -> float:
    """Oscillation frequency of the Fowler ODE linearized about ``v = a0``."""
    c0 = params.K0 - params.c_tilde * params.a0 ** params.nonlinear_power
    return math.sqrt((math.sqrt(params.K2**2 - 4.0 * c0) - params.K2) / 2.0)


def linear_period(params: DimensionParams) -> float:
    return 2.0 * math.pi / cylinder_frequency(params)


@dataclass
class PeriodicOrbit:
    """One period of the Emden-Fowler orbit with minimum ``a``.

    ``t``/``states`` hold uniform samples on ``[0, period]`` (endpoint
    included).  ``periodicity_residual`` is the relative state mismatch at
    the quarter-period junction of the two integrated pieces, and
    ``energy_drift`` the relative Hamiltonian drift over the integrated half.
    """

    params: DimensionParams
    a: float
    b_of_a: float
    period: float
    t: np.ndarray
    states: np.ndarray
    energy: float
    energy_drift: float
    periodicity_residual: float
    degenerate: bool = False
    half_solution: Callable | None = field(default=None, repr=False)
    _splines: list | None = field(default=None, repr=False)

    @property
    def v_max(self) -> float:
        return float(self.states[:, 0].max())

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([self.a, 0.0, self.b_of_a, 0.0])

    def state(self, t) -> np.ndarray:
        """Exact dense-output state at arbitrary ``t`` (periodic extension)."""
        t = np.asarray(t, dtype=float)
        if self.degenerate:
            return np.broadcast_to(self.initial_state, t.shape + (4,)).copy()
        tau = np.mod(t, self.period)
        half = 0.5 * self.period
        first = tau <= half
        mirrored = np.where(first, tau, self.period - tau)
        out = np.moveaxis(np.asarray(self.half_solution(mirrored.ravel())), 0, -1)
        out = out.reshape(t.shape + (4,))
        return np.where(first[..., None], out, out * REVERSOR)

    def _ensure_splines(self):
        if self._splines is None:
            self._splines = [CubicSpline(self.t, self.states[:, k], bc_type="periodic")
                             for k in range(4)]
        return self._splines

    def v(self, t, deriv: int = 0):
        """Periodic cubic-spline interpolant of ``v^(deriv)`` for ``deriv <= 3``."""
        if not 0 <= deriv <= 3:
            raise ValueError("deriv must be in 0..3")
        t = np.asarray(t, dtype=float)
        if self.degenerate:
            return np.full(t.shape, self.initial_state[deriv]) if t.ndim else float(self.initial_state[deriv])
        out = self._ensure_splines()[deriv](np.mod(t, self.period))
        return out if np.ndim(out) else float(out)


@dataclass
class OrbitFailure:
    """Placeholder for a grid point where no orbit could be computed."""

    a: float
    reason: str


class PeriodDetection(NamedTuple):
    period: float
    degenerate: bool


def _classify(params, a, b, span, tolerance):
    traj = integrate(params, (a, 0.0, b, 0.0), (0.0, span), tolerance, dense=False)
    if traj.status == "zero_crossing":
        return -1
    if traj.status == "blow_up":
        return 1
    return 0


def _half_period(params, a, b, span, tolerance, dense=False):
    """Integrate to the first maximum (downward crossing of v').

    Returns ``(t_half, state_half, solve_ivp result)`` or ``None`` when the
    trajectory leaves the admissible region first.
    """
    def at_max(t, y):
        return y[1]

    at_max.terminal = True
    at_max.direction = -1

    def crossed_zero(t, y):
        return y[0]

    crossed_zero.terminal = True
    crossed_zero.direction = -1
    res = solve_ivp(make_field(params), (0.0, span), [a, 0.0, b, 0.0], method="DOP853",
                    rtol=tolerance, atol=tolerance * 1e-3 * params.a0,
                    events=[at_max, crossed_zero], dense_output=dense)
    if res.status != 1 or not res.t_events[0].size:
        return None
    return float(res.t_events[0][0]), res.y_events[0][0].copy(), res


class _GluedHalf:
    """Dense output of a half orbit glued from a forward and a backward piece."""

    def __init__(self, forward, backward, t_join):
        self.forward, self.backward, self.t_join = forward, backward, t_join

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t)
        out = np.empty((4, flat.size))
        left = flat <= self.t_join
        if left.any():
            out[:, left] = self.forward(flat[left])
        if (~left).any():
            out[:, ~left] = self.backward(flat[~left])
        return out if t.ndim else out[:, 0]


def _two_sided(params, a, x, t_join, tolerance, dense=False):
    """Forward piece from the minimum, backward piece from the maximum.

    ``x = (b, v_max, v''_max, t_half)``.  Returns the junction mismatch (or
    ``None`` if a piece fails) and both solve_ivp results.
    """
    field_ = make_field(params)
    kw = dict(method="DOP853", rtol=tolerance, atol=tolerance * 1e-3 * params.a0,
              dense_output=dense)
    fwd = solve_ivp(field_, (0.0, t_join), [a, 0.0, x[0], 0.0], **kw)
    bwd = solve_ivp(field_, (x[3], t_join), [x[1], 0.0, x[2], 0.0], **kw)
    if fwd.status != 0 or bwd.status != 0:
        return None, fwd, bwd
    return fwd.y[:, -1] - bwd.y[:, -1], fwd, bwd


def _refine_two_sided(params, a, b, t_half, s_half, tolerance, max_iter=8):
    """Newton on the two-sided matching problem.

    Each piece spans a quarter period, so the growth of integration error
    along the unstable direction is about the square root of that of a
    one-sided half-period shot.  Returns ``(relative mismatch, x)``.
    """
    x = np.array([b, s_half[0], s_half[2], t_half])
    t_join = 0.5 * t_half
    scale = params.K0 * a
    steps = 1e-6 * np.array([max(abs(b), scale), x[1], max(abs(x[2]), scale), t_half])
    best = None
    for _ in range(max_iter):
        f, _, _ = _two_sided(params, a, x, t_join, tolerance)
        if f is None:
            break
        err = float(np.max(np.abs(f))) / a
        if best is None or err < best[0]:
            best = (err, x.copy())
        if err < 1e-13:
            break
        jac = np.empty((4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = steps[k]
            fp, _, _ = _two_sided(params, a, x + e, t_join, tolerance)
            fm, _, _ = _two_sided(params, a, x - e, t_join, tolerance)
            if fp is None or fm is None:
                return best
            jac[:, k] = (fp - fm) / (2.0 * steps[k])
        try:
            x = x - np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            break
    return best


def _degenerate_orbit(params: DimensionParams, samples: int) -> PeriodicOrbit:
    period = linear_period(params)
    a = params.a0
    t = np.linspace(0.0, period, samples + 1)
    states = np.zeros((t.size, 4))
    states[:, 0] = a
    energy = float(hamiltonian(params, states[0]))
    return PeriodicOrbit(params=params, a=a, b_of_a=0.0, period=period, t=t, states=states,
                         energy=energy, energy_drift=0.0, periodicity_residual=0.0,
                         degenerate=True)


def shoot(params: DimensionParams, a: float, *, tolerance: float = SHOOT_TOLERANCE,
          bracket_rtol: float = BRACKET_RTOL, b_max: float | None = None,
          samples: int = SAMPLES_PER_PERIOD,
          periodicity_tol: float = PERIODICITY_TOL) -> PeriodicOrbit:
    """Find the critical curvature ``b(a)`` and build the periodic orbit.

    Bisection on ``b >= 0`` between the zero-crossing and blow-up regimes
    narrows the bracket to ``bracket_rtol * K0 * a0``; the root is then
    polished on the symmetry section (``v''' = 0`` at the first maximum).
    A Newton iteration on the two-sided problem (forward from the minimum,
    backward from the maximum, matched at the quarter period) then fixes
    ``b``, the maximum and the half period together; the orbit is the glued
    half period plus its mirror image.
    """
    a = float(a)
    a0 = params.a0
    if not (0.0 < a <= a0 * (1.0 + 1e-12)):
        raise ValidationError(f"Fowler parameter must lie in (0, a0={a0:.12g}], got {a!r}")
    if abs(a - a0) <= 1e-13 * a0:
        return _degenerate_orbit(params, samples)

    t_lin = linear_period(params)
    # small-a orbits spend ~2 ln(1/a) in the neck; leave room for a few periods
    span = 12.0 * t_lin + 8.0 * math.log(a0 / a)
    scale = params.K0 * a0
    if _classify(params, a, 0.0, span, tolerance) != -1:
        raise BracketNotFound(f"b=0 does not cross zero for a={a:.12g}")
    hi = 1e-2 * scale if b_max is None else b_max
    while True:
        kind = _classify(params, a, hi, span, tolerance)
        if kind == 1:
            break
        if b_max is not None or hi > 1e3 * scale:
            raise BracketNotFound(f"no blow-up found for b up to {hi:.6g} (a={a:.12g})")
        hi *= 2.0
    lo = 0.0
    while hi - lo > bracket_rtol * scale:
        mid = 0.5 * (lo + hi)
        kind = _classify(params, a, mid, span, tolerance)
        if kind == 1:
            hi = mid
        elif kind == -1:
            lo = mid
        else:
            lo = hi = mid
            break

    def section_defect(b):
        out = _half_period(params, a, b, span, tolerance)
        return None if out is None else out[1][3]

    b = 0.5 * (lo + hi)
    g_lo, g_hi = section_defect(lo), section_defect(hi)
    if g_lo is not None and g_hi is not None and g_lo * g_hi < 0:
        b = brentq(lambda x: section_defect(x), lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                   maxiter=200)
    half = _half_period(params, a, b, span, tolerance)
    if half is None:
        raise NoReturnFound(f"orbit at a={a:.12g} never reached its maximum")
    t_half, s_half, _ = half
    refined = _refine_two_sided(params, a, b, t_half, s_half, tolerance)
    if refined is None:
        raise ToleranceNotMet(f"two-sided matching failed at a={a:.12g}")
    residual, x = refined
    b, t_half = float(x[0]), float(x[3])
    _, fwd, bwd = _two_sided(params, a, x, 0.5 * t_half, tolerance, dense=True)
    period = 2.0 * t_half
    energies = hamiltonian(params, np.vstack([fwd.y.T, bwd.y.T]))
    orbit = PeriodicOrbit(params=params, a=a, b_of_a=b, period=period,
                          t=np.linspace(0.0, period, samples + 1), states=np.empty(0),
                          energy=float(hamiltonian(params, np.array([a, 0.0, b, 0.0]))),
                          energy_drift=relative_drift(params, energies),
                          periodicity_residual=float(residual),
                          half_solution=_GluedHalf(fwd.sol, bwd.sol, 0.5 * t_half))
    orbit.states = orbit.state(orbit.t)
    orbit.states[-1] = orbit.states[0]
    if residual > periodicity_tol:
        raise ToleranceNotMet(f"periodicity residual {residual:.3g} above {periodicity_tol:.1g} at a={a:.12g}")
    return orbit


@lru_cache(maxsize=256)
def cached_orbit(n: int, a: float) -> PeriodicOrbit:
    """Memoized :func:`shoot` with default settings."""
    return shoot(make_params(n), a)


def orbit_provider(params: DimensionParams) -> Callable[[float], PeriodicOrbit]:
    return lambda a: cached_orbit(params.n, float(a))


def period_detect(trajectory: Trajectory, initial_state, *, t_min: float | None = None,
                  return_tol: float = 1e-3, scan_points: int = 20000) -> PeriodDetection:
    """First return to the section ``{v' = 0, v''' = 0, v'' > 0}``.

    Upward zero crossings of ``v'`` are bracketed on a fine scan of the dense
    output and polished with Brent's method; the first one whose state
    matches ``initial_state`` within ``return_tol`` (relative) is returned.
    A constant trajectory reports the linearization period, flagged
    degenerate.
    """
    s0 = np.asarray(initial_state, dtype=float)
    t = np.asarray(trajectory.t, dtype=float)
    states = np.asarray(trajectory.states, dtype=float)
    scale = max(abs(s0[0]), 1e-300)
    t_start, t_end = float(t[0]), float(t[-1])
    if np.max(np.abs(states - states[0])) <= 1e-12 * scale:
        params = getattr(trajectory, "params", None)
        if params is None:
            raise NoReturnFound("constant trajectory: dimension needed for the linearization period")
        return PeriodDetection(linear_period(params), True)
    if t_min is None:
        t_min = t_start + 1e-6 * (t_end - t_start)
    grid = np.linspace(t_start, t_end, scan_points)
    v1 = trajectory(grid)[:, 1]
    crossings = np.nonzero((v1[:-1] < 0) & (v1[1:] >= 0))[0]
    for k in crossings:
        lo, hi = grid[k], grid[k + 1]
        if hi <= t_min:
            continue
        tc = brentq(lambda x: trajectory(x)[1], lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if tc <= t_min:
            continue
        s = trajectory(tc)
        if s[2] <= 0:
            continue
        mismatch = np.max(np.abs(s - s0)) / max(scale, np.max(np.abs(s0)))
        if mismatch < return_tol:
            return PeriodDetection(float(tc - t_start), False)
    raise NoReturnFound("no return to the initial section within the trajectory span")


def orbit_table(params: DimensionParams, a_grid, *, threads: int = 1,
                shooter: Callable | None = None) -> list:
    """One orbit per grid point; failed points become :class:`OrbitFailure`."""
    a_grid = [float(a) for a in a_grid]
    shooter = shooter or orbit_provider(params)

    def one(a):
        try:
            return shooter(a)
        except (NumericalFailure, ValidationError) as exc:
            return OrbitFailure(a=a, reason=f"{type(exc).__name__}: {exc}")

    if threads <= 1 or len(a_grid) <= 1:
        return [one(a) for a in a_grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, a_grid))


def energy_drift_over_periods(params: DimensionParams, orbit: PeriodicOrbit, n_periods: int = 10,
                              tolerance: float = 1e-10) -> float:
    """Relative Hamiltonian drift over ``n_periods`` periods at ``tolerance``.

    The orbit is hyperbolic (its zero-mode multipliers reach 1e6-1e11 per
    period for n=5), so an uninterrupted double-precision run leaves it within
    two periods.  Each half period is therefore integrated afresh from the
    orbit's state on the symmetry section, and the drift is measured against
    the single reference energy ``H(a, 0, b, 0)`` across all segments.  The
    cylinder equilibrium is itself hyperbolic and is treated the same way.
    """
    h0 = orbit.energy
    half = 0.5 * orbit.period
    worst = 0.0
    for k in range(2 * n_periods):
        t0 = k * half
        start = orbit.state(np.array(t0))
        traj = integrate(params, start, (t0, t0 + half), tolerance)
        if traj.halted:
            raise NumericalFailure(f"segment {k} left the orbit ({traj.status})")
        worst = max(worst, float(np.max(np.abs(hamiltonian(params, traj.states) - h0))))
    return worst / max(abs(h0), energy_scale(params))
