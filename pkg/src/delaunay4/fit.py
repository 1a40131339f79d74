"""Recover Fowler parameters and decay rates from sampled cylinder data.

Input is a table ``v(t_i, theta_k)`` on a set of unit directions.  Per
``t`` the samples are split by least squares into a mean ``c0(t)`` and a
linear part ``<theta, c1(t)>``: the mean carries the Fowler orbit, the
linear part the leading deformation.

``a`` is found from the conserved energy of ``c0`` (inverted against the
invariant curve), ``T`` from phase alignment over one period, and both are
then polished jointly by Gauss-Newton against freshly shot orbits.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import linregress

from .constants import DimensionParams
from .dynamics import hamiltonian
from .errors import DegenerateRegression, EnergyOutOfRange, InsufficientSpan, ValidationError
from .invariants import invariant_curve
from .orbits import PeriodicOrbit, linear_period, orbit_provider

DEFAULT_TABLE = tuple(np.linspace(0.1, 1.0, 10))  # fractions of a0
GN_MAX_ITER = 8


@dataclass
class RateFit:
    slope: float
    stderr: float
    intercept: float
    points: int


def rate_regression(t, norms, window=None) -> RateFit:
    """Least-squares slope of ``ln(norm)`` against ``t``.

    Points outside ``window = (t_lo, t_hi)`` and non-positive norms are
    dropped; at least four must remain.
    """
    t = np.asarray(t, dtype=float).ravel()
    y = np.asarray(norms, dtype=float).ravel()
    if t.shape != y.shape:
        raise ValidationError("t and norms must have the same length")
    keep = np.isfinite(y) & (y > 0)
    if window is not None:
        lo, hi = window
        if not lo < hi:
            raise DegenerateRegression(f"empty window {window}")
        keep &= (t >= lo) & (t <= hi)
    if keep.sum() < 4:
        raise DegenerateRegression(f"only {int(keep.sum())} usable points in the regression window")
    ly = np.log(y[keep])
    if np.ptp(ly) == 0:
        return RateFit(0.0, 0.0, float(ly[0]), int(keep.sum()))
    res = linregress(t[keep], ly)
    return RateFit(float(res.slope), float(res.stderr), float(res.intercept), int(keep.sum()))


@dataclass
class FitResult:
    a_hat: float
    T_hat: float
    period: float
    energy: float
    x0_hat: np.ndarray | None
    beta0: float
    beta1: float
    beta0_stderr: float
    beta1_stderr: float
    window: tuple
    residual_curve: np.ndarray = field(repr=False)  # columns t, ||v - v_a||
    refined_curve: np.ndarray = field(repr=False)  # columns t, ||v - v_a - first order||

    def as_dict(self) -> dict:
        return {
            "a_hat": self.a_hat,
            "T_hat": self.T_hat,
            "period": self.period,
            "energy": self.energy,
            "x0_hat": None if self.x0_hat is None else [float(x) for x in self.x0_hat],
            "beta0": self.beta0,
            "beta1": self.beta1,
            "beta0_stderr": self.beta0_stderr,
            "beta1_stderr": self.beta1_stderr,
            "window_lo": self.window[0],
            "window_hi": self.window[1],
        }


def split_modes(values, theta):
    """Per-``t`` least squares of ``v(t, theta)`` on ``[1, theta]``.

    Returns ``(c0, c1)`` with ``c1`` of shape ``(len(t), n)``, or ``None``
    for ``c1`` when the directions do not span the space.
    """
    V = np.asarray(values, dtype=float)
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    design = np.hstack([np.ones((theta.shape[0], 1)), theta])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        return V.mean(axis=1), None
    coef, *_ = np.linalg.lstsq(design, V.T, rcond=None)
    return coef[0], coef[1:].T


def signal_energy(params: DimensionParams, t, c0, window) -> float:
    """Median Hamiltonian of ``c0`` over ``window`` from a degree-7 spline."""
    spl = make_interp_spline(t, c0, k=7)
    lo, hi = window
    tt = t[(t >= lo) & (t <= hi)]
    states = np.stack([spl(tt, d) for d in range(4)], axis=-1)
    return float(np.median(hamiltonian(params, states)))


def _invert_energy(params, energy, curve, shooter):
    pts = sorted((a, h) for a, h in curve)
    a_vals = np.array([a for a, _ in pts])
    h_vals = np.array([h for _, h in pts])
    h_cyl = float(hamiltonian(params, np.array([params.a0, 0, 0, 0])))
    tol = 1e-9 * (1.0 + abs(h_cyl))
    if energy < h_cyl - tol or energy >= 0.0:
        raise EnergyOutOfRange(f"energy {energy:.10g} outside ({h_cyl:.10g}, 0)")
    if energy <= h_cyl + tol:
        return params.a0
    diff = h_vals - energy
    idx = np.nonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))[0]
    if idx.size == 0:
        # below the smallest tabulated orbit: extend the bracket towards a -> 0
        lo = a_vals[0]
        while True:
            lo *= 0.5
            if lo < 1e-4 * params.a0:
                raise EnergyOutOfRange(f"energy {energy:.10g} not bracketed by the invariant curve")
            if shooter(lo).energy > energy:
                break
        lo_hi = (lo, a_vals[0])
    else:
        # the curve is not assumed monotone; the first sign change is refined
        i = int(idx[0])
        lo_hi = (a_vals[i], a_vals[i + 1])

    def f(a):
        return (shooter(a).energy if a < params.a0 else h_cyl) - energy

    return brentq(f, *lo_hi, xtol=1e-7 * params.a0)


def _phase(orbit: PeriodicOrbit, t, c0, grid: int = 512) -> float:
    period = orbit.period
    taus = np.linspace(0.0, period, grid, endpoint=False)
    cost = [np.sum((c0 - orbit.state(t + tau)[:, 0]) ** 2) for tau in taus]
    k = int(np.argmin(cost))
    h = period / grid
    res = minimize_scalar(lambda tau: np.sum((c0 - orbit.state(t + tau)[:, 0]) ** 2),
                          bracket=(taus[k] - h, taus[k], taus[k] + h), tol=1e-12)
    return float(res.x % period)


def _gauss_newton(params, shooter, a, T, t, c0, tol=1e-13):
    """Joint refinement of ``(a, T)`` on ``c0 ~ v_a(t + T)``."""
    for _ in range(GN_MAX_ITER):
        orbit = shooter(a)
        r = c0 - orbit.state(t + T)[:, 0]
        if a >= params.a0:
            return params.a0, T
        da = 1e-6 * params.a0 if a + 1e-6 * params.a0 < params.a0 else -1e-6 * params.a0
        nb = shooter(a + da)
        s = orbit.state(t + T)
        J = np.column_stack([(nb.state(t + T)[:, 0] - s[:, 0]) / da, s[:, 1]])
        step, *_ = np.linalg.lstsq(J, r, rcond=None)
        a_new = min(a + step[0], params.a0)
        T += step[1]
        done = abs(a_new - a) < tol * params.a0 and abs(step[1]) < tol * 10
        a = a_new
        if done:
            break
    return a, T


def _rate_or_nan(t, norms, window) -> RateFit:
    # exact samples leave no residual to regress; the rate is then undefined
    try:
        return rate_regression(t, norms, window)
    except DegenerateRegression:
        return RateFit(math.nan, math.nan, math.nan, 0)


def fit_parameters(params: DimensionParams, t, theta, values, *,
                   provider: Callable | None = None, table=None, window=None,
                   estimate_x0: bool = True) -> FitResult:
    """Fit ``(a, T, x0)`` and the decay rates to cylinder samples.

    Parameters
    ----------
    t : (N,) array
        Strictly increasing sample times.
    theta : (M, n) array
        Unit directions; an antipodally symmetric set keeps the quadratic
        part of the deformation out of the linear mode.
    values : (N, M) array
        ``v(t_i, theta_k)``.
    table : iterable of (a, H) pairs, optional
        Precomputed invariant curve; by default built from ``DEFAULT_TABLE``.
    window : (t_lo, t_hi), optional
        Regression window for the rates.  The default drops the first two
        periods and the last half period.  A rate is NaN when its residual
        vanishes identically in the window (exact orbit samples).
    """
    t = np.asarray(t, dtype=float).ravel()
    V = np.atleast_2d(np.asarray(values, dtype=float))
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if V.shape != (t.size, theta.shape[0]):
        raise ValidationError(f"values must have shape {(t.size, theta.shape[0])}, got {V.shape}")
    if t.size < 16 or np.any(np.diff(t) <= 0):
        raise ValidationError("need at least 16 strictly increasing sample times")
    if theta.shape[1] != params.n:
        raise ValidationError(f"directions must have {params.n} coordinates")
    shooter = provider or orbit_provider(params)
    span = t[-1] - t[0]
    c0, c1 = split_modes(V, theta)

    # late window: deformation has decayed the most there
    t_lin = linear_period(params)
    if span < 2.0 * t_lin:
        raise InsufficientSpan(f"sample span {span:.4g} is shorter than two linear periods")
    late = (t[-1] - 0.5 * span, t[-1] - 0.1 * t_lin)
    energy = signal_energy(params, t, c0, late)
    if table is None:
        table = [(pt[0], pt[1]) for pt in invariant_curve(params, [f * params.a0 for f in DEFAULT_TABLE],
                                                          shooter=shooter).points]
    a = _invert_energy(params, energy, table, shooter)
    orbit = shooter(a)
    if span < 3.0 * orbit.period:
        raise InsufficientSpan(f"sample span {span:.4g} is shorter than three periods ({orbit.period:.4g})")
    mask = t >= t[-1] - min(2.0 * orbit.period, 0.5 * span)
    T = _phase(orbit, t[mask], c0[mask])
    a, T = _gauss_newton(params, shooter, a, T, t[mask], c0[mask])
    orbit = shooter(a)
    T = float(T % orbit.period)

    s = orbit.state(t + T)
    r0 = np.max(np.abs(V - s[:, 0][:, None]), axis=1)
    x0_hat = None
    first = np.zeros_like(V)
    if estimate_x0 and c1 is not None:
        g = np.exp(-t) * (params.gamma * s[:, 0] - s[:, 1])
        use = t >= t[0] + 0.5 * span
        x0_hat = (g[use] @ c1[use]) / (g[use] @ g[use])
        first = g[:, None] * (theta @ x0_hat)[None, :]
    r1 = np.max(np.abs(V - s[:, 0][:, None] - first), axis=1)

    if window is None:
        window = (t[0] + 2.0 * orbit.period, t[-1] - 0.5 * orbit.period)
    window = (float(window[0]), float(window[1]))
    inside = (t >= window[0]) & (t <= window[1])
    if inside.sum() < 4:
        raise DegenerateRegression(f"only {int(inside.sum())} samples in the regression window {window}")
    fit0 = _rate_or_nan(t, r0, window)
    fit1 = _rate_or_nan(t, r1, window)
    if math.isnan(fit1.slope):
        fit1 = fit0
    return FitResult(a_hat=float(a), T_hat=T, period=orbit.period, energy=energy, x0_hat=x0_hat,
                     beta0=-fit0.slope, beta1=-fit1.slope, beta0_stderr=fit0.stderr,
                     beta1_stderr=fit1.stderr, window=window,
                     residual_curve=np.column_stack([t, r0]),
                     refined_curve=np.column_stack([t, r1]))
