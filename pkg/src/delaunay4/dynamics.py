"""The radial Fowler ODE ``v'''' - K2 v'' + K0 v = c_n v^(2**-1)`` as a 4-system.

States are 4-vectors ``(v, v', v'', v''')``; arrays of states use the last
axis for the four components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .constants import DimensionParams
from .errors import BlowUpDetected, Delaunay4Error, ValidationError, ZeroCrossingDetected

# blow-up guard: |v| > 10 * a0 * 1e3 or |v'''| > 1e6
GUARD_FACTOR = 1.0e4
V3_GUARD = 1.0e6


class InadmissibleState(Delaunay4Error, ValueError):
    """The profile value went negative, where ``v**(2**-1)`` is undefined."""


class FowlerState(NamedTuple):
    v: float
    v1: float
    v2: float
    v3: float


def positive_power(v, p):
    """``v**p`` as ``exp(p ln v)`` for ``v > 0`` and 0 at ``v == 0``."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = np.exp(p * np.log(v[pos]))
    return out if out.ndim else float(out)


def rhs(params: DimensionParams, s) -> np.ndarray:
    """Time derivative of a state (or of a stack of states)."""
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValidationError("state must be finite")
    v = s[..., 0]
    if np.any(v < 0):
        raise InadmissibleState("negative v: inadmissible excursion of the Fowler orbit")
    out = np.empty_like(s)
    out[..., :3] = s[..., 1:]
    out[..., 3] = (params.K2 * s[..., 2] - params.K0 * v
                   + params.c_n * positive_power(v, params.sobolev_exp - 1.0))
    return out


def hamiltonian(params: DimensionParams, s):
    """Conserved energy ``-v''' v' + v''^2/2 + K2 v'^2/2 - K0 v^2/2 + c_hat v^(2**)``."""
    s = np.asarray(s, dtype=float)
    v, v1, v2, v3 = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
    return (-v3 * v1 + 0.5 * v2 * v2 + 0.5 * params.K2 * v1 * v1 - 0.5 * params.K0 * v * v
            + params.c_hat * v * positive_power(v, params.sobolev_exp - 1.0))


def energy_scale(params: DimensionParams) -> float:
    """Reference energy used as the floor of relative drift measurements."""
    return 1e-6 * params.K0 * params.a0**2


def relative_drift(params: DimensionParams, energies) -> float:
    energies = np.asarray(energies, dtype=float)
    h0 = energies[0]
    return float(np.max(np.abs(energies - h0)) / max(abs(h0), energy_scale(params)))


def _odd_power(v, p):
    # smooth odd extension, only evaluated inside a step that is about to be cut by the zero event
    return np.copysign(np.abs(v) ** p, v)


def make_field(params: DimensionParams) -> Callable:
    K0, K2, c, p = params.K0, params.K2, params.c_n, params.sobolev_exp - 1.0

    def f(t, y):
        v = y[0]
        return np.array([y[1], y[2], y[3], K2 * y[2] - K0 * v + c * _odd_power(v, p)])

    return f


@dataclass
class Trajectory:
    """Integrated Fowler trajectory.

    ``status`` is ``"ok"``, ``"zero_crossing"`` or ``"blow_up"``; for the
    last two ``event_time`` holds the located crossing time and the samples
    stop there.
    """

    t: np.ndarray
    states: np.ndarray
    energy_drift: float
    status: str = "ok"
    event_time: float | None = None
    sol: Callable | None = field(default=None, repr=False)
    params: DimensionParams | None = field(default=None, repr=False)

    @property
    def halted(self) -> bool:
        return self.status != "ok"

    def __call__(self, t):
        """Dense-output states at ``t``, shape ``(..., 4)``."""
        if self.sol is None:
            raise ValueError("trajectory has no dense output")
        return np.moveaxis(np.asarray(self.sol(t)), 0, -1)


def integrate(params: DimensionParams, s0, t_span, tolerance: float = 1e-10, *,
              raise_on_event: bool = False, dense: bool = True,
              max_step: float = np.inf) -> Trajectory:
    """Integrate the Fowler ODE with an adaptive 8(5,3) Runge-Kutta pair.

    The run stops early when ``v`` crosses zero or the blow-up guard fires.
    With ``raise_on_event`` those outcomes raise ``ZeroCrossingDetected`` /
    ``BlowUpDetected`` (carrying the event time) instead of being flagged.
    """
    if not tolerance > 0:
        raise ValidationError("tolerance must be positive")
    t0, t1 = (float(x) for x in t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)):
        raise ValidationError("t_span must be finite")
    y0 = np.asarray(s0, dtype=float).reshape(4)
    if not np.all(np.isfinite(y0)):
        raise ValidationError("initial state must be finite")
    if y0[0] < 0:
        raise InadmissibleState("initial v must be non-negative")
    vguard = GUARD_FACTOR * params.a0

    def crossed_zero(t, y):
        return y[0]

    crossed_zero.terminal = True
    crossed_zero.direction = -1

    def blew_up(t, y):
        return max(abs(y[0]) / vguard, abs(y[3]) / V3_GUARD) - 1.0

    blew_up.terminal = True
    blew_up.direction = 1

    events = [crossed_zero, blew_up]
    if y0[0] == 0.0:
        events = [blew_up]
    res = solve_ivp(make_field(params), (t0, t1), y0, method="DOP853", rtol=tolerance,
                    atol=tolerance * 1e-3 * params.a0, events=events, dense_output=dense,
                    max_step=max_step)
    if res.status < 0:
        raise Delaunay4Error(f"integration failed: {res.message}")
    status, event_time = "ok", None
    if res.status == 1:
        if y0[0] != 0.0 and res.t_events[0].size:
            status, event_time = "zero_crossing", float(res.t_events[0][0])
        else:
            status, event_time = "blow_up", float(res.t_events[-1][0])
    states = res.y.T.copy()
    keep = states[:, 0] >= 0
    energies = hamiltonian(params, np.where(keep[:, None], states, 0.0))[keep]
    drift = relative_drift(params, energies) if energies.size else 0.0
    traj = Trajectory(t=res.t.copy(), states=states, energy_drift=drift, status=status,
                      event_time=event_time, sol=res.sol, params=params)
    if raise_on_event and status == "zero_crossing":
        raise ZeroCrossingDetected(f"v crossed zero at t={event_time:.12g}", event_time)
    if raise_on_event and status == "blow_up":
        raise BlowUpDetected(f"blow-up guard fired at t={event_time:.12g}", event_time)
    return traj


def cylinder_to_radial(params: DimensionParams, r, v, v1, v2):
    """Radial profile ``u = r^-gamma v(-ln r)`` and its first two r-derivatives.

    ``v1``, ``v2`` are derivatives with respect to the cylinder variable
    ``t = -ln r``.
    """
    r = np.asarray(r, dtype=float)
    g = params.gamma
    base = r ** (-g)
    u = base * v
    du = -base / r * (g * np.asarray(v) + v1)
    d2u = base / r**2 * ((g + 1.0) * (g * np.asarray(v) + v1) + g * np.asarray(v1) + v2)
    return u, du, d2u


def superharmonic_check(params: DimensionParams, r, u, du, d2u):
    """Check ``-Delta u = -(u'' + (n-1) u'/r) > 0`` on a radial grid.

    Returns ``(ok, margin)`` where ``margin`` is the minimum of ``-Delta u``.
    """
    r = np.asarray(r, dtype=float)
    minus_lap = -(np.asarray(d2u) + (params.n - 1) / r * np.asarray(du))
    margin = float(np.min(minus_lap))
    return bool(margin > 0), margin
