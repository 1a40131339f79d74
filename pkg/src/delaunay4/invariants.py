"""Pohozaev invariants of radial profiles.

For a radial profile the angular part of the Pohozaev integrand vanishes
and the cylindrical invariant is the Hamiltonian of the Fowler ODE; the
spherical invariant is that value times the area of the unit sphere.  It is
zero for the smooth spherical profiles and negative along every
Emden-Fowler orbit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import DimensionParams, sphere_area
from .dynamics import hamiltonian
from .errors import ValidationError
from .orbits import OrbitFailure, PeriodicOrbit, orbit_table


@dataclass(frozen=True)
class PohozaevValue:
    cyl: float
    sph: float
    omega: float
    conservation: float = 0.0  # max |H(t) - H(0)| over the samples used


def _value(params, states) -> PohozaevValue:
    H = hamiltonian(params, np.atleast_2d(states))
    h0 = float(H[0])
    omega = sphere_area(params.n)
    return PohozaevValue(cyl=h0, sph=omega * h0, omega=omega,
                         conservation=float(np.max(np.abs(H - h0))))


def pohozaev_of_orbit(params: DimensionParams, profile, *, t=None) -> PohozaevValue:
    """Invariant of a periodic orbit, a radial profile spec, or raw cylinder states.

    ``profile`` may be a :class:`PeriodicOrbit`, a spherical / Fowler /
    p-map :class:`~delaunay4.profiles.ProfileSpec` centred at the origin,
    or an array of states ``(v, v', v'', v''')`` along the cylinder.  The
    value is ``H`` at the first state; ``conservation`` reports its drift
    over the rest.
    """
    from .profiles import ProfileSpec, spherical_cylinder_state

    if isinstance(profile, PeriodicOrbit):
        return _value(params, profile.states)
    if isinstance(profile, ProfileSpec):
        if profile.kind == "pmap":
            # |Lambda u| = |u| for a unit direction, so the lift inherits the scalar value
            return pohozaev_of_orbit(params, profile.inner, t=t)
        if profile.kind == "spherical":
            if profile.x0 is not None and np.any(np.asarray(profile.x0) != 0):
                raise ValidationError("the invariant is computed for profiles centred at the origin")
            tt = np.linspace(-10.0, 10.0, 401) if t is None else np.asarray(t, dtype=float)
            return _value(params, spherical_cylinder_state(params, profile.mu, tt))
        if profile.kind == "fowler":
            from .orbits import cached_orbit
            return _value(params, cached_orbit(params.n, profile.a).states)
        raise ValidationError(f"profile kind {profile.kind!r} is not radial")
    states = np.asarray(profile, dtype=float)
    if states.shape[-1] != 4:
        raise ValidationError("cylinder states must have four components on the last axis")
    return _value(params, states)


@dataclass
class InvariantCurve:
    points: list = field(default_factory=list)  # (a, P_cyl) pairs, increasing a
    failures: list = field(default_factory=list)

    @property
    def monotone(self) -> str:
        """``"increasing"``, ``"decreasing"``, ``"non-monotone"`` or ``"n/a"`` (< 2 points)."""
        if len(self.points) < 2:
            return "n/a"
        d = np.diff([h for _, h in self.points])
        if np.all(d > 0):
            return "increasing"
        if np.all(d < 0):
            return "decreasing"
        return "non-monotone"

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def invariant_curve(params: DimensionParams, a_grid, orbits=None, *, shooter: Callable | None = None,
                    threads: int = 1) -> InvariantCurve:
    """``P_cyl(a)`` along a grid, from supplied orbits or by shooting."""
    a_grid = sorted(float(a) for a in a_grid)
    if orbits is None:
        orbits = orbit_table(params, a_grid, threads=threads, shooter=shooter)
    curve = InvariantCurve()
    for a, orb in zip(a_grid, orbits):
        if isinstance(orb, OrbitFailure):
            curve.failures.append(orb)
            continue
        curve.points.append((a, pohozaev_of_orbit(params, orb).cyl))
    return curve
