"""Deterministic built-in checks behind ``delaunay4 selftest``.

Each check yields one row ``(check, value, expected, tolerance, pass)``.
The seeded checks draw their random inputs from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import make_params
from .dynamics import hamiltonian
from .orbits import cached_orbit, energy_drift_over_periods, linear_period
from .profiles import cylindrical_transform, eval_profile, inverse_cylindrical_transform, kelvin_transform, spherical
from .spectral import coefficients, companion_matrix, indicial_roots_limit, monodromy


def _row(name, value, expected, tol):
    ok = bool(abs(value - expected) <= tol)
    return {"check": name, "value": float(value), "expected": float(expected), "tolerance": tol, "pass": ok}


def run(seed: int = 0) -> list[dict]:
    p = make_params(5)
    rows = [
        _row("K0", p.K0, 25.0 / 16.0, 1e-15),
        _row("K2", p.K2, 6.5, 1e-15),
        _row("J0", p.J0, 2.5, 1e-15),
        _row("a0", p.a0, (5.0 / 21.0) ** 0.125, 1e-15),
    ]
    for j, roots in ((0, (0.5, 2.5)), (1, (1.5, 3.5))):
        got = indicial_roots_limit(p, "spherical", j).positive
        for k, r in enumerate(roots):
            rows.append(_row(f"spherical_root_j{j}_{k}", got[k], r, 1e-12))
    cyl = indicial_roots_limit(p, "cylindrical", 1).positive
    rows.append(_row("cylindrical_root_j1_0", cyl[0], 1.0, 1e-12))
    rows.append(_row("cylindrical_root_j1_1", cyl[1], math.sqrt(13.5), 1e-12))

    flat = cached_orbit(5, p.a0)
    gam2 = p.sobolev_exp
    rows.append(_row("cylinder_energy", flat.energy, p.a0**2 * p.K0 * (1 / gam2 - 0.5), 1e-12))
    rows.append(_row("linear_period", linear_period(p), 5.0429664, 1e-6))

    orb = cached_orbit(5, 0.6 * p.a0)
    rows.append(_row("orbit_min", float(orb.states[:, 0].min()), orb.a, 1e-9))
    rows.append(_row("orbit_periodicity", orb.periodicity_residual, 0.0, 1e-7))
    rows.append(_row("orbit_drift_10", energy_drift_over_periods(p, orb, 10), 0.0, 1e-8))
    rows.append(_row("orbit_energy_negative", float(orb.energy < 0), 1.0, 0.0))
    rep = monodromy(p, orb, 1)
    rows.append(_row("j1_root_minus_one", float(np.min(np.abs(rep.indicial_roots + 1))), 0.0, 1e-3))
    rows.append(_row("j1_root_plus_one", float(np.min(np.abs(rep.indicial_roots - 1))), 0.0, 1e-3))
    rows.append(_row("j1_det_residual", rep.det_residual, 0.0, 1e-6))
    rep0 = monodromy(p, orb, 0)
    rows.append(_row("j0_unit_multiplicity", rep0.zero_freq_multiplicity, 2, 0))
    rows.append(_row("j0_jordan_rank", rep0.jordan_rank, 1, 0))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        co = coefficients(p, int(rng.integers(0, 6)))
        worst = max(worst, abs(np.trace(companion_matrix(co, rng.uniform(0, p.a0)))))
    rows.append(_row("companion_trace", worst, 0.0, 0.0))
    x = rng.uniform(-2, 2, size=(50, 5))
    u = lambda y: eval_profile(p, spherical([0.3, 0, 0, 0, 0], 1.7), y)
    twice = kelvin_transform(p, lambda y: kelvin_transform(p, u, y), x)
    rows.append(_row("kelvin_involution", float(np.max(np.abs(twice - u(x)) / np.abs(u(x)))), 0.0, 1e-12))
    r = np.sort(rng.uniform(1e-3, 10, 50))
    vals = rng.uniform(0.1, 2, 50)
    t, v = cylindrical_transform(p, r, vals)
    r2, u2 = inverse_cylindrical_transform(p, t, v)
    rows.append(_row("cylindrical_round_trip", float(np.max(np.abs(u2 - vals) / vals)), 0.0, 1e-13))
    return rows
