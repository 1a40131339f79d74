import math

import mpmath as mp
import numpy as np
import pytest

from delaunay4.constants import make_params
from delaunay4.dynamics import integrate
from delaunay4.errors import NoReturnFound, ValidationError
from delaunay4.orbits import (OrbitFailure, cylinder_frequency, energy_drift_over_periods,
                              linear_period, orbit_table, period_detect, shoot)

P5 = make_params(5)

# frozen output of shoot(P5, 0.6 a0), validated below in 30-digit arithmetic
B_06 = 0.12036272845784807
T_06 = 6.746729531895358


def test_cylinder_frequency_hand_value():
    # C0 = -12.5, B = 6.5: omega^2 = (sqrt(B^2 - 4 C0) - B) / 2
    w2 = (math.sqrt(6.5**2 + 50.0) - 6.5) / 2
    assert cylinder_frequency(P5) == pytest.approx(math.sqrt(w2), rel=1e-15)
    assert linear_period(P5) == pytest.approx(5.04296553, rel=1e-8)


def test_degenerate_orbit():
    orb = shoot(P5, P5.a0)
    assert orb.degenerate
    assert orb.b_of_a == 0.0
    assert np.all(orb.states[:, 0] == P5.a0)
    assert orb.period == pytest.approx(linear_period(P5))


def test_frozen_orbit(orbit06):
    assert orbit06.b_of_a == pytest.approx(B_06, rel=1e-9)
    assert orbit06.period == pytest.approx(T_06, rel=1e-10)
    assert orbit06.periodicity_residual < 1e-7
    assert orbit06.states[:, 0].min() == pytest.approx(orbit06.a, rel=1e-10)


def test_frozen_orbit_high_precision_oracle():
    """Integrate the frozen (a, b) in 30-digit Taylor arithmetic to T/2.

    A reversible orbit started on the section must sit on it again at the
    half period: v' = v''' = 0 there.
    """
    mp.mp.dps = 30
    K0, K2, cn = mp.mpf(25) / 16, mp.mpf(13) / 2, mp.mpf(105) / 16
    a = mp.mpf("0.6") * (mp.mpf(5) / 21) ** (mp.mpf(1) / 8)
    f = lambda t, y: [y[1], y[2], y[3], K2 * y[2] - K0 * y[0] + cn * y[0] ** 9]
    sol = mp.odefun(f, 0, [a, 0, mp.mpf(B_06), 0])
    y = sol(mp.mpf(T_06) / 2)
    assert abs(float(y[1])) < 1e-9 and abs(float(y[3])) < 1e-9
    # and the state there is the orbit maximum
    assert float(y[2]) < 0


def test_period_decreases_with_a(orbit_of):
    periods = [orbit_of(f).period for f in (0.3, 0.5, 0.7, 0.9, 0.99)]
    assert np.all(np.diff(periods) < 0)


def test_near_cylinder_curvature_small():
    orb = shoot(P5, 0.999 * P5.a0)
    assert 0 < orb.b_of_a < 1e-3 * P5.K0 * P5.a0


def test_small_a_periodicity():
    orb = shoot(P5, 0.05 * P5.a0)
    assert orb.periodicity_residual < 1e-7
    assert orb.period > 15


def test_reversibility(orbit06):
    t = np.linspace(0, orbit06.period, 37)
    s = orbit06.state(t)
    back = orbit06.state(orbit06.period - t)
    assert np.allclose(s[:, 0], back[:, 0], atol=1e-12)
    assert np.allclose(s[:, 1], -back[:, 1], atol=1e-12)


def test_spline_matches_dense_output(orbit06):
    t = np.linspace(0.1, 3 * orbit06.period, 200)
    assert np.max(np.abs(orbit06.v(t) - orbit06.state(t)[:, 0])) < 1e-8 * orbit06.a


def test_invalid_parameter():
    with pytest.raises(ValidationError):
        shoot(P5, 1.1 * P5.a0)
    with pytest.raises(ValidationError):
        shoot(P5, 0.0)


def test_period_detect_on_trajectory(orbit06):
    traj = integrate(P5, orbit06.initial_state, (0.0, 1.5 * orbit06.period), 1e-12)
    det = period_detect(traj, orbit06.initial_state)
    assert not det.degenerate
    assert det.period == pytest.approx(orbit06.period, rel=1e-6)


def test_period_detect_constant_and_missing():
    traj = integrate(P5, (P5.a0, 0, 0, 0), (0.0, 3.0), 1e-10)
    det = period_detect(traj, (P5.a0, 0, 0, 0))
    assert det.degenerate and det.period == pytest.approx(linear_period(P5))
    short = integrate(P5, (0.5, 0.0, B_06, 0.0), (0.0, 2.0), 1e-10)
    with pytest.raises(NoReturnFound):
        period_detect(short, (0.5, 0.0, B_06, 0.0))


def test_orbit_table_parallel_matches_serial():
    grid = [0.45 * P5.a0, 0.75 * P5.a0, 2.0]
    serial = orbit_table(P5, grid, threads=1)
    par = orbit_table(P5, grid, threads=3)
    assert isinstance(serial[2], OrbitFailure) and isinstance(par[2], OrbitFailure)
    for s, q in zip(serial[:2], par[:2]):
        assert s.period == q.period and s.b_of_a == q.b_of_a


def test_energy_drift_over_periods(orbit06):
    assert energy_drift_over_periods(P5, orbit06, 10, 1e-10) < 1e-8
