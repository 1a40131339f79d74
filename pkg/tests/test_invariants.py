import numpy as np
import pytest

from delaunay4.constants import make_params, sphere_area
from delaunay4.errors import ValidationError
from delaunay4.invariants import invariant_curve, pohozaev_of_orbit
from delaunay4.profiles import fowler, pmap_lift, spherical, spherical_cylinder_state

P5 = make_params(5)


def test_cylinder_value(orbit_of):
    val = pohozaev_of_orbit(P5, orbit_of(1.0))
    assert val.cyl == pytest.approx(P5.a0**2 * P5.K0 * (1 / 10 - 1 / 2), rel=1e-14)
    assert val.cyl == pytest.approx(-0.4366, abs=1e-4)


def test_spherical_profile_zero():
    for mu in (0.3, 1.0, 4.0):
        val = pohozaev_of_orbit(P5, spherical(None, mu))
        assert abs(val.cyl) < 1e-8
        assert val.conservation < 1e-12


def test_spherical_cylinder_state_derivatives():
    t = np.linspace(-3, 3, 41)
    s = spherical_cylinder_state(P5, 1.7, t)
    h = 1e-5
    for k in range(3):
        fd = (spherical_cylinder_state(P5, 1.7, t + h)[:, k] - spherical_cylinder_state(P5, 1.7, t - h)[:, k]) / (2 * h)
        assert fd == pytest.approx(s[:, k + 1], abs=1e-8)


def test_spherical_off_centre_rejected():
    with pytest.raises(ValidationError):
        pohozaev_of_orbit(P5, spherical([0.1, 0, 0, 0, 0], 1.0))


def test_orbits_negative_and_conserved(orbit_of):
    for f in (0.1, 0.4, 0.8, 0.99):
        orb = orbit_of(f)
        val = pohozaev_of_orbit(P5, orb)
        assert val.cyl < 0
        assert val.conservation < 1e-9 * (1 + abs(val.cyl))
        assert val.sph == pytest.approx(sphere_area(5) * val.cyl, rel=1e-14)


def test_pmap_lift_same_invariant(orbit06):
    inner = fowler(orbit06.a)
    lifted = pohozaev_of_orbit(P5, pmap_lift([0.6, 0.8], inner))
    assert lifted.cyl == pytest.approx(pohozaev_of_orbit(P5, orbit06).cyl, rel=1e-14)


def test_invariant_curve(orbit_of):
    assert len(invariant_curve(P5, [])) == 0
    single = invariant_curve(P5, [P5.a0])
    assert single.points[0][1] == pytest.approx(-0.43658, abs=1e-5)
    grid = [f * P5.a0 for f in (0.1, 0.3, 0.6, 0.9)]
    curve = invariant_curve(P5, grid)
    assert curve.monotone == "decreasing"
    assert -0.01 < curve.points[0][1] < 0  # tends to 0- as a -> 0
