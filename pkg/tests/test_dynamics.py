import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaunay4.constants import make_params
from delaunay4.dynamics import (InadmissibleState, cylinder_to_radial, hamiltonian, integrate, rhs,
                                superharmonic_check)
from delaunay4.errors import BlowUpDetected, ZeroCrossingDetected

P5 = make_params(5)


def test_rhs_at_equilibrium_vanishes():
    f = rhs(P5, np.array([P5.a0, 0.0, 0.0, 0.0]))
    assert np.max(np.abs(f)) < 1e-14


def test_rhs_rejects_negative_values():
    with pytest.raises(InadmissibleState):
        rhs(P5, np.array([-0.1, 0.0, 0.0, 0.0]))


def test_cylinder_energy_closed_form():
    # H(a0, 0, 0, 0) = a0^2 K0 (1/2** - 1/2), about -0.4366 for n = 5
    h = hamiltonian(P5, np.array([P5.a0, 0, 0, 0]))
    assert h == pytest.approx(P5.a0**2 * P5.K0 * (0.1 - 0.5), rel=1e-14)
    assert h == pytest.approx(-0.43658387853625613, rel=1e-14)


def test_energy_conserved_short_run():
    traj = integrate(P5, (0.5, 0.0, 0.12036272845784807, 0.0), (0.0, 3.0), 1e-10)
    assert traj.status == "ok"
    assert traj.energy_drift < 1e-8


def test_zero_crossing_and_blow_up_events():
    t1 = integrate(P5, (0.5, 0.0, 0.0, 0.0), (0.0, 60.0), 1e-10)
    assert t1.status == "zero_crossing"
    t2 = integrate(P5, (0.5, 0.0, 0.5, 0.0), (0.0, 60.0), 1e-10)
    assert t2.status == "blow_up"
    with pytest.raises(ZeroCrossingDetected):
        integrate(P5, (0.5, 0.0, 0.0, 0.0), (0.0, 60.0), 1e-10, raise_on_event=True)
    with pytest.raises(BlowUpDetected):
        integrate(P5, (0.5, 0.0, 0.5, 0.0), (0.0, 60.0), 1e-10, raise_on_event=True)


@settings(deadline=None, max_examples=30)
@given(st.floats(0.05, 2.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_hamiltonian_is_a_first_integral(v, v1, v2, v3):
    # dH/dt = grad H . f must vanish identically
    s = np.array([v, v1, v2, v3])
    f = rhs(P5, s)
    h = 1e-6
    grad = np.array([(hamiltonian(P5, s + h * e) - hamiltonian(P5, s - h * e)) / (2 * h)
                     for e in np.eye(4)])
    assert abs(grad @ f) < 1e-6 * (1 + np.abs(grad).max() * np.abs(f).max())


def test_cylinder_to_radial_matches_finite_differences():
    # u = r^-gamma v(-ln r) for v(t) = 2 + sin t
    r = np.linspace(0.2, 0.9, 15)
    t = -np.log(r)
    u, du, d2u = cylinder_to_radial(P5, r, 2 + np.sin(t), np.cos(t), -np.sin(t))
    f = lambda rr: rr ** -0.5 * (2 + np.sin(-np.log(rr)))
    h = 1e-4
    assert np.allclose(du, (f(r + h) - f(r - h)) / (2 * h), rtol=1e-7)
    assert np.allclose(d2u, (f(r + h) - 2 * f(r) + f(r - h)) / h**2, rtol=1e-5)


def test_superharmonic_check_on_fundamental_solution_power():
    # u = r^-gamma is superharmonic for n = 5: -Delta u = gamma (n - 2 - gamma) r^(-gamma-2)
    r = np.linspace(0.1, 0.5, 10)
    u, du, d2u = cylinder_to_radial(P5, r, np.ones_like(r), np.zeros_like(r), np.zeros_like(r))
    ok, margin = superharmonic_check(P5, r, u, du, d2u)
    assert ok
    assert margin == pytest.approx((0.5 * 2.5 * r ** -2.5).min())
