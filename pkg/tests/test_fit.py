import numpy as np
import pytest

from delaunay4.constants import make_params
from delaunay4.errors import DegenerateRegression, InsufficientSpan, ValidationError
from delaunay4.fit import DEFAULT_TABLE, fit_parameters, rate_regression, split_modes
from delaunay4.invariants import invariant_curve
from delaunay4.orbits import orbit_provider
from delaunay4.profiles import cylinder_samples, deformed, fowler, theta_grid

P5 = make_params(5)
THETA = theta_grid(5, 2, seed=3)


@pytest.fixture(scope="module")
def table():
    return [tuple(pt[:2]) for pt in invariant_curve(P5, [f * P5.a0 for f in DEFAULT_TABLE]).points]


def test_rate_regression_examples():
    t = np.linspace(0, 10, 201)
    assert rate_regression(t, 3 * np.exp(-2 * t)).slope == pytest.approx(-2.0, abs=1e-12)
    wobble = rate_regression(t, np.exp(-t) * (1 + 0.01 * np.sin(t)))
    assert wobble.slope == pytest.approx(-1.0, abs=2e-3)
    const = rate_regression(t, np.full_like(t, 0.5))
    assert const.slope == 0.0 and const.stderr == 0.0
    assert rate_regression(t, np.exp(-t), window=(2, 4)).points == 41


def test_rate_regression_degenerate():
    t = np.linspace(0, 1, 10)
    with pytest.raises(DegenerateRegression):
        rate_regression(t, np.zeros_like(t))
    with pytest.raises(DegenerateRegression):
        rate_regression(t, np.ones_like(t), window=(0.5, 0.5))
    with pytest.raises(ValidationError):
        rate_regression(t, np.ones(3))


def test_split_modes_exact():
    rng = np.random.default_rng(0)
    c0, c1 = rng.normal(size=7), rng.normal(size=(7, 5))
    V = c0[:, None] + c1 @ THETA.T
    g0, g1 = split_modes(V, THETA)
    assert g0 == pytest.approx(c0, abs=1e-13)
    assert g1 == pytest.approx(c1, abs=1e-13)
    _, none = split_modes(V[:, :3], THETA[:3])
    assert none is None


@pytest.mark.parametrize("frac,T", [(0.3, 1.1), (0.5, 0.0), (0.7, 2.9), (0.9, 4.0)])
def test_round_trip_exact_samples(table, frac, T):
    a = frac * P5.a0
    orbit = orbit_provider(P5)(a)
    t = np.linspace(0.0, 3.5 * orbit.period, 700)
    V = cylinder_samples(P5, fowler(a, T), t, THETA)
    res = fit_parameters(P5, t, THETA, V, table=table, estimate_x0=False)
    assert res.a_hat == pytest.approx(a, abs=1e-4)
    d = (res.T_hat - T + 0.5 * res.period) % res.period - 0.5 * res.period
    assert abs(d) < 1e-4


@pytest.fixture(scope="module")
def deformed_fit(table):
    a = 0.6 * P5.a0
    orbit = orbit_provider(P5)(a)
    x0 = np.array([0.1, 0, 0, 0, 0])
    t = np.linspace(0.0, 3.2 * orbit.period, 2200)
    V = cylinder_samples(P5, deformed(a, 0.0, x0), t, THETA)
    window = (2.0, 2.0 + 1.5 * orbit.period)
    return x0, fit_parameters(P5, t, THETA, V, table=table, window=window)


def test_deformed_fit(deformed_fit):
    x0, res = deformed_fit
    assert res.a_hat == pytest.approx(0.6 * P5.a0, abs=1e-6)
    assert res.x0_hat == pytest.approx(x0, abs=1e-8)
    assert res.beta0 == pytest.approx(1.0, abs=0.05)
    assert res.beta1 == pytest.approx(2.0, abs=0.05)
    assert res.beta1 >= res.beta0


def test_translation_equivariance(table):
    a, T, s = 0.6 * P5.a0, 0.7, 1.3
    orbit = orbit_provider(P5)(a)
    t = np.linspace(0.0, 3.5 * orbit.period, 700)
    V = cylinder_samples(P5, fowler(a, T), t, THETA)
    r0 = fit_parameters(P5, t, THETA, V, table=table, estimate_x0=False)
    r1 = fit_parameters(P5, t + s, THETA, V, table=table, estimate_x0=False)
    d = (r1.T_hat - (r0.T_hat - s) + 0.5 * r0.period) % r0.period - 0.5 * r0.period
    assert abs(d) < 1e-6


def test_fit_input_errors(table):
    t = np.linspace(0, 3, 50)
    V = np.ones((50, THETA.shape[0]))
    with pytest.raises(InsufficientSpan):
        fit_parameters(P5, t, THETA, V, table=table)
    with pytest.raises(ValidationError):
        fit_parameters(P5, t, THETA, V[:, :2], table=table)
    with pytest.raises(ValidationError):
        fit_parameters(P5, t[::-1], THETA, V, table=table)


def test_exact_samples_give_undefined_rates(table):
    a = 0.5 * P5.a0
    orbit = orbit_provider(P5)(a)
    t = np.linspace(0.0, 3.5 * orbit.period, 700)
    V = cylinder_samples(P5, fowler(a, 0.0), t, THETA)
    res = fit_parameters(P5, t, THETA, V, table=table, estimate_x0=False)
    if np.all(res.residual_curve[:, 1] == 0):
        assert np.isnan(res.beta0) and np.isnan(res.beta1)
    with pytest.raises(DegenerateRegression):
        fit_parameters(P5, t, THETA, V, table=table, window=(1.0, 1.001))
