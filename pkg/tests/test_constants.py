import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from delaunay4.constants import harmonic_multiplicity, make_params, mode, sphere_area
from delaunay4.errors import DimensionError


def test_n5_closed_forms():
    p = make_params(5)
    assert p.gamma == 0.5
    assert p.sobolev_exp == 10.0
    assert p.c_n == 105 / 16
    assert p.K0 == 1.5625
    assert p.K2 == 6.5
    assert p.J0 == 2.5
    # a0^8 = n(n-4)/(n^2-4) = 5/21
    assert p.a0 == pytest.approx((5 / 21) ** 0.125, rel=1e-15)
    assert p.a0 == pytest.approx(0.8357835878132627, rel=1e-15)


def test_a0_is_the_equilibrium():
    # K0 a0 = c_n a0^(2**-1), i.e. K0 = c_n a0^(2**-2)
    for n in range(5, 12):
        p = make_params(n)
        assert p.c_n * p.a0 ** p.nonlinear_power == pytest.approx(p.K0, rel=1e-13)


def test_derived_constants_relations():
    for n in (5, 6, 7, 8, 13):
        p = make_params(n)
        assert p.c_hat * p.sobolev_exp == pytest.approx(p.c_n)
        assert p.c_check == pytest.approx(p.c_n - p.c_tilde)
        assert p.sqrt_K0 ** 2 == pytest.approx(p.K0)


@pytest.mark.parametrize("n", [4, 3, 0, -2])
def test_low_dimension_rejected(n):
    with pytest.raises(DimensionError, match="dimension must be ≥ 5"):
        make_params(n)


def test_non_integer_dimension_rejected():
    with pytest.raises(DimensionError):
        make_params(5.5)


def test_harmonic_modes():
    p = make_params(5)
    assert mode(p, 0).lambda_j == 0
    assert mode(p, 1).lambda_j == 4  # = n - 1
    assert mode(p, 2).lambda_j == 10
    assert harmonic_multiplicity(5, 1) == 5
    assert harmonic_multiplicity(5, 2) == 14  # traceless symmetric 5x5
    assert harmonic_multiplicity(3, 4) == 9  # 2j + 1 on S^2


def test_sphere_area():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(5) == pytest.approx(8 * math.pi**2 / 3)


@given(st.integers(min_value=5, max_value=200))
def test_constants_finite_and_ordered(n):
    p = make_params(n)
    vals = np.array(list(p.as_dict().values()), dtype=float)
    assert np.all(np.isfinite(vals))
    assert 0 < p.a0 < 1
    assert p.c_check < 0 < p.c_n < p.c_tilde
