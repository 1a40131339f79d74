"""Dimension-dependent constants of the fourth-order critical problem.

Everything downstream (the Fowler ODE, the linearized operators, the profile
families) is parametrized by the dimension ``n >= 5`` only; this module
computes all of those constants once from their closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DimensionError

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class DimensionParams:
    """Closed-form constants for dimension ``n``.

    Attributes
    ----------
    n : int
        Ambient dimension, ``n >= 5``.
    gamma : float
        Fowler scaling exponent ``(n - 4) / 2``.
    sobolev_exp : float
        Critical exponent ``2** = 2n / (n - 4)``.
    c_n, c_hat, c_tilde, c_check : float
        Nonlinearity constant ``n(n-4)(n^2-4)/16`` and its derived forms
        ``c_n / 2**``, ``c_n (2** - 1)`` and ``c_n - c_tilde``.
    K0, K2, J0 : float
        Coefficients of the cylindrical bi-Laplacian.
    a0 : float
        Cylinder equilibrium of the Fowler ODE.
    """

    n: int
    gamma: float
    sobolev_exp: float
    c_n: float
    c_hat: float
    c_tilde: float
    c_check: float
    K0: float
    K2: float
    J0: float
    a0: float

    @property
    def nonlinear_power(self) -> float:
        """Exponent ``2** - 2`` of the potential term ``v**(2** - 2)``."""
        return self.sobolev_exp - 2.0

    @property
    def sqrt_K0(self) -> float:
        return self.n * (self.n - 4) / 4.0

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "sobolev_exp": self.sobolev_exp,
            "c_n": self.c_n,
            "c_hat": self.c_hat,
            "c_tilde": self.c_tilde,
            "c_check": self.c_check,
            "K0": self.K0,
            "K2": self.K2,
            "J0": self.J0,
            "a0": self.a0,
        }


@dataclass(frozen=True)
class HarmonicMode:
    """Eigenvalue ``lambda_j = j(j + n - 2)`` of ``-Delta`` on the unit sphere.

    ``multiplicity`` is ``None`` when it does not fit in a signed 64-bit
    integer.
    """

    j: int
    lambda_j: float
    multiplicity: int | None


def make_params(n: int) -> DimensionParams:
    if isinstance(n, bool) or int(n) != n:
        raise DimensionError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < 5:
        raise DimensionError("dimension must be ≥ 5")
    nf = float(n)
    sobolev = 2.0 * nf / (nf - 4.0)
    c_n = nf * (nf - 4.0) * (nf * nf - 4.0) / 16.0
    c_tilde = c_n * (sobolev - 1.0)
    return DimensionParams(
        n=n,
        gamma=(nf - 4.0) / 2.0,
        sobolev_exp=sobolev,
        c_n=c_n,
        c_hat=c_n / sobolev,
        c_tilde=c_tilde,
        c_check=c_n - c_tilde,
        K0=nf * nf * (nf - 4.0) ** 2 / 16.0,
        K2=(nf * nf - 4.0 * nf + 8.0) / 2.0,
        J0=nf * (nf - 4.0) / 2.0,
        a0=(nf * (nf - 4.0) / (nf * nf - 4.0)) ** ((nf - 4.0) / 8.0),
    )


def harmonic_multiplicity(n: int, j: int) -> int | None:
    """Dimension of the degree-``j`` spherical harmonics on ``S^{n-1}``."""
    if j == 0:
        return 1
    m = (2 * j + n - 2) * math.factorial(j + n - 3) // (math.factorial(n - 2) * math.factorial(j))
    return m if m <= _INT64_MAX else None


def mode(params: DimensionParams, j: int) -> HarmonicMode:
    if j < 0:
        raise ValueError(f"mode index must be non-negative, got {j}")
    n = params.n
    return HarmonicMode(j=j, lambda_j=float(j * (j + n - 2)), multiplicity=harmonic_multiplicity(n, j))


def sphere_area(n: int) -> float:
    """Surface area ``omega_{n-1} = 2 pi^{n/2} / Gamma(n/2)`` of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
