"""Closed-form profile families, the cylindrical change of variables and Kelvin transforms.

Kinds
-----
``spherical``
    ``u(x) = (2 mu / (1 + mu^2 |x - x0|^2))^gamma``, smooth at the origin.
``fowler``
    ``u(x) = |x|^-gamma v_a(-ln|x| + T)`` built from a periodic orbit.
``deformed``
    A Fowler solution pushed through inversion, translation by ``x0`` and
    inversion; on the cylinder
    ``v(t, theta) = |theta - x0 e^-t|^-gamma v_a(t + T + ln|theta - x0 e^-t|)``.
``pmap``
    ``Lambda * inner`` for a unit direction ``Lambda`` with non-negative entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import DimensionParams
from .dynamics import cylinder_to_radial, superharmonic_check
from .errors import ValidationError
from .orbits import PeriodicOrbit, orbit_provider as _default_provider

SINGULAR_LOCUS_TOL = 1e-12
KINDS = ("spherical", "fowler", "deformed", "pmap")


@dataclass(frozen=True)
class ProfileSpec:
    kind: str
    a: float | None = None
    T: float = 0.0
    x0: tuple | None = None
    mu: float = 1.0
    direction: tuple | None = None
    inner: "ProfileSpec | None" = None

    @property
    def singular(self) -> bool:
        if self.kind == "pmap":
            return self.inner.singular
        return self.kind in ("fowler", "deformed")

    @property
    def components(self) -> int:
        return len(self.direction) if self.kind == "pmap" else 1


def spherical(x0=None, mu: float = 1.0) -> ProfileSpec:
    if not mu > 0:
        raise ValidationError("spherical scale mu must be positive")
    return ProfileSpec("spherical", x0=None if x0 is None else tuple(map(float, x0)), mu=float(mu))


def fowler(a: float, T: float = 0.0) -> ProfileSpec:
    return ProfileSpec("fowler", a=float(a), T=float(T))


def deformed(a: float, T: float, x0) -> ProfileSpec:
    return ProfileSpec("deformed", a=float(a), T=float(T), x0=tuple(map(float, x0)))


def pmap_lift(direction, inner: ProfileSpec) -> ProfileSpec:
    lam = np.asarray(direction, dtype=float).ravel()
    if abs(np.linalg.norm(lam) - 1.0) > 1e-12:
        raise ValidationError("p-map direction must have unit norm")
    if inner.singular and np.any(lam <= 0):
        raise ValidationError("singular p-map lifts need strictly positive directions")
    if np.any(lam < 0):
        raise ValidationError("p-map directions must be non-negative")
    if inner.kind == "pmap":
        raise ValidationError("nested p-map lifts are not supported")
    return ProfileSpec("pmap", direction=tuple(lam), inner=inner)


def _validate(params: DimensionParams, spec: ProfileSpec):
    if spec.kind not in KINDS:
        raise ValidationError(f"unknown profile kind {spec.kind!r}")
    if spec.kind in ("fowler", "deformed"):
        if spec.a is None or not 0.0 < spec.a <= params.a0 * (1 + 1e-12):
            raise ValidationError(f"Fowler parameter must lie in (0, a0], got {spec.a!r}")
    if spec.kind in ("spherical", "deformed") and spec.x0 is not None and len(spec.x0) != params.n:
        raise ValidationError(f"x0 must have {params.n} components")


def _points(params: DimensionParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.n:
        raise ValidationError(f"points must have {params.n} coordinates, got shape {x.shape}")
    return x


def _orbit_for(params, spec, provider) -> PeriodicOrbit:
    provider = provider or _default_provider(params)
    return provider(spec.a)


# --- cylinder-side evaluation -------------------------------------------------

def spherical_cylinder_state(params: DimensionParams, mu: float, t) -> np.ndarray:
    """``(v, v', v'', v''')`` of ``v = sech(t - ln mu)^gamma``, the cylinder image of ``u_{0,mu}``."""
    g = params.gamma
    tau = np.asarray(t, dtype=float) - np.log(mu)
    w = np.tanh(tau)
    v = np.cosh(tau) ** (-g)
    v1 = -g * w * v
    q = (g * g + g) * w * w - g
    v2 = v * q
    v3 = v1 * q + v * 2.0 * (g * g + g) * w * (1.0 - w * w)
    return np.stack([v, v1, v2, v3], axis=-1)


def deformed_cylinder(params: DimensionParams, orbit: PeriodicOrbit, T: float, x0, t, theta) -> np.ndarray:
    """Deformed profile on the cylinder, ``t`` and unit ``theta`` broadcast together.

    ``theta`` carries the coordinates on its last axis.
    """
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    d = np.linalg.norm(theta - x0 * np.exp(-t)[..., None], axis=-1)
    if np.any(d < SINGULAR_LOCUS_TOL):
        raise ValidationError("evaluation point on the singular locus of the deformed profile")
    return d ** (-params.gamma) * orbit.state(t + T + np.log(d))[..., 0]


def cylinder_samples(params: DimensionParams, spec: ProfileSpec, t, theta, *,
                     provider: Callable | None = None) -> np.ndarray:
    """Values ``v(t_i, theta_k)`` of a scalar profile, shape ``(len(t), len(theta))``."""
    _validate(params, spec)
    t = np.asarray(t, dtype=float)
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if spec.kind == "spherical":
        x = np.exp(-t)[:, None, None] * theta[None, :, :]
        return np.exp(-params.gamma * t)[:, None] * eval_profile(params, spec, x)
    orbit = _orbit_for(params, spec, provider)
    if spec.kind == "fowler":
        return np.repeat(orbit.state(t + spec.T)[:, 0][:, None], theta.shape[0], axis=1)
    if spec.kind == "deformed":
        return deformed_cylinder(params, orbit, spec.T, spec.x0, t[:, None], theta[None, :, :])
    raise ValidationError("cylinder samples are defined for scalar profiles only")


def theta_grid(n: int, count: int = 8, seed: int = 0) -> np.ndarray:
    """Antipodally symmetric unit vectors: the ``2n`` axis points plus ``2*count`` seeded ones."""
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((count, n))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    axes = np.eye(n)
    return np.vstack([axes, -axes, extra, -extra])


# --- pointwise evaluation ----------------------------------------------------

def eval_profile(params: DimensionParams, spec: ProfileSpec, x, *,
                 provider: Callable | None = None) -> np.ndarray:
    """Profile values at points ``x`` (coordinates on the last axis).

    Scalar kinds return shape ``x.shape[:-1]``; p-map lifts append an axis
    of length ``p``.
    """
    _validate(params, spec)
    x = _points(params, x)
    g = params.gamma
    if spec.kind == "pmap":
        inner = eval_profile(params, spec.inner, x, provider=provider)
        return inner[..., None] * np.asarray(spec.direction)
    if spec.kind == "spherical":
        shift = x if spec.x0 is None else x - np.asarray(spec.x0)
        r2 = np.sum(shift**2, axis=-1)
        return (2.0 * spec.mu / (1.0 + spec.mu**2 * r2)) ** g
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValidationError("singular profiles cannot be evaluated at the origin")
    orbit = _orbit_for(params, spec, provider)
    t = -np.log(r)
    if spec.kind == "fowler":
        return r ** (-g) * orbit.v(t + spec.T)
    theta = x / r[..., None]
    return r ** (-g) * deformed_cylinder(params, orbit, spec.T, spec.x0, t, theta)


def cylindrical_transform(params: DimensionParams, r, u):
    """``(t, v)`` with ``t = -ln r`` and ``v = r^gamma u``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValidationError("radii must be positive")
    return -np.log(r), r**params.gamma * np.asarray(u, dtype=float)


def inverse_cylindrical_transform(params: DimensionParams, t, v):
    """``(r, u)`` with ``r = e^-t`` and ``u = e^(gamma t) v``."""
    t = np.asarray(t, dtype=float)
    return np.exp(-t), np.exp(params.gamma * t) * np.asarray(v, dtype=float)


def kelvin_transform(params: DimensionParams, func: Callable, x, x0=None, mu: float = 1.0) -> np.ndarray:
    """``K^(n-4) U(I(x))`` with ``K = mu/|x - x0|`` and ``I(x) = x0 + K^2 (x - x0)``."""
    x = _points(params, x)
    x0 = np.zeros(params.n) if x0 is None else np.asarray(x0, dtype=float)
    d = x - x0
    dist = np.linalg.norm(d, axis=-1)
    if np.any(dist == 0):
        raise ValidationError("Kelvin transform is undefined at its centre")
    K = mu / dist
    image = x0 + (K**2)[..., None] * d
    return K ** (params.n - 4) * np.asarray(func(image))


def inversion(x, x0=None, mu: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x0 = np.zeros(x.shape[-1]) if x0 is None else np.asarray(x0, dtype=float)
    d = x - x0
    return x0 + (mu**2 / np.sum(d**2, axis=-1))[..., None] * d


# --- checks --------------------------------------------------------------------

def spherical_bilaplacian(params: DimensionParams, mu: float, r) -> np.ndarray:
    """Exact ``Delta^2 u_{0,mu}`` at radii ``r``.

    With ``u = F(r^2)`` the radial Laplacian is ``4 rho F'' + 2n F'`` in
    ``rho = r^2``; applying it twice needs ``F'' .. F''''`` of
    ``F = (2mu)^gamma (1 + mu^2 rho)^-gamma``, which are closed form.
    """
    r = np.asarray(r, dtype=float)
    n, g = params.n, params.gamma
    k = mu * mu
    rho = r * r
    base = 1.0 + k * rho
    A = (2.0 * mu) ** g

    def F(m):
        coef = np.prod([-g - i for i in range(m)]) if m else 1.0
        return A * coef * k**m * base ** (-g - m)

    F1, F2, F3, F4 = F(1), F(2), F(3), F(4)
    G1 = 4.0 * F2 + 4.0 * rho * F3 + 2.0 * n * F2
    G2 = 8.0 * F3 + 4.0 * rho * F4 + 2.0 * n * F3
    return 4.0 * rho * G2 + 2.0 * n * G1


def spherical_pde_residual(params: DimensionParams, mu: float, r) -> float:
    """``max |Delta^2 u - c_n u^(2**-1)| / max |c_n u^(2**-1)|`` on the radii."""
    r = np.asarray(r, dtype=float)
    u = eval_profile(params, spherical(None, mu), r[:, None] * np.eye(params.n)[0])
    rhs = params.c_n * u ** (params.sobolev_exp - 1.0)
    return float(np.max(np.abs(spherical_bilaplacian(params, mu, r) - rhs)) / np.max(np.abs(rhs)))


@dataclass
class BoundsReport:
    lower_ok: bool
    upper_ok: bool
    superharmonic: bool
    margin: float

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok and self.superharmonic


def fowler_bounds(params: DimensionParams, orbit: PeriodicOrbit, T: float = 0.0,
                  radii=None, rtol: float = 1e-12) -> BoundsReport:
    """Check ``a r^-gamma <= u(r) <= max(v_a) r^-gamma`` and ``-Delta u > 0`` on ``(0, 1/2]``."""
    r = np.geomspace(1e-6, 0.5, 100) if radii is None else np.asarray(radii, dtype=float)
    if np.any((r <= 0) | (r > 0.5)):
        raise ValidationError("radii must lie in (0, 1/2]")
    s = orbit.state(-np.log(r) + T)
    u, du, d2u = cylinder_to_radial(params, r, s[:, 0], s[:, 1], s[:, 2])
    scale = r ** (-params.gamma)
    vmax = orbit.v_max
    lower = bool(np.all(u >= orbit.a * scale * (1 - rtol)))
    upper = bool(np.all(u <= vmax * scale * (1 + rtol)))
    ok, margin = superharmonic_check(params, r, u, du, d2u)
    return BoundsReport(lower, upper, ok, margin)


@dataclass
class ExpansionFit:
    slope: float
    stderr: float
    exact_match: bool = False


def deformed_expansion_residual(params: DimensionParams, orbit: PeriodicOrbit, x0,
                                t_range=(3.0, 8.0), *, subtract: bool = True,
                                n_t: int = 101, n_theta: int = 64) -> ExpansionFit:
    """Decay rate of the deformed profile minus its first-order expansion.

    ``R = v_{a,0,x0} - v_a - e^-t <theta, x0> (gamma v_a - v_a')`` on a circle
    of directions through ``x0``; returns the least-squares slope of
    ``ln max_theta |R|`` against ``t``.  With ``subtract=False`` the first-order
    term is kept in ``R``.
    """
    from .fit import rate_regression

    x0 = np.asarray(x0, dtype=float)
    norm = np.linalg.norm(x0)
    if norm == 0:
        return ExpansionFit(slope=float("nan"), stderr=0.0, exact_match=True)
    e1 = x0 / norm
    helper = np.eye(params.n)[np.argmin(np.abs(e1))]
    e2 = helper - helper.dot(e1) * e1
    e2 /= np.linalg.norm(e2)
    phi = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    theta = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
    t = np.linspace(*t_range, n_t)
    V = deformed_cylinder(params, orbit, 0.0, x0, t[:, None], theta[None, :, :])
    s = orbit.state(t)
    R = V - s[:, 0][:, None]
    if subtract:
        R -= np.exp(-t)[:, None] * (theta @ x0)[None, :] * (params.gamma * s[:, 0] - s[:, 1])[:, None]
    fit = rate_regression(t, np.max(np.abs(R), axis=1))
    return ExpansionFit(slope=fit.slope, stderr=fit.stderr)
