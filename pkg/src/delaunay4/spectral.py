"""Linearized operators about Emden-Fowler orbits and their Floquet data.

The projection of the linearized operator onto the ``j``-th spherical
harmonic is the fourth-order Hill-type operator

    L_j phi = phi'''' - B phi'' + C(t) phi,
    B = K2 + 2 lambda_j,  C(t) = K0 + lambda_j (lambda_j + J0) - c v(t)^(2**-2),

with ``c = c_tilde`` for scalar solutions and ``c = c_n`` for the block of a
p-map orthogonal to its direction.  Written as a first-order system with the
standard companion matrix its trace vanishes, so the monodromy is unimodular.

Monodromy matrices of these operators are badly conditioned: along the
orbit the multipliers reach 1e11-1e18 for n=5, and a product of segment
propagators (let alone a single full-period integration) loses the small
reciprocal multipliers entirely.  The period is therefore cut into short
segments whose propagators are kept separate, and the multipliers come
from the eigenvalues of the block-cyclic lift: if ``Phi_k`` are the segment
propagators then every eigenvalue ``lam`` of the lift satisfies
``lam**K = mu`` for a multiplier ``mu`` of the product.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .constants import DimensionParams, mode
from .errors import DimensionError, OrbitNotPeriodic, ValidationError
from .orbits import PERIODICITY_TOL, PeriodicOrbit

VARIANTS = ("scalar-c_tilde", "orthogonal-c")
CLUSTER_TOL = 1e-4
BAND_DELTA = 1e-4
MONODROMY_RTOL = 1e-12


@dataclass(frozen=True)
class LinearizedCoefficients:
    """Coefficients of ``L_j`` about the orbit ``v``.

    ``C(t) = base - coupling * v(t)**(2**-2)``; ``shift`` is subtracted from
    ``C`` when scanning ``L_j - sigma``.
    """

    params: DimensionParams
    j: int
    B: float
    base: float
    coupling: float
    variant: str = "scalar-c_tilde"
    shift: float = 0.0

    def C(self, v):
        p = self.params.nonlinear_power
        return self.base - self.shift - self.coupling * np.abs(v) ** p

    def shifted(self, sigma: float) -> "LinearizedCoefficients":
        return LinearizedCoefficients(self.params, self.j, self.B, self.base, self.coupling,
                                      self.variant, self.shift + float(sigma))


def coefficients(params: DimensionParams, j: int, variant: str = "scalar-c_tilde") -> LinearizedCoefficients:
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    lam = mode(params, j).lambda_j
    coupling = params.c_tilde if variant == "scalar-c_tilde" else params.c_n
    return LinearizedCoefficients(params=params, j=int(j), B=params.K2 + 2.0 * lam,
                                  base=params.K0 + lam * (lam + params.J0),
                                  coupling=coupling, variant=variant)


def companion_matrix(coeffs: LinearizedCoefficients, v: float) -> np.ndarray:
    """Companion matrix of ``phi'''' = B phi'' - C phi`` at profile value ``v``.

    The last row is ``(-C, 0, B, 0)``; the trace is zero.
    """
    m = np.diag(np.ones(3), 1)
    m[3, 0] = -float(coeffs.C(v))
    m[3, 2] = coeffs.B
    return m


# --- closed-form limits ------------------------------------------------------

@dataclass(frozen=True)
class IndicialRoots:
    which: str
    j: int
    B: float
    C: float
    roots: tuple  # four complex roots, +/- pairs
    indicial: tuple  # sorted real parts

    @property
    def positive(self) -> tuple:
        return tuple(sorted(r for r in self.indicial if r > 0))


def quartic_even_roots(B: float, C: float) -> list[complex]:
    """Roots of ``rho**4 - B rho**2 + C`` through the quadratic in ``rho**2``."""
    disc = cmath.sqrt(complex(B * B - 4.0 * C))
    # pick the sign that avoids cancellation, then Vieta for the other root
    z1 = 0.5 * (B + disc) if (B.real if isinstance(B, complex) else B) >= 0 else 0.5 * (B - disc)
    z2 = C / z1 if z1 != 0 else 0.5 * (B - disc)
    out = []
    for z in (z1, z2):
        r = cmath.sqrt(z)
        out.extend([r, -r])
    return out


def indicial_roots_limit(params: DimensionParams, which: str, j: int) -> IndicialRoots:
    """Indicial roots at the spherical (``v = 0``) or cylinder (``v = a0``) limit."""
    if which not in ("spherical", "cylindrical"):
        raise ValidationError("which must be 'spherical' or 'cylindrical'")
    coeffs = coefficients(params, j)
    v = 0.0 if which == "spherical" else params.a0
    C = float(coeffs.C(v))
    roots = quartic_even_roots(coeffs.B, C)
    roots.sort(key=lambda z: (z.real, z.imag))
    return IndicialRoots(which=which, j=int(j), B=coeffs.B, C=C, roots=tuple(roots),
                         indicial=tuple(sorted(z.real for z in roots)))


# --- monodromy ---------------------------------------------------------------

@dataclass
class SpectralReport:
    """Floquet data of ``L_j`` over one period of the orbit.

    ``jordan_rank`` is ``rank(M - I)`` on the invariant subspace of the
    multipliers clustered at 1 (``None`` when no such cluster exists).
    ``conditioning`` is ``"ok"`` or ``"near-quadruple"``.
    """

    a: float
    j: int
    period: float
    variant: str
    multipliers: np.ndarray
    exponents: np.ndarray
    indicial_roots: np.ndarray
    det_residual: float
    zero_freq_multiplicity: int | None
    jordan_rank: int | None = None
    conditioning: str = "ok"
    segments: int = 0
    sigma: float = 0.0
    propagators: list = field(default_factory=list, repr=False)

    def clustered_exponents(self, tol: float = CLUSTER_TOL) -> np.ndarray:
        return cluster_exponents(self.exponents, self.period, tol)

    @property
    def reciprocal_defect(self) -> float:
        """Worst distance of ``mu_i * mu_k`` from 1 over the best pairing."""
        mu = self.multipliers
        worst = 0.0
        for i, m in enumerate(mu):
            others = np.delete(mu, i)
            worst = max(worst, float(np.min(np.abs(m * others - 1.0))))
        return worst

    @property
    def conjugate_defect(self) -> float:
        mu = self.multipliers
        worst = 0.0
        for m in mu:
            worst = max(worst, float(np.min(np.abs(np.conj(m) - mu))) / max(1.0, abs(m)))
        return worst


def cluster_exponents(exponents, period: float, tol: float = CLUSTER_TOL) -> np.ndarray:
    """Replace each cluster of exponents by its mean.

    A multiplier of algebraic multiplicity ``m`` in a Jordan block is only
    resolved to about ``eps**(1/m)``, while the cluster mean is as well
    conditioned as a simple eigenvalue.  Exponents closer than ``tol / period``
    (multipliers within relative distance ``tol``) are chained together.
    """
    e = np.asarray(exponents, dtype=complex)
    e = e[np.lexsort((e.imag, e.real))]
    out = e.copy()
    start = 0
    for i in range(1, e.size + 1):
        if i == e.size or abs(e[i] - e[i - 1]) * period >= tol:
            out[start:i] = e[start:i].mean()
            start = i
    return out


def _segments_for(period: float) -> int:
    return max(32, int(math.ceil(4.0 * period)))


def _vector_field(params: DimensionParams, B: float, base: float, G: np.ndarray):
    """Orbit plus fundamental matrix of the ``m``-component linearized system."""
    m = G.shape[0]
    p = params.nonlinear_power
    K0, K2, cn = params.K0, params.K2, params.c_n
    eye = np.eye(m)
    size = 4 * m

    def f(t, y):
        v, v1, v2, v3 = y[:4]
        w = abs(v) ** p
        out = np.empty_like(y)
        out[:4] = (v1, v2, v3, K2 * v2 - K0 * v + cn * w * v)
        X = y[4:].reshape(size, size)
        dX = np.empty_like(X)
        dX[:3 * m] = X[m:]
        dX[3 * m:] = -(base * eye - w * G) @ X[:m] + B * X[2 * m:3 * m]
        out[4:] = dX.ravel()
        return out

    return f


def segment_propagators(params: DimensionParams, orbit: PeriodicOrbit, B: float, base: float,
                        G: np.ndarray, segments: int | None = None,
                        rtol: float = MONODROMY_RTOL) -> tuple[np.ndarray, list[np.ndarray]]:
    """Fundamental matrices over consecutive segments of one period.

    Each segment starts from the identity and re-reads the orbit state at its
    left node, so errors in the orbit do not accumulate across segments.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    size = 4 * G.shape[0]
    K = segments or _segments_for(orbit.period)
    nodes = np.linspace(0.0, orbit.period, K + 1)
    f = _vector_field(params, B, base, G)
    atol = np.concatenate([np.full(4, rtol * 1e-3 * params.a0), np.full(size * size, rtol * 1e-2)])
    props = []
    for k in range(K):
        y0 = np.concatenate([orbit.state(np.array(nodes[k])), np.eye(size).ravel()])
        res = solve_ivp(f, (nodes[k], nodes[k + 1]), y0, method="DOP853", rtol=rtol, atol=atol)
        if res.status != 0:
            raise OrbitNotPeriodic(f"segment {k} integration failed: {res.message}")
        props.append(res.y[4:, -1].reshape(size, size))
    return nodes, props


def _lift(props: Sequence[np.ndarray]) -> np.ndarray:
    K = len(props)
    d = props[0].shape[0]
    L = np.zeros((K * d, K * d))
    for k, P in enumerate(props):
        row = (k + 1) % K
        L[row * d:(row + 1) * d, k * d:(k + 1) * d] = P
    return L


def cyclic_multipliers(props: Sequence[np.ndarray]) -> np.ndarray:
    """Multipliers of ``props[-1] @ ... @ props[0]`` without forming the product."""
    K = len(props)
    d = props[0].shape[0]
    lam = np.linalg.eigvals(_lift(props))
    # each multiplier owns K lifted eigenvalues; the one with the smallest
    # argument gives the principal branch of log(mu) / K
    order = np.argsort(np.abs(np.angle(lam)), kind="stable")
    chosen = lam[order[:d]]
    return chosen**K, chosen


def _jordan_rank(props: Sequence[np.ndarray], tol: float = CLUSTER_TOL) -> int | None:
    """``rank(M - I)`` restricted to the invariant subspace of ``mu = 1``.

    An ordered Schur form of the lift isolates that subspace at every node;
    the restricted 2x2 (or kxk) propagators are then multiplied safely since
    the dynamics on the subspace grows at most polynomially.
    """
    K = len(props)
    d = props[0].shape[0]
    L = _lift(props)

    def near_one(x):
        return abs(x**K - 1.0) < tol * K

    T, Z, sdim = sla.schur(L.astype(complex), output="complex", sort=near_one)
    if sdim == 0 or sdim % K:
        return None
    k_dim = sdim // K
    Q = Z[:, :sdim]
    bases = []
    for k in range(K):
        u, _, _ = np.linalg.svd(Q[k * d:(k + 1) * d], full_matrices=False)
        bases.append(u[:, :k_dim])
    MW = np.eye(k_dim, dtype=complex)
    for k, P in enumerate(props):
        MW = (bases[(k + 1) % K].conj().T @ P @ bases[k]) @ MW
    s = np.linalg.svd(MW - np.eye(k_dim), compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(MW))))
    return int(np.sum(s > 1e-6 * scale))


def _report(a, j, period, variant, props, sigma, with_jordan, cluster_tol=CLUSTER_TOL):
    mu, _ = cyclic_multipliers(props)
    exps = np.log(mu.astype(complex)) / period
    order = np.lexsort((exps.imag, exps.real))
    mu, exps = mu[order], exps[order]
    det = float(np.prod([np.linalg.det(P) for P in props]))
    cluster = int(np.sum(np.abs(mu - 1.0) < cluster_tol))
    spread = float(np.max(np.abs(mu - mu.mean())) / max(1.0, float(np.max(np.abs(mu)))))
    report = SpectralReport(a=a, j=j, period=period, variant=variant, multipliers=mu,
                            exponents=exps, indicial_roots=np.sort(exps.real),
                            det_residual=abs(det - 1.0),
                            zero_freq_multiplicity=cluster if j == 0 else None,
                            conditioning="near-quadruple" if spread < cluster_tol else "ok",
                            segments=len(props), sigma=sigma, propagators=list(props))
    if with_jordan and cluster:
        report.jordan_rank = _jordan_rank(props, cluster_tol)
    return report


def _check_periodic(orbit: PeriodicOrbit):
    if orbit.periodicity_residual > PERIODICITY_TOL:
        raise OrbitNotPeriodic(f"orbit residual {orbit.periodicity_residual:.3g} exceeds "
                               f"{PERIODICITY_TOL:.1g}")


def monodromy(params: DimensionParams, orbit: PeriodicOrbit, j: int,
              variant: str = "scalar-c_tilde", *, sigma: float = 0.0,
              segments: int | None = None, rtol: float = MONODROMY_RTOL,
              cluster_tol: float = CLUSTER_TOL) -> SpectralReport:
    """Floquet multipliers, exponents and indicial roots of ``L_j - sigma``.

    Multipliers within ``cluster_tol`` of 1 count towards the zero-frequency
    multiplicity (``j = 0``), whose Jordan structure is then resolved.
    """
    _check_periodic(orbit)
    co = coefficients(params, j, variant).shifted(sigma)
    _, props = segment_propagators(params, orbit, co.B, co.base - co.shift, [[co.coupling]],
                                   segments=segments, rtol=rtol)
    return _report(orbit.a, int(j), orbit.period, variant, props, float(sigma), j == 0, cluster_tol)


# --- Jacobi fields -----------------------------------------------------------

def orbit_derivatives(params: DimensionParams, orbit: PeriodicOrbit, t) -> np.ndarray:
    """``v, v', ..., v^(5)`` along the orbit, rows stacked, from the ODE itself."""
    s = orbit.state(np.asarray(t, dtype=float))
    v, v1, v2, v3 = np.moveaxis(s, -1, 0)
    w = np.abs(v) ** params.nonlinear_power
    v4 = params.K2 * v2 - params.K0 * v + params.c_n * w * v
    v5 = params.K2 * v3 - params.K0 * v1 + params.c_tilde * w * v1
    return np.stack([v, v1, v2, v3, v4, v5])


def spectral_derivatives(samples, period: float, order: int = 4) -> np.ndarray:
    """Derivatives ``0..order`` of uniformly sampled periodic data via FFT."""
    y = np.asarray(samples, dtype=float)
    N = y.size
    k = 2.0 * np.pi * np.fft.fftfreq(N, d=period / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    Y = np.fft.fft(y)
    return np.stack([np.fft.ifft((1j * k) ** m * Y).real for m in range(order + 1)])


def jacobi_field_check(params: DimensionParams, orbit: PeriodicOrbit, j: int,
                       candidate: Callable | np.ndarray | float, *,
                       variant: str = "scalar-c_tilde", samples: int = 512) -> float:
    """``max |L_j phi|`` over one period.

    ``candidate`` is either a callable ``t -> (phi, phi', phi'', phi''', phi'''')``
    or an array of ``phi`` sampled uniformly over one period (endpoint
    excluded), differentiated spectrally.
    """
    co = coefficients(params, j, variant)
    if callable(candidate):
        t = np.linspace(0.0, orbit.period, samples, endpoint=False)
        d = np.asarray(candidate(t), dtype=float)
    else:
        arr = np.asarray(candidate, dtype=float)
        if arr.ndim == 0:
            arr = np.full(samples, float(arr))
        t = np.linspace(0.0, orbit.period, arr.size, endpoint=False)
        d = spectral_derivatives(arr, orbit.period)
    v = orbit.state(t)[:, 0]
    residual = d[4] - co.B * d[2] + co.C(v) * d[0]
    return float(np.max(np.abs(residual)))


# --- p-map blocks ------------------------------------------------------------

@dataclass
class BlockDecomposition:
    p: int
    j: int
    direction: np.ndarray
    parallel: SpectralReport
    orthogonal: SpectralReport | None
    basis_count: int

    @property
    def exponents(self) -> np.ndarray:
        """Union of block exponents, orthogonal ones repeated ``p - 1`` times."""
        parts = [self.parallel.exponents]
        if self.orthogonal is not None:
            parts += [self.orthogonal.exponents] * (self.p - 1)
        e = np.concatenate(parts)
        return e[np.lexsort((e.imag, e.real))]

    def clustered_exponents(self, tol: float = CLUSTER_TOL) -> np.ndarray:
        return cluster_exponents(self.exponents, self.parallel.period, tol)


def _check_direction(Lambda) -> np.ndarray:
    lam = np.asarray(Lambda, dtype=float).ravel()
    if lam.size < 1:
        raise DimensionError("direction must have at least one component")
    if np.any(lam <= 0):
        raise ValidationError("direction must have strictly positive components")
    if abs(np.linalg.norm(lam) - 1.0) > 1e-12:
        raise ValidationError("direction must have unit norm")
    return lam


def _basis_count(j, reports_with_mult):
    """Jacobi fields counted from the multipliers themselves.

    For ``j = 0`` those at ``mu = 1`` (bounded or linearly growing); for
    ``j >= 1`` those growing or decaying exponentially.
    """
    count = 0
    for rep, mult in reports_with_mult:
        if j == 0:
            count += mult * int(np.sum(np.abs(rep.multipliers - 1.0) < CLUSTER_TOL))
        else:
            count += mult * int(np.sum(np.abs(np.abs(rep.multipliers) - 1.0) > BAND_DELTA))
    return count


def decompose_block(params: DimensionParams, Lambda, orbit: PeriodicOrbit, j: int,
                    **kw) -> BlockDecomposition:
    """Split the linearization about ``Lambda * u`` into scalar blocks.

    The coupling ``c_n v^(2**-2) [(2**-2) Lambda Lambda^T + I]`` is diagonal in
    any orthonormal basis containing ``Lambda``: eigenvalue ``c_tilde`` along
    ``Lambda`` and ``c_n`` on its complement.
    """
    lam = _check_direction(Lambda)
    p = lam.size
    par = monodromy(params, orbit, j, "scalar-c_tilde", **kw)
    orth = monodromy(params, orbit, j, "orthogonal-c", **kw) if p > 1 else None
    blocks = [(par, 1)] + ([(orth, p - 1)] if orth is not None else [])
    return BlockDecomposition(p=p, j=int(j), direction=lam, parallel=par, orthogonal=orth,
                              basis_count=_basis_count(j, blocks))


def vector_coupling(params: DimensionParams, Lambda) -> np.ndarray:
    lam = _check_direction(Lambda)
    return params.c_n * ((params.sobolev_exp - 2.0) * np.outer(lam, lam) + np.eye(lam.size))


def vector_monodromy(params: DimensionParams, orbit: PeriodicOrbit, j: int, Lambda, *,
                     segments: int | None = None, rtol: float = MONODROMY_RTOL) -> SpectralReport:
    """Floquet data of the full ``p``-component system, without block splitting."""
    _check_periodic(orbit)
    G = vector_coupling(params, Lambda)
    co = coefficients(params, j)
    _, props = segment_propagators(params, orbit, co.B, co.base, G, segments=segments, rtol=rtol)
    return _report(orbit.a, int(j), orbit.period, f"vector-p{G.shape[0]}", props, 0.0, False)


# --- bands -------------------------------------------------------------------

@dataclass
class BandScan:
    a: float
    j: int
    sigma: np.ndarray
    in_band: np.ndarray
    min_log_modulus: np.ndarray  # min_k |ln|mu_k|| per sigma, the distance to the unit circle


def band_scan(params: DimensionParams, orbit: PeriodicOrbit, j: int, sigma_grid, *,
              variant: str = "scalar-c_tilde", delta: float = BAND_DELTA,
              segments: int | None = None) -> BandScan:
    """Mark ``sigma`` as in band when ``L_j - sigma`` has a multiplier with ``|mu|`` within ``delta`` of 1."""
    sigma = np.asarray(sigma_grid, dtype=float).ravel()
    if sigma.size and np.any(np.diff(sigma) <= 0):
        raise ValidationError("sigma grid must be strictly increasing")
    if not np.all(np.isfinite(sigma)):
        raise ValidationError("sigma grid must be finite")
    flags = np.zeros(sigma.size, dtype=bool)
    dist = np.zeros(sigma.size)
    for i, s in enumerate(sigma):
        rep = monodromy(params, orbit, j, variant, sigma=s, segments=segments)
        mod = np.abs(rep.multipliers)
        flags[i] = bool(np.any((mod >= 1.0 - delta) & (mod <= 1.0 + delta)))
        dist[i] = float(np.min(np.abs(np.log(mod))))
    return BandScan(a=orbit.a, j=int(j), sigma=sigma, in_band=flags, min_log_modulus=dist)


def _periodic_stencil(N: int, h: float, phase: complex, derivative: int) -> np.ndarray:
    """Fourth-order central differences with Bloch-twisted wrap-around."""
    if derivative == 2:
        w = {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12}
    elif derivative == 4:
        w = {-3: -1 / 6, -2: 2.0, -1: -13 / 2, 0: 28 / 3, 1: -13 / 2, 2: 2.0, 3: -1 / 6}
    else:
        raise ValueError("derivative must be 2 or 4")
    D = np.zeros((N, N), dtype=complex)
    for i in range(N):
        for off, c in w.items():
            k = i + off
            factor = 1.0
            if k >= N:
                k -= N
                factor = phase
            elif k < 0:
                k += N
                factor = np.conj(phase)
            D[i, k] += c * factor
    return D / h**derivative


def quasi_periodic_spectrum(params: DimensionParams, orbit: PeriodicOrbit, j: int,
                            alpha: float = 0.0, *, nodes: int = 512,
                            variant: str = "scalar-c_tilde") -> np.ndarray:
    """Eigenvalues ``sigma_k(a, j, alpha)`` of ``L_j`` with ``phi(t+T) = e^{i T alpha} phi(t)``.

    Uniform fourth-order finite differences on ``[0, T)``; the discretized
    operator is Hermitian, so the eigenvalues are real and returned sorted.
    """
    co = coefficients(params, j, variant)
    T = orbit.period
    h = T / nodes
    phase = np.exp(1j * T * alpha)
    t = np.arange(nodes) * h
    v = orbit.state(t)[:, 0]
    Lmat = (_periodic_stencil(nodes, h, phase, 4) - co.B * _periodic_stencil(nodes, h, phase, 2)
            + np.diag(co.C(v)))
    return np.linalg.eigvalsh(0.5 * (Lmat + Lmat.conj().T))


def zero_mode_bound(params: DimensionParams, orbit: PeriodicOrbit, nodes: int = 512) -> float:
    """``c_check * mean(v^(2**))^(1 - 2/2**)`` over one period."""
    t = np.linspace(0.0, orbit.period, nodes, endpoint=False)
    v = orbit.state(t)[:, 0]
    q = params.sobolev_exp
    return float(params.c_check * np.mean(v**q) ** (1.0 - 2.0 / q))
