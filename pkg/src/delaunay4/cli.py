"""Command-line front end.

    delaunay4 constants --n 5
    delaunay4 orbits --n 5 --a-min 0.3a0 --a-max 0.99a0 --a-count 8
    delaunay4 spectrum --n 5 --a 0.6a0 --j 0 1 2
    delaunay4 indicial --n 5 --case spherical
    delaunay4 bands --a 0.6a0 --j 2 --sigma-min -1 --sigma-max 0 --sigma-count 11
    delaunay4 pohozaev --a-count 5
    delaunay4 profile --kind deformed --a 0.6a0 --x0 0.1 0 0 0 0 --output s.csv
    delaunay4 fit s.csv
    delaunay4 selftest

Exit codes: 0 success, 2 usage or validation, 3 I/O, 4 numerical failure.
Data goes to stdout or ``--output``; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io as dio
from .constants import make_params, sphere_area
from .errors import NumericalFailure, ValidationError
from .orbits import OrbitFailure, linear_period, orbit_provider, orbit_table

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
THREADS_ENV = "DELAUNAY4_THREADS"


@dataclass
class RunConfig:
    n: int = 5
    a_min: str = "0.3a0"
    a_max: str = "0.99a0"
    a_count: int = 5
    spacing: str = "linear"
    a_values: list = field(default_factory=list)
    j: list = field(default_factory=lambda: [0, 1, 2])
    tol_integrator: float = 1e-10
    tol_shoot: float = 1e-13
    cluster_tol: float = 1e-4
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    threads: int = 1


def parse_a(text: str, a0: float) -> float:
    """``"0.6a0"`` -> ``0.6 * a0``; plain numbers are absolute."""
    s = str(text).strip()
    try:
        if s.endswith("a0"):
            head = s[:-2].rstrip("*") or "1"
            return float(head) * a0
        return float(s)
    except ValueError as exc:
        raise ValidationError(f"cannot parse Fowler parameter {text!r}") from exc


def a_grid(cfg: RunConfig, a0: float) -> list[float]:
    if cfg.a_values:
        vals = [parse_a(x, a0) for x in cfg.a_values]
    else:
        lo, hi = parse_a(cfg.a_min, a0), parse_a(cfg.a_max, a0)
        if cfg.a_count < 1:
            raise ValidationError("a-count must be positive")
        if not 0 < lo <= hi:
            raise ValidationError("need 0 < a-min <= a-max")
        if cfg.spacing == "log":
            vals = list(np.geomspace(lo, hi, cfg.a_count))
        else:
            vals = list(np.linspace(lo, hi, cfg.a_count))
    for v in vals:
        if not 0 < v <= a0 * (1 + 1e-12):
            raise ValidationError(f"Fowler parameter {v!r} outside (0, a0={a0!r}]")
    return [min(float(v), a0) for v in vals]


def resolve_threads(requested: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None and env.strip():
        try:
            requested = int(env)
        except ValueError as exc:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    if requested < 0:
        raise ValidationError("thread count must be >= 0")
    return requested or (os.cpu_count() or 1)


def _config(args) -> RunConfig:
    cfg = RunConfig()
    for key in asdict(cfg):
        if hasattr(args, key) and getattr(args, key) is not None:
            setattr(cfg, key, getattr(args, key))
    if cfg.tol_integrator <= 0 or cfg.tol_shoot <= 0 or cfg.cluster_tol <= 0:
        raise ValidationError("tolerances must be positive")
    return cfg


def _meta(command: str, cfg: RunConfig, **extra) -> dict:
    meta = {"command": command}
    meta.update(asdict(cfg))
    meta.pop("threads")  # execution detail; output does not depend on it
    meta.update(extra)
    return meta


def _shooter(params, cfg):
    if cfg.tol_shoot == RunConfig.tol_shoot:
        return orbit_provider(params)
    from .orbits import shoot
    return lambda a: shoot(params, a, tolerance=cfg.tol_shoot)


# --- commands ----------------------------------------------------------------

def cmd_constants(cfg, args):
    p = make_params(cfg.n)
    row = p.as_dict()
    row["omega"] = sphere_area(p.n)
    row["linear_period"] = linear_period(p)
    return [row], {}


def cmd_orbits(cfg, args):
    from .invariants import pohozaev_of_orbit
    from .orbits import energy_drift_over_periods

    p = make_params(cfg.n)
    grid = a_grid(cfg, p.a0)
    table = orbit_table(p, grid, threads=cfg.threads, shooter=_shooter(p, cfg))
    rows, failed = [], 0
    for a, orb in zip(grid, table):
        if isinstance(orb, OrbitFailure):
            failed += 1
            rows.append({"a": a, "a_over_a0": a / p.a0, "b": float("nan"), "period": float("nan"),
                         "energy": float("nan"), "pohozaev_cyl": float("nan"),
                         "pohozaev_sph": float("nan"), "periodicity_residual": float("nan"),
                         "energy_drift_10": float("nan"), "degenerate": False, "status": orb.reason})
            continue
        poh = pohozaev_of_orbit(p, orb)
        rows.append({"a": a, "a_over_a0": a / p.a0, "b": orb.b_of_a, "period": orb.period,
                     "energy": orb.energy, "pohozaev_cyl": poh.cyl, "pohozaev_sph": poh.sph,
                     "periodicity_residual": orb.periodicity_residual,
                     "energy_drift_10": energy_drift_over_periods(p, orb, 10, cfg.tol_integrator),
                     "degenerate": orb.degenerate, "status": "ok"})
    return rows, {"failed": failed}


def _complex_cols(prefix, values):
    out = {}
    for k, z in enumerate(values):
        out[f"{prefix}{k}_re"] = float(np.real(z))
        out[f"{prefix}{k}_im"] = float(np.imag(z))
    return out


def cmd_spectrum(cfg, args):
    from .spectral import monodromy

    p = make_params(cfg.n)
    shooter = _shooter(p, cfg)
    rows = []
    for a in a_grid(cfg, p.a0):
        orb = shooter(a)
        for j in cfg.j:
            rep = monodromy(p, orb, int(j), args.variant, cluster_tol=cfg.cluster_tol)
            row = {"a": a, "j": int(j), "variant": args.variant, "period": rep.period}
            row.update(_complex_cols("mu", rep.multipliers))
            row.update(_complex_cols("rho", rep.exponents))
            row.update({f"indicial{k}": float(x) for k, x in enumerate(rep.indicial_roots)})
            row.update({"det_residual": rep.det_residual,
                        "reciprocal_defect": rep.reciprocal_defect,
                        "zero_freq_multiplicity": rep.zero_freq_multiplicity,
                        "jordan_rank": rep.jordan_rank, "conditioning": rep.conditioning})
            rows.append(row)
    return rows, {}


def cmd_indicial(cfg, args):
    from .spectral import indicial_roots_limit

    p = make_params(cfg.n)
    cases = ["spherical", "cylindrical"] if args.case == "both" else [args.case]
    rows = []
    for case in cases:
        for j in cfg.j:
            r = indicial_roots_limit(p, case, int(j))
            row = {"n": p.n, "case": case, "j": int(j), "B": r.B, "C": r.C}
            row.update(_complex_cols("rho", r.roots))
            row.update({f"indicial{k}": x for k, x in enumerate(r.indicial)})
            rows.append(row)
    return rows, {}


def cmd_bands(cfg, args):
    from .spectral import band_scan

    p = make_params(cfg.n)
    if args.sigma_count < 1:
        raise ValidationError("sigma-count must be positive")
    sigma = np.linspace(args.sigma_min, args.sigma_max, args.sigma_count)
    shooter = _shooter(p, cfg)
    rows = []
    for a in a_grid(cfg, p.a0):
        orb = shooter(a)
        for j in cfg.j:
            scan = band_scan(p, orb, int(j), sigma, variant=args.variant)
            for s, flag, d in zip(scan.sigma, scan.in_band, scan.min_log_modulus):
                rows.append({"a": a, "j": int(j), "sigma": float(s), "in_band": bool(flag),
                             "min_log_modulus": float(d)})
    return rows, {"sigma_min": args.sigma_min, "sigma_max": args.sigma_max,
                  "sigma_count": args.sigma_count}


def cmd_pohozaev(cfg, args):
    from .invariants import invariant_curve, pohozaev_of_orbit
    from .profiles import spherical

    p = make_params(cfg.n)
    grid = a_grid(cfg, p.a0)
    sph = pohozaev_of_orbit(p, spherical(None, args.mu))
    rows = [{"kind": "spherical", "a": float("nan"), "cyl": sph.cyl, "sph": sph.sph,
             "omega": sph.omega, "conservation": sph.conservation}]
    curve = invariant_curve(p, grid, shooter=_shooter(p, cfg), threads=cfg.threads)
    for a, cyl in curve.points:
        rows.append({"kind": "fowler", "a": a, "cyl": cyl, "sph": sph.omega * cyl,
                     "omega": sph.omega, "conservation": float("nan")})
    for f in curve.failures:
        rows.append({"kind": "fowler", "a": f.a, "cyl": float("nan"), "sph": float("nan"),
                     "omega": sph.omega, "conservation": float("nan")})
    return rows, {"monotone": curve.monotone, "failed": len(curve.failures)}


def _profile_spec(p, args):
    from . import profiles as P

    if args.kind == "spherical":
        return P.spherical(None, args.mu)
    a = parse_a(args.a_values[0] if args.a_values else args.a_value, p.a0)
    if args.kind == "fowler":
        return P.fowler(a, args.T)
    x0 = np.zeros(p.n)
    given = np.asarray(args.x0 or [0.1], dtype=float)
    if given.size > p.n:
        raise ValidationError(f"x0 has more than {p.n} components")
    x0[:given.size] = given
    return P.deformed(a, args.T, x0)


def cmd_profile(cfg, args):
    from . import profiles as P

    p = make_params(cfg.n)
    if cfg.output in (None, "-"):
        raise ValidationError("profile needs --output (a JSON sidecar is written next to it)")
    spec = _profile_spec(p, args)
    if args.t_count < 16:
        raise ValidationError("t-count must be at least 16")
    t = np.linspace(args.t_min, args.t_max, args.t_count)
    theta = P.theta_grid(p.n, args.theta_count, cfg.seed)
    V = P.cylinder_samples(p, spec, t, theta, provider=_shooter(p, cfg))
    meta = _meta("profile", cfg, kind=spec.kind, a=spec.a, T=spec.T,
                 x0=list(spec.x0) if spec.x0 else None, mu=spec.mu)
    dio.write_samples(cfg.output, t, theta, V, meta)
    return None, {}


def cmd_fit(cfg, args):
    from .fit import fit_parameters

    t, theta, V, meta_in = dio.read_samples(args.input, args.sidecar)
    n = int(theta.shape[1])
    p = make_params(n)
    cfg.n = n
    window = tuple(args.window) if args.window else None
    res = fit_parameters(p, t, theta, V, provider=_shooter(p, cfg), window=window)
    row = res.as_dict()
    x0 = row.pop("x0_hat")
    for k, c in enumerate(x0 or []):
        row[f"x0_hat{k}"] = c
    return [row], {"input": args.input}


def cmd_selftest(cfg, args):
    from . import selftest
    rows = selftest.run(seed=cfg.seed)
    failed = sum(not r["pass"] for r in rows)
    return rows, {"failed": failed}


COMMANDS = {
    "constants": cmd_constants, "orbits": cmd_orbits, "spectrum": cmd_spectrum,
    "indicial": cmd_indicial, "bands": cmd_bands, "pohozaev": cmd_pohozaev,
    "profile": cmd_profile, "fit": cmd_fit, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="dimension (>= 5, default 5)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--output", "-o", help="output path (default stdout)")
    common.add_argument("--threads", type=int, help=f"worker threads, 0 = auto ({THREADS_ENV} overrides)")
    common.add_argument("--seed", type=int)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--a", dest="a_values", nargs="+", metavar="A",
                      help="explicit Fowler parameters, absolute or like 0.6a0")
    grid.add_argument("--a-min")
    grid.add_argument("--a-max")
    grid.add_argument("--a-count", type=int)
    grid.add_argument("--spacing", choices=["linear", "log"])
    grid.add_argument("--tol-integrator", type=float)
    grid.add_argument("--tol-shoot", type=float)

    js = argparse.ArgumentParser(add_help=False)
    js.add_argument("--j", nargs="+", type=int)
    js.add_argument("--variant", choices=["scalar-c_tilde", "orthogonal-c"], default="scalar-c_tilde")
    js.add_argument("--cluster-tol", type=float)

    parser = argparse.ArgumentParser(prog="delaunay4", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="closed-form constants for dimension n")
    sub.add_parser("orbits", parents=[common, grid], help="periodic orbits over an a-grid")
    sub.add_parser("spectrum", parents=[common, grid, js], help="Floquet data per (a, j)")
    ind = sub.add_parser("indicial", parents=[common, js], help="closed-form limit indicial roots")
    ind.add_argument("--case", choices=["spherical", "cylindrical", "both"], default="both")
    bands = sub.add_parser("bands", parents=[common, grid, js], help="spectral band scan")
    bands.add_argument("--sigma-min", type=float, default=-1.0)
    bands.add_argument("--sigma-max", type=float, default=0.0)
    bands.add_argument("--sigma-count", type=int, default=11)
    poh = sub.add_parser("pohozaev", parents=[common, grid], help="Pohozaev invariants")
    poh.add_argument("--mu", type=float, default=1.0)
    prof = sub.add_parser("profile", parents=[common, grid], help="write cylinder samples for fit")
    prof.add_argument("--kind", choices=["spherical", "fowler", "deformed"], default="deformed")
    prof.add_argument("--a-value", dest="a_value", default="0.6a0",
                      help="Fowler parameter (also accepted as the first --a value)")
    prof.add_argument("--T", type=float, default=0.0)
    prof.add_argument("--x0", type=float, nargs="+")
    prof.add_argument("--mu", type=float, default=1.0)
    prof.add_argument("--t-min", type=float, default=0.0)
    prof.add_argument("--t-max", type=float, default=22.0)
    prof.add_argument("--t-count", type=int, default=2200)
    prof.add_argument("--theta-count", type=int, default=4)
    fit = sub.add_parser("fit", parents=[common], help="fit (a, T, x0) and decay rates to samples")
    fit.add_argument("input")
    fit.add_argument("--sidecar")
    fit.add_argument("--window", type=float, nargs=2, metavar=("T_LO", "T_HI"))
    sub.add_parser("selftest", parents=[common], help="deterministic built-in checks")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        cfg = _config(args)
        cfg.threads = resolve_threads(cfg.threads if args.threads is not None else 1)
        rows, extra = COMMANDS[args.command](cfg, args)
        if rows is not None:
            text = dio.render(rows, cfg.format, _meta(args.command, cfg, **extra))
            dio.emit(text, cfg.output)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    failed = extra.get("failed", 0)
    if failed:
        print(f"{failed} item(s) failed; see the status column", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
