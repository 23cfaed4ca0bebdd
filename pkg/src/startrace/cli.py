"""Command-line front door: experiment configs, runs, and report files.

Every subcommand validates its full configuration before any computation,
echoes it into the emitted JSON, and exits 0 when all declared checks pass,
2 when a check fails, and 1 on configuration or evaluation errors.  With a
fixed config and seed the emitted CSV/JSON bytes are identical across runs;
wall-clock timing goes to stderr only.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import coarea as co
from . import dirichlet as dl
from . import function_spaces as fs
from . import trace_ops as tr
from .errors import (ConfigurationError, EvaluationError, SolverError,
                     UnsupportedKindError)
from .reports import RunReport, read_json, write_report
from .sphere_quad import build_sphere_quadrature, integrate_sphere, sphere_area
from .star_geometry import (StarDomain, StarSurface, integrate_surface,
                            profile_from_spec, recommended_quadrature)

SUBCOMMANDS = ("sphere-check", "trace-domain", "trace-rn", "kernel-bound",
               "coarea", "dirichlet")


# ----------------------------------------------------------------------
# small parsers for compact flag grammars

def parse_float_list(text):
    try:
        return [float(_parse_fraction(tok)) for tok in text.split(",") if tok]
    except ValueError:
        raise ConfigurationError(f"expected comma-separated numbers: {text!r}")


def _parse_fraction(token):
    if "/" in token:
        num, _, den = token.partition("/")
        return float(num) / float(den)
    return float(token)


def parse_deltas(text):
    """Either comma-separated values or a dyadic range like 2^-4..2^-14."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            k0 = -int(lo.strip().removeprefix("2^"))
            k1 = -int(hi.strip().removeprefix("2^"))
        except ValueError:
            raise ConfigurationError(f"bad dyadic range: {text!r}")
        if k0 > k1:
            k0, k1 = k1, k0
        return [2.0 ** (-k) for k in range(k0, k1 + 1)]
    return parse_float_list(text)


def field_from_spec(spec, dim):
    """Test-function specs: kind:params, e.g. gaussian:0.5, explinear:1,0."""
    kind, _, params = spec.partition(":")
    try:
        vals = [float(p) for p in params.split(",")] if params else []
    except ValueError:
        raise ConfigurationError(f"non-numeric field parameters in {spec!r}")
    if kind == "gaussian" and len(vals) == 1:
        return fs.GaussianRadial(dim, vals[0])
    if kind == "shellgaussian" and len(vals) == 2:
        return fs.ShellGaussian(dim, vals[0], vals[1])
    if kind == "explinear" and len(vals) == dim:
        return fs.ExpLinear(dim, vals)
    if kind == "bump" and len(vals) == 1:
        return fs.Bump(dim, vals[0])
    if kind == "constant" and len(vals) == 1:
        return fs.ConstantField(dim, vals[0])
    if kind == "cosgaussian" and len(vals) == 2:
        return fs.RadialCosGaussian(dim, vals[0], vals[1])
    raise ConfigurationError(f"cannot parse test-function spec {spec!r}")


def _common_out(raw):
    out = raw.get("out") or os.environ.get("STARTRACE_OUTDIR") or "."
    return str(out)


# ----------------------------------------------------------------------
# per-subcommand config validation (cheap, before any computation)

def _cfg_sphere_check(raw):
    cfg = {
        "dim": int(raw.get("dim", 2)),
        "resolutions": [int(r) for r in raw.get("resolutions", [64])],
        "out": _common_out(raw),
        "basename": raw.get("basename") or "sphere-check",
    }
    if cfg["dim"] not in (2, 3):
        raise ConfigurationError("dim must be 2 or 3")
    if not cfg["resolutions"] or min(cfg["resolutions"]) < 4:
        raise ConfigurationError("resolutions must all be >= 4")
    return cfg


def _cfg_trace_domain(raw):
    cfg = {
        "dim": int(raw.get("dim", 2)),
        "profile": str(raw.get("profile", "cusp:1,0,0.3")),
        "p": float(raw.get("p", 2.0)),
        "resolution": int(raw.get("resolution", 256)),
        "family_count": int(raw.get("family_count", 20)),
        "family_seed": int(raw.get("family_seed", 7)),
        "family_degree": int(raw.get("family_degree", 3)),
        "stability_threshold": float(raw.get("stability_threshold", 0.01)),
        "out": _common_out(raw),
        "basename": raw.get("basename") or "trace-domain",
    }
    profile_from_spec(cfg["profile"], cfg["dim"])    # validates eagerly
    if cfg["p"] < 1:
        raise ConfigurationError("p must be >= 1")
    if cfg["family_count"] < 1:
        raise ConfigurationError("family_count must be >= 1")
    return cfg


def _cfg_trace_rn(raw):
    cfg = {
        "experiment": str(raw.get("experiment", "decay")),
        "dim": int(raw.get("dim", 2)),
        "profile": str(raw.get("profile", "constant:1")),
        "resolution": int(raw.get("resolution", 128)),
        "s": float(raw.get("s", 1.0)),
        "rhos": [float(r) for r in raw.get("rhos", [2, 4, 8, 16, 32])],
        "deltas": [float(d) for d in raw.get("deltas",
                                             tr.dyadic_deltas().tolist())],
        "rho0": float(raw.get("rho0", 1.0)),
        "sigma": float(raw.get("sigma", 0.2)),
        "out": _common_out(raw),
        "basename": raw.get("basename") or "trace-rn",
    }
    if cfg["experiment"] not in ("decay", "holder"):
        raise ConfigurationError("experiment must be 'decay' or 'holder'")
    profile_from_spec(cfg["profile"], cfg["dim"])
    if cfg["experiment"] == "decay" and len(cfg["rhos"]) < 4:
        raise ConfigurationError("decay experiment needs >= 4 rho values")
    if cfg["experiment"] == "holder" and not 0.5 < cfg["s"] < 1.5:
        raise ConfigurationError("holder experiment needs 1/2 < s < 3/2")
    return cfg


def _cfg_kernel_bound(raw):
    cfg = {
        "s": float(raw.get("s", 1.0)),
        "rho0": float(raw.get("rho0", 1.0)),
        "deltas": [float(d) for d in raw.get("deltas",
                                             tr.dyadic_deltas().tolist())],
        "x_max": float(raw.get("x_max", 1.0e6)),
        "out": _common_out(raw),
        "basename": raw.get("basename") or "kernel-bound",
    }
    if cfg["s"] <= 0.5:
        raise ConfigurationError("kernel bound needs s > 1/2")
    if len(cfg["deltas"]) < 4:
        raise ConfigurationError("kernel sweep needs >= 4 delta values")
    return cfg


def _cfg_coarea(raw):
    cfg = {
        "dim": int(raw.get("dim", 2)),
        "profile": str(raw.get("profile", "constant:1")),
        "lambdas": [float(v) for v in raw.get("lambdas", [1.0])],
        "resolution": int(raw.get("resolution", 128)),
        "mc_samples": int(raw.get("mc_samples", 0)),
        "seed": int(raw.get("seed", 0)),
        "out": _common_out(raw),
        "basename": raw.get("basename") or "coarea",
    }
    profile_from_spec(cfg["profile"], cfg["dim"])
    if not cfg["lambdas"] or min(cfg["lambdas"]) <= 0:
        raise ConfigurationError("lambdas must be positive")
    if cfg["mc_samples"] and cfg["mc_samples"] < co.MC_MIN_SAMPLES:
        raise ConfigurationError(
            f"mc_samples must be 0 or >= {co.MC_MIN_SAMPLES}")
    return cfg


def _cfg_dirichlet(raw):
    cfg = {
        "dim": 2,
        "profile": str(raw.get("profile", "constant:1")),
        "u": str(raw.get("u", "constant:1")),
        "q": str(raw.get("q", "constant:0")),
        "h_levels": [float(h) for h in raw.get("h_levels", [1 / 16, 1 / 32])],
        "tol": float(raw.get("tol", 1.0e-10)),
        "out": _common_out(raw),
        "basename": raw.get("basename") or "dirichlet",
    }
    profile = profile_from_spec(cfg["profile"], 2)
    field_from_spec(cfg["u"], 2)
    field_from_spec(cfg["q"], 2)
    if not cfg["h_levels"] or min(cfg["h_levels"]) <= 0:
        raise ConfigurationError("h_levels must be positive")
    if max(cfg["h_levels"]) >= profile.c_low / 8.0:
        raise ConfigurationError("coarsest h must be < c_low / 8")
    return cfg


# ----------------------------------------------------------------------
# runners

def _run_sphere_check(cfg):
    dim = cfg["dim"]
    area = sphere_area(dim)
    # reference monomial integrals on the sphere (odd powers vanish)
    if dim == 2:
        poly = (lambda nu: nu[:, 0] ** 4, 3.0 * np.pi / 4.0, 4)
    else:
        poly = (lambda nu: nu[:, 0] ** 2 * nu[:, 1] ** 2,
                4.0 * np.pi / 15.0, 4)
    smooth = lambda nu: np.exp(nu[:, 0])
    records = []
    for res in cfg["resolutions"]:
        quad = build_sphere_quadrature(dim, res)
        total = float(np.sum(quad.weights))
        poly_err = abs(integrate_sphere(quad, poly[0]) - poly[1])
        refine = abs(integrate_sphere(quad, smooth)
                     - integrate_sphere(quad.refined(2), smooth))
        records.append({
            "dim": dim, "resolution": res, "nodes": quad.size,
            "exact_degree": quad.exact_degree,
            "total_weight_error": abs(total - area),
            "poly_degree": poly[2], "poly_error": poly_err,
            "refinement_delta": refine,
        })
    checks = {
        "total_measure": all(r["total_weight_error"] < 1e-12
                             for r in records),
        "polynomial_exactness": all(r["poly_error"] < 1e-10
                                    for r in records),
    }
    return RunReport(
        subcommand="sphere-check", config=cfg,
        fieldnames=["dim", "resolution", "nodes", "exact_degree",
                    "total_weight_error", "poly_degree", "poly_error",
                    "refinement_delta"],
        records=records, summary={"area": area}, checks=checks)


def _run_trace_domain(cfg):
    profile = profile_from_spec(cfg["profile"], cfg["dim"])
    domain = StarDomain(profile)
    quad = recommended_quadrature(profile, cfg["resolution"])
    family = fs.poly_gaussian_family(cfg["family_count"], cfg["dim"],
                                     seed=cfg["family_seed"],
                                     degree=cfg["family_degree"])
    rep = tr.trace_constant_experiment(domain, quad, family, cfg["p"])
    records = [{"member": i, "ratio": float(r), "ratio_refined": float(rr)}
               for i, (r, rr) in enumerate(zip(rep.ratios,
                                               rep.ratios_refined))]
    summary = {
        "profile": cfg["profile"], "p": cfg["p"],
        "max_ratio": rep.max_ratio,
        "max_ratio_refined": rep.max_ratio_refined,
        "stability_delta": rep.stability_delta,
        "skipped": [list(s) for s in rep.skipped],
    }
    checks = {"ratio_stability": rep.stability_delta
              < cfg["stability_threshold"]}
    return RunReport(subcommand="trace-domain", config=cfg,
                     fieldnames=["member", "ratio", "ratio_refined"],
                     records=records, summary=summary, checks=checks)


def _run_trace_rn(cfg):
    profile = profile_from_spec(cfg["profile"], cfg["dim"])
    quad = recommended_quadrature(profile, cfg["resolution"])
    fieldnames = ["profile", "f_kind", "s", "rho", "norm", "ratio"]
    if cfg["experiment"] == "decay":
        rep = tr.decay_experiment(profile, quad, cfg["rhos"],
                                  sigma=cfg["sigma"])
        records = [{"profile": cfg["profile"], "f_kind": "shellgaussian",
                    "s": 1.0, "rho": float(r), "norm": float(n),
                    "ratio": float(v)}
                   for r, n, v in zip(rep.rhos, rep.trace_norms, rep.ratios)]
        summary = {
            "slope": rep.fit.slope, "slope_stderr": rep.fit.slope_stderr,
            "r_squared": rep.fit.r_squared,
            "expected_slope": rep.expected_slope,
        }
        checks = {"decay_exponent":
                  abs(rep.fit.slope - rep.expected_slope) <= 0.1}
    else:
        members = [("gaussian", fs.GaussianRadial(cfg["dim"], 0.5))]
        rep = tr.holder_experiment(profile, quad, cfg["s"], members,
                                   rho0=cfg["rho0"],
                                   deltas=np.asarray(cfg["deltas"]))
        # rho column carries rho0 + delta, the perturbed sampling scale
        records = [{"profile": cfg["profile"], "f_kind": m.label,
                    "s": rep.s, "rho": float(rep.rho0 + d), "norm": float(n),
                    "ratio": float(r)}
                   for m in rep.members
                   for d, n, r in zip(m.deltas, m.diff_norms, m.ratios)]
        summary = {"s": rep.s, "rho0": rep.rho0,
                   "floor_slope": rep.floor_slope}
        checks = {}
        for m in rep.members:
            summary[f"slope_{m.label}"] = m.fit.slope
            summary[f"c_emp_{m.label}"] = m.c_emp
            summary[f"max_excess_{m.label}"] = m.max_excess
            checks[f"bound_{m.label}"] = m.max_excess <= 0.05
            checks[f"slope_floor_{m.label}"] = \
                m.fit.slope >= rep.floor_slope - 0.1
    return RunReport(subcommand="trace-rn", config=cfg,
                     fieldnames=fieldnames, records=records,
                     summary=summary, checks=checks)


def _run_kernel_bound(cfg):
    rep = tr.kernel_regime_experiment(cfg["s"], np.asarray(cfg["deltas"]),
                                      x_max=cfg["x_max"])
    records = [{"delta": float(d), "kernel": float(k), "log_band": float(b)}
               for d, k, b in zip(rep.deltas, rep.values, rep.log_band)]
    summary = {"s": cfg["s"], "slope": rep.fit.slope,
               "slope_stderr": rep.fit.slope_stderr,
               "expected_slope": rep.expected_slope,
               "log_band_ratio": rep.log_band_ratio}
    if cfg["s"] == 1.5:
        checks = {"log_regime_band": rep.log_band_ratio < 3.0}
    else:
        checks = {"kernel_exponent":
                  abs(rep.fit.slope - rep.expected_slope) <= 0.1}
    return RunReport(subcommand="kernel-bound", config=cfg,
                     fieldnames=["delta", "kernel", "log_band"],
                     records=records, summary=summary, checks=checks)


def _run_coarea(cfg):
    profile = profile_from_spec(cfg["profile"], cfg["dim"])
    quad = recommended_quadrature(profile, cfg["resolution"])
    rep = co.coarea_report(profile, quad, cfg["lambdas"],
                           mc_samples=cfg["mc_samples"], seed=cfg["seed"])
    n = cfg["dim"]
    records = []
    for i, lam in enumerate(rep.lambdas):
        records.append({
            "lambda": float(lam), "volume": float(rep.volumes[i]),
            "dv_formula": float(rep.dv_formula[i]),
            "dv_central_diff": float(rep.dv_central_diff[i]),
            "mc_estimate": float(rep.mc_estimates[i]),
            "mc_stderr": float(rep.mc_stderrs[i]),
        })
    level = co.LevelFunction(profile)
    gauss = fs.GaussianRadial(n, 1.0)
    full_space = co.integral_full_space(level, quad, gauss)
    expected = np.pi ** (n / 2.0)
    homo = max(abs(rep.volumes[i] / lam ** n - rep.volumes[0])
               for i, lam in enumerate(rep.lambdas))
    dv_dev = max(abs(rep.dv_formula[i] - n * rep.volumes[i] / lam)
                 / rep.dv_formula[i] for i, lam in enumerate(rep.lambdas))
    fd_dev = max(abs(rep.dv_formula[i] - rep.dv_central_diff[i])
                 / rep.dv_formula[i] for i in range(rep.lambdas.size))
    summary = {"full_space_gaussian": full_space,
               "full_space_expected": expected,
               "homogeneity_deviation": homo,
               "dv_identity_deviation": dv_dev,
               "dv_central_diff_deviation": fd_dev}
    checks = {
        "homogeneity": homo < 1e-12,
        "dv_identity": dv_dev < 1e-12,
        "dv_central_diff": fd_dev < 1e-8,
        "full_space_integral": abs(full_space - expected) / expected < 1e-6,
    }
    if cfg["mc_samples"]:
        checks["mc_within_3_sigma"] = all(
            abs(rep.mc_estimates[i] - rep.volumes[i])
            <= 3.0 * rep.mc_stderrs[i] for i in range(rep.lambdas.size))
    return RunReport(subcommand="coarea", config=cfg,
                     fieldnames=["lambda", "volume", "dv_formula",
                                 "dv_central_diff", "mc_estimate",
                                 "mc_stderr"],
                     records=records, summary=summary, checks=checks)


def _run_dirichlet(cfg):
    profile = profile_from_spec(cfg["profile"], 2)
    problem = dl.DirichletProblem(StarDomain(profile),
                                  field_from_spec(cfg["u"], 2),
                                  field_from_spec(cfg["q"], 2))
    hs = sorted(cfg["h_levels"], reverse=True)
    records = []
    solutions = []
    for h in hs:
        sol = dl.solve_lifted(problem, h, tol=cfg["tol"])
        solutions.append(sol)
        records.append({
            "h": float(h), "interior_nodes": sol.grid.n_interior,
            "near_boundary_nodes": int(sol.grid.near_boundary_mask().sum()),
            "iterations": sol.iterations, "residual": sol.residual,
            "f_origin": sol.value_at_origin(),
        })
    summary = {"profile": cfg["profile"], "u": cfg["u"], "q": cfg["q"]}
    checks = {"residuals": all(r["residual"] <= cfg["tol"]
                               for r in records)}
    halving = len(hs) >= 4 and np.allclose(
        np.asarray(hs[:-1]) / np.asarray(hs[1:]), 2.0, rtol=1e-9)
    if halving:
        errors = [dl._shared_node_error(s, solutions[-1])
                  for s in solutions[:-1]]
        summary["self_errors"] = errors
        checks["monotone_errors"] = bool(np.all(np.diff(errors) < 0))
    return RunReport(subcommand="dirichlet", config=cfg,
                     fieldnames=["h", "interior_nodes",
                                 "near_boundary_nodes", "iterations",
                                 "residual", "f_origin"],
                     records=records, summary=summary, checks=checks)


_CONFIG_BUILDERS = {
    "sphere-check": _cfg_sphere_check,
    "trace-domain": _cfg_trace_domain,
    "trace-rn": _cfg_trace_rn,
    "kernel-bound": _cfg_kernel_bound,
    "coarea": _cfg_coarea,
    "dirichlet": _cfg_dirichlet,
}

_RUNNERS = {
    "sphere-check": _run_sphere_check,
    "trace-domain": _run_trace_domain,
    "trace-rn": _run_trace_rn,
    "kernel-bound": _run_kernel_bound,
    "coarea": _run_coarea,
    "dirichlet": _run_dirichlet,
}


# ----------------------------------------------------------------------
# argument wiring

def _add_common(sub):
    sub.add_argument("--config", type=str, default=None,
                     help="JSON config file; overrides the inline flags")
    sub.add_argument("--out", type=str, default=None,
                     help="output directory (default $STARTRACE_OUTDIR or .)")
    sub.add_argument("--basename", type=str, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="startrace",
        description="Measures, traces and coarea identities on rough "
                    "star-shaped hypersurfaces")
    subs = parser.add_subparsers(dest="command", required=True)

    sc = subs.add_parser("sphere-check", help="quadrature sanity checks")
    sc.add_argument("--dim", type=int, default=2)
    sc.add_argument("--resolutions", type=str, default="64")
    _add_common(sc)

    td = subs.add_parser("trace-domain",
                         help="boundary trace inequality experiment")
    td.add_argument("--dim", type=int, default=2)
    td.add_argument("--profile", type=str, default="cusp:1,0,0.3")
    td.add_argument("--p", type=float, default=2.0)
    td.add_argument("--resolution", type=int, default=256)
    td.add_argument("--family-count", type=int, default=20)
    td.add_argument("--family-seed", type=int, default=7)
    td.add_argument("--family-degree", type=int, default=3)
    td.add_argument("--stability-threshold", type=float, default=0.01)
    _add_common(td)

    tn = subs.add_parser("trace-rn",
                         help="whole-space trace decay / Hoelder experiments")
    tn.add_argument("--experiment", choices=["decay", "holder"],
                    default="decay")
    tn.add_argument("--dim", type=int, default=2)
    tn.add_argument("--profile", type=str, default="constant:1")
    tn.add_argument("--resolution", type=int, default=128)
    tn.add_argument("--s", type=float, default=1.0)
    tn.add_argument("--rhos", type=str, default="2,4,8,16,32")
    tn.add_argument("--deltas", type=str, default="2^-4..2^-14")
    tn.add_argument("--rho0", type=float, default=1.0)
    tn.add_argument("--sigma", type=float, default=0.2)
    _add_common(tn)

    kb = subs.add_parser("kernel-bound",
                         help="phase-difference kernel scaling regimes")
    kb.add_argument("--s", type=float, default=1.0)
    kb.add_argument("--rho0", type=float, default=1.0)
    kb.add_argument("--deltas", type=str, default="2^-4..2^-14")
    kb.add_argument("--x-max", type=float, default=1.0e6)
    _add_common(kb)

    ca = subs.add_parser("coarea", help="level-set volumes and coarea checks")
    ca.add_argument("--dim", type=int, default=2)
    ca.add_argument("--profile", type=str, default="constant:1")
    ca.add_argument("--lambda", "--lambdas", dest="lambdas", type=str,
                    default="1")
    ca.add_argument("--resolution", type=int, default=128)
    ca.add_argument("--mc-samples", type=int, default=0)
    ca.add_argument("--seed", type=int, default=0)
    _add_common(ca)

    dr = subs.add_parser("dirichlet",
                         help="embedded-boundary Helmholtz-Dirichlet solve")
    dr.add_argument("--profile", type=str, default="constant:1")
    dr.add_argument("--u", type=str, default="constant:1")
    dr.add_argument("--q", type=str, default="constant:0")
    dr.add_argument("--h-levels", type=str, default="1/16,1/32")
    dr.add_argument("--tol", type=float, default=1.0e-10)
    _add_common(dr)
    return parser


def _raw_config(args):
    if args.config:
        raw = read_json(args.config)
        if not isinstance(raw, dict):
            raise ConfigurationError("config file must hold a JSON object")
        raw.setdefault("out", args.out)
        raw.setdefault("basename", args.basename)
        return raw
    raw = {k: v for k, v in vars(args).items()
           if k not in ("command", "config") and v is not None}
    for key, parse in (("resolutions", parse_float_list),
                       ("rhos", parse_float_list),
                       ("deltas", parse_deltas),
                       ("lambdas", parse_float_list),
                       ("h_levels", parse_float_list)):
        if key in raw and isinstance(raw[key], str):
            raw[key] = parse(raw[key])
    return raw


def run_subcommand(argv):
    """Parse argv, run the experiment, emit reports; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = _CONFIG_BUILDERS[args.command](_raw_config(args))
    except (ConfigurationError, UnsupportedKindError, OSError,
            json.JSONDecodeError) as exc:
        print(f"startrace: configuration error: {exc}", file=sys.stderr)
        return 1
    started = time.monotonic()
    try:
        report = _RUNNERS[args.command](cfg)
    except (ConfigurationError, UnsupportedKindError, EvaluationError,
            SolverError) as exc:
        print(f"startrace: {exc}", file=sys.stderr)
        return 1
    try:
        csv_path, json_path = write_report(report, cfg["out"],
                                           cfg["basename"])
    except OSError as exc:
        print(f"startrace: cannot write report: {exc}", file=sys.stderr)
        return 1
    for name, ok in report.checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {args.command}: {name}")
    elapsed = time.monotonic() - started
    print(f"startrace: wrote {csv_path} and {json_path} "
          f"({elapsed:.2f}s)", file=sys.stderr)
    return 0 if report.passed() else 2


def main(argv=None):
    return run_subcommand(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
