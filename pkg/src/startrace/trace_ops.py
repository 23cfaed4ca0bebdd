"""Trace maps on star-shaped surfaces and the experiments that probe them.

The bounded-domain trace restricts a field to the boundary through the
radial parametrization; the whole-space trace samples a Sobolev function on
the scaled surface rho * S.  Operator norms are not computable, so every
quantitative statement (trace inequality, rho-decay, Hoelder modulus in rho,
kernel bound) is verified one-sidedly: designed families probe for
violations and log-log fits estimate the observed exponents.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EvaluationError, PrecisionWarning
from .function_spaces import (RadialCosGaussian, ShellGaussian,
                              w12_norm_rn, w1p_norm_domain, ws2_norm_rn)
from .star_geometry import StarSurface, lp_norm_boundary, surface_points

__all__ = [
    "TraceSample", "ExponentFit", "fit_exponent",
    "trace_Tp", "trace_Ts",
    "trace_constant_experiment", "TraceConstantReport",
    "decay_experiment", "DecayReport",
    "kernel_bound_K", "kernel_regime_experiment", "KernelRegimeReport",
    "holder_experiment", "HolderReport", "dyadic_deltas",
]

S_THRESHOLD = 0.5   # traces on R^n exist for s > 1/2


@dataclass(frozen=True)
class TraceSample:
    """Field values at the quadrature images on rho * S plus their norm."""

    rho: float
    values: np.ndarray
    norm: float
    p: float


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares slope of log(ordinate) against log(abscissa)."""

    abscissae: np.ndarray
    ordinates: np.ndarray
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float


def fit_exponent(abscissae, ordinates):
    x = np.asarray(abscissae, dtype=float)
    y = np.asarray(ordinates, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ConfigurationError("need >= 2 paired samples for a slope fit")
    if (x <= 0).any() or (y <= 0).any():
        raise EvaluationError("log-log fit needs positive samples")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    dof = max(x.size - 2, 1)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(resid ** 2)) / dof / sxx)
    total = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / total if total > 0 else 1.0
    return ExponentFit(abscissae=x, ordinates=y, slope=float(slope),
                       intercept=float(intercept), slope_stderr=stderr,
                       r_squared=r2)


# ----------------------------------------------------------------------
# trace maps

def trace_Tp(domain, quad, f, p):
    """Boundary trace sample with its L^p norm in the pullback measure."""
    surface = domain.boundary_surface()
    values = f._eval(surface_points(surface, quad))
    norm = lp_norm_boundary(surface, quad, lambda pts: values, p)
    return TraceSample(rho=1.0, values=values, norm=norm, p=p)


def trace_Ts(surface, quad, f, s):
    """Whole-space trace on rho * S with its L^2(S) norm.

    The norm uses the reference-surface measure (no rho^{n-1} factor);
    s only gates admissibility and must exceed 1/2.
    """
    if s <= S_THRESHOLD:
        raise ConfigurationError(
            f"trace on R^n requires s > 1/2, got s = {s}")
    values = f._eval(surface_points(surface, quad))
    norm = math.sqrt(float(np.dot(quad.weights, values ** 2)))
    return TraceSample(rho=surface.rho, values=values, norm=norm, p=2.0)


# ----------------------------------------------------------------------
# trace inequality on a bounded domain

@dataclass(frozen=True)
class TraceConstantReport:
    """Observed trace/Sobolev ratios for a family, at two grid resolutions."""

    p: float
    ratios: np.ndarray
    ratios_refined: np.ndarray
    max_ratio: float
    max_ratio_refined: float
    stability_delta: float      # relative change of the family max
    skipped: list = field(default_factory=list)


def trace_constant_experiment(domain, quad, family, p, radial_rule=None):
    """Per-member ratio ||trace f||_{L^p} / ||f||_{W^1_p} and its stability.

    There is no canonical constant to compare against; the experiment
    reports the family maximum and how much it moves under one grid
    doubling.  Members with vanishing Sobolev norm are skipped.
    """
    if not family:
        raise ConfigurationError("trace-constant experiment needs a family")
    refined = quad.refined(2)
    ratios, ratios_ref, skipped = [], [], []
    for idx, f in enumerate(family):
        denom = w1p_norm_domain(domain, quad, f, p, radial_rule)
        if denom < 1e-300:
            skipped.append((idx, "zero Sobolev norm"))
            continue
        ratios.append(trace_Tp(domain, quad, f, p).norm / denom)
        denom_ref = w1p_norm_domain(domain, refined, f, p, radial_rule)
        ratios_ref.append(trace_Tp(domain, refined, f, p).norm / denom_ref)
    if not ratios:
        raise EvaluationError("every family member was skipped")
    ratios = np.asarray(ratios)
    ratios_ref = np.asarray(ratios_ref)
    mx, mx_ref = float(ratios.max()), float(ratios_ref.max())
    return TraceConstantReport(
        p=p, ratios=ratios, ratios_refined=ratios_ref,
        max_ratio=mx, max_ratio_refined=mx_ref,
        stability_delta=abs(mx - mx_ref) / mx_ref, skipped=skipped)


# ----------------------------------------------------------------------
# decay of the whole-space trace in rho

@dataclass(frozen=True)
class DecayReport:
    rhos: np.ndarray
    trace_norms: np.ndarray
    sobolev_norms: np.ndarray
    ratios: np.ndarray
    fit: ExponentFit
    expected_slope: float


def decay_experiment(profile, quad, rhos, s=1.0, sigma=0.2):
    """Fit the rho-decay of the trace/Sobolev ratio with shell probes.

    Each rho gets a Gaussian shell centered on the surface radius (the
    family that keeps the trace of order one), so the fitted slope exposes
    the decay exponent -(n-1)/2 of the trace-map norm.  The Sobolev side is
    the physical-space W^1_2 norm, which is why s is pinned to 1.
    """
    rhos = np.asarray(rhos, dtype=float)
    if rhos.size < 4:
        raise ConfigurationError("decay experiment needs >= 4 rho values")
    if (rhos < 1.0).any():
        raise ConfigurationError("decay experiment expects rho >= rho_0 = 1")
    if s != 1.0:
        raise ConfigurationError(
            "the shell family has closed derivatives only; use s = 1")
    trace_norms, sobolev_norms = [], []
    for rho in rhos:
        f = ShellGaussian(profile.dim, r0=float(rho), sigma=sigma)
        tr = trace_Ts(StarSurface(profile, rho=float(rho)), quad, f, s=1.0)
        trace_norms.append(tr.norm)
        sobolev_norms.append(w12_norm_rn(f))
    trace_norms = np.asarray(trace_norms)
    sobolev_norms = np.asarray(sobolev_norms)
    ratios = trace_norms / sobolev_norms
    return DecayReport(rhos=rhos, trace_norms=trace_norms,
                       sobolev_norms=sobolev_norms, ratios=ratios,
                       fit=fit_exponent(rhos, ratios),
                       expected_slope=-(profile.dim - 1) / 2.0)


# ----------------------------------------------------------------------
# the scalar kernel behind the Hoelder modulus

def _kernel_breakpoints(delta, x_max):
    # resolve the sin^2 oscillation (period 2 pi / delta) and the weight
    # bend near x ~ 1; panel growth is geometric until the wavelength caps it
    half_wave = math.pi / delta
    pts = [0.0]
    x = 0.0
    while x < x_max:
        x += min(half_wave, max(0.5 * x, 0.5))
        pts.append(min(x, x_max))
    return np.asarray(pts)


def kernel_bound_K(s, rho, rho1, x_max=1.0e6, nodes_per_panel=12):
    """Evaluate the phase-difference kernel

        integral_R |e^{ix rho} - e^{ix rho1}|^2 / (1 + |x|)^{2s} dx
            = 8 * integral_0^inf sin^2(x (rho-rho1)/2) / (1+x)^{2s} dx

    by oscillation-resolving panels on [0, x_max] plus an analytic tail
    estimate 4 (1+x_max)^{1-2s} / (2s-1).  Warns when the tail is not
    negligible (s close to 1/2 with too small an x_max).
    """
    if s <= S_THRESHOLD:
        raise ConfigurationError(f"kernel bound needs s > 1/2, got {s}")
    delta = abs(rho - rho1)
    if delta == 0.0:
        return 0.0
    edges = _kernel_breakpoints(delta, x_max)
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes_per_panel)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * gl_x[None, :]).ravel()
    w = (half[:, None] * gl_w[None, :]).ravel()
    vals = 8.0 * np.sin(0.5 * delta * x) ** 2 * (1.0 + x) ** (-2.0 * s)
    body = float(np.dot(w, vals))
    tail = 4.0 * (1.0 + x_max) ** (1.0 - 2.0 * s) / (2.0 * s - 1.0)
    total = body + tail
    # the tail uses the mean value 1/2 of sin^2; the neglected oscillatory
    # remainder is smaller by ~ (2s-1)/(delta x_max) once the tail oscillates
    uncertainty = tail * min(1.0, (2.0 * s - 1.0) / (delta * x_max))
    if total > 0.0 and uncertainty / total > 1.0e-3:
        warnings.warn(
            f"kernel tail uncertainty is {uncertainty / total:.2e} of the "
            f"value; increase x_max for s = {s}", PrecisionWarning)
    return total


@dataclass(frozen=True)
class KernelRegimeReport:
    """Kernel values across a delta sweep with the regime diagnostics."""

    s: float
    deltas: np.ndarray
    values: np.ndarray
    fit: ExponentFit
    expected_slope: float       # 2s-1 below s=3/2, 2 above, 2 at the cusp
    log_band: np.ndarray        # K / (delta^2 (1 + |ln delta|))
    log_band_ratio: float       # max/min of the band, the s=3/2 diagnostic


def kernel_regime_experiment(s, deltas, x_max=1.0e6):
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size < 4:
        raise ConfigurationError("kernel sweep needs >= 4 delta values")
    values = np.asarray([kernel_bound_K(s, 1.0 + d, 1.0, x_max=x_max)
                         for d in deltas])
    band = values / (deltas ** 2 * (1.0 + np.abs(np.log(deltas))))
    expected = 2.0 * s - 1.0 if s < 1.5 else 2.0
    return KernelRegimeReport(
        s=s, deltas=deltas, values=values, fit=fit_exponent(deltas, values),
        expected_slope=expected, log_band=band,
        log_band_ratio=float(band.max() / band.min()))


# ----------------------------------------------------------------------
# Hoelder modulus of rho -> T(rho)

def dyadic_deltas(k_min=4, k_max=14):
    return 2.0 ** (-np.arange(k_min, k_max + 1, dtype=float))


def oscillatory_probe(dim, delta, a=0.5):
    """The near-extremal member for step delta: frequency-1/delta ripple."""
    return RadialCosGaussian(dim, omega=1.0 / delta, a=a)


@dataclass(frozen=True)
class HolderMemberReport:
    label: str
    deltas: np.ndarray
    diff_norms: np.ndarray
    ratios: np.ndarray
    fit: ExponentFit
    c_emp: float                # ratio(delta_0) / delta_0^{s-1/2}
    max_excess: float           # max over delta of ratio/(c_emp d^{s-1/2}) - 1


@dataclass(frozen=True)
class HolderReport:
    s: float
    rho0: float
    floor_slope: float          # s - 1/2, the modulus exponent
    members: list


def _sobolev_denominator(f, s):
    if s == 1.0 and f.is_radial:
        return w12_norm_rn(f)
    return ws2_norm_rn(f, s)


def holder_experiment(profile, quad, s, members, rho0=1.0, deltas=None,
                      include_oscillatory=True):
    """Ratios ||(T(rho0) - T(rho0+delta)) f|| / ||f||_{W^s_2} over a sweep.

    ``members`` are (label, field) pairs tested as fixed functions; the
    delta-matched oscillatory family cos(|x|/delta) * Gaussian is appended
    unless disabled.  Each member gets a fitted slope and a one-sided check
    against C_emp * delta^{s-1/2} with C_emp frozen at the largest delta.
    """
    if not (S_THRESHOLD < s < 1.5):
        raise ConfigurationError(
            f"the Hoelder modulus regime is 1/2 < s < 3/2, got s = {s}")
    deltas = dyadic_deltas() if deltas is None else \
        np.asarray(deltas, dtype=float)
    if deltas.size < 2:
        raise ConfigurationError("Hoelder sweep needs >= 2 delta values")
    deltas = np.sort(deltas)[::-1]          # C_emp is pinned at the largest
    base = surface_points(StarSurface(profile, rho=rho0), quad)

    def norms_for(f, delta):
        shifted = f._eval(base * ((rho0 + delta) / rho0))
        diff = f._eval(base) - shifted
        num = math.sqrt(float(np.dot(quad.weights, diff ** 2)))
        return num, num / _sobolev_denominator(f, s)

    jobs = [(label, lambda d, f=f: norms_for(f, d)) for label, f in members]
    if include_oscillatory:
        jobs.append(("oscillatory",
                     lambda d: norms_for(oscillatory_probe(profile.dim, d),
                                         d)))
    exponent = s - 0.5
    out = []
    for label, job in jobs:
        pairs = [job(d) for d in deltas]
        diff_norms = np.asarray([p[0] for p in pairs])
        ratios = np.asarray([p[1] for p in pairs])
        c_emp = ratios[0] / deltas[0] ** exponent
        excess = ratios / (c_emp * deltas ** exponent) - 1.0
        out.append(HolderMemberReport(
            label=label, deltas=deltas, diff_norms=diff_norms, ratios=ratios,
            fit=fit_exponent(deltas, ratios), c_emp=float(c_emp),
            max_excess=float(excess.max())))
    return HolderReport(s=s, rho0=rho0, floor_slope=exponent, members=out)
