"""Level-set volumes and coarea decompositions for rough star-shaped sets.

The level function a(x) = |x| / b(x/|x|) is homogeneous of degree one; its
level sets are the scaled surfaces rho * S.  Volumes, their rho-derivative
and full-space integrals all reduce to sphere averages of powers of b, which
is what makes them well defined for merely measurable profiles.  A seeded
Monte Carlo rejection sampler provides the independent volume oracle, and
for smooth 2-d profiles the classical gradient/arclength formulation is
evaluated alongside as a cross-check.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UnsupportedKindError
from .function_spaces import _composite_rule
from .star_geometry import SmoothTrigProfile, _as_points

__all__ = [
    "LevelFunction", "volume_Vlambda", "dV_dlambda", "integral_full_space",
    "classical_crosscheck_2d", "CrosscheckReport",
    "classical_volume_consistency", "mc_volume_oracle",
    "CoareaReport", "coarea_report",
]

MC_MIN_SAMPLES = 10_000
MC_CHUNK = 1 << 16


class LevelFunction:
    """a(x) = |x| / b(x/|x|); a(x) < lambda carves out the scaled domain."""

    def __init__(self, profile):
        self.profile = profile

    @property
    def dim(self):
        return self.profile.dim

    def eval(self, x):
        pts, single = _as_points(x, self.dim)
        r = np.linalg.norm(pts, axis=1)
        out = np.zeros(pts.shape[0])
        pos = r > 0.0
        if pos.any():
            nu = pts[pos] / r[pos, None]
            out[pos] = r[pos] / self.profile._values(nu)
        return float(out[0]) if single else out


def _bn_average(level, quad):
    b = level.profile._values(quad.nodes)
    return float(np.dot(quad.weights, b ** level.dim))


def volume_Vlambda(level, quad, lam):
    """Volume of { a < lambda }: (lambda^n / n) * integral of b^n."""
    if lam <= 0.0:
        raise ConfigurationError(f"lambda must be > 0, got {lam}")
    n = level.dim
    return lam ** n / n * _bn_average(level, quad)


def dV_dlambda(level, quad, lam):
    """Volume derivative: the b^n-weighted measure of the level set."""
    if lam <= 0.0:
        raise ConfigurationError(f"lambda must be > 0, got {lam}")
    n = level.dim
    return lam ** (n - 1) * _bn_average(level, quad)


def integral_full_space(level, quad, f, rho_rule=None):
    """Decompose integral of f over R^n into b^n-weighted level-set slices.

    integral_0^inf rho^{n-1} sum_i w_i b_i^n f(rho b_i nu_i) drho; the value
    is profile-independent, which is the content of the decomposition.
    """
    if not f.is_decaying:
        raise UnsupportedKindError(
            f"{f.kind} does not decay; the full-space integral diverges")
    profile = level.profile
    n = level.dim
    if rho_rule is None:
        r_max = f.decay_radius() / profile.c_low
        panel = min(1.0, 2.0 * f.radial_scale() / profile.c_high)
        rho, w_rho = _composite_rule(0.0, r_max, panel, nodes_per_panel=24)
    else:
        rho, w_rho = rho_rule
    b = profile._values(quad.nodes)
    radii = np.outer(rho, b)
    pts = radii[:, :, None] * quad.nodes[None, :, :]
    vals = f._eval(pts.reshape(-1, n)).reshape(radii.shape)
    slices = np.dot(vals * (b ** n)[None, :], quad.weights)
    return float(np.dot(w_rho, rho ** (n - 1) * slices))


# ----------------------------------------------------------------------
# classical cross-check for smooth 2-d profiles

@dataclass(frozen=True)
class CrosscheckReport:
    """Pointwise comparison of the gradient/arclength and pullback forms."""

    theta: np.ndarray
    grad_norm: np.ndarray       # |grad a| from e, e' with e = 1/b
    curve_speed: np.ndarray     # |d/dtheta of the parametrized level curve|
    lhs: np.ndarray             # curve_speed / grad_norm
    rhs: np.ndarray             # rho * b(theta)^2
    max_abs_diff: float


def classical_crosscheck_2d(profile, rho=1.0, n_angles=256):
    """Check (1/|grad a|) * arclength element == rho * b^2 pointwise.

    Both sides come from independent closed forms: the left from the polar
    gradient (e, e') of a = r * e(theta) and the explicit derivative of the
    level-curve parametrization, the right from the pullback measure weight.
    Smooth-profile only, since e' is its analytic derivative.
    """
    if not isinstance(profile, SmoothTrigProfile) or profile.dim != 2:
        raise UnsupportedKindError(
            "the classical cross-check needs a smooth n=2 profile")
    theta = (np.arange(n_angles) + 0.5) * (2.0 * np.pi / n_angles)
    b = profile.theta_values(theta)
    db = profile.theta_derivative(theta)
    e = 1.0 / b
    de = -db / b ** 2
    grad_norm = np.hypot(e, de)
    # d/dtheta of (rho/e) (cos, sin), assembled componentwise
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    dx = rho * (-de / e ** 2 * cos_t - sin_t / e)
    dy = rho * (-de / e ** 2 * sin_t + cos_t / e)
    curve_speed = np.hypot(dx, dy)
    lhs = curve_speed / grad_norm
    rhs = rho * b ** 2
    return CrosscheckReport(theta=theta, grad_norm=grad_norm,
                            curve_speed=curve_speed, lhs=lhs, rhs=rhs,
                            max_abs_diff=float(np.max(np.abs(lhs - rhs))))


def classical_volume_consistency(profile, lam, n_angles=256, n_rho=32):
    """Integrate the classical coarea integrand up to lambda.

    Returns the level-set accumulated volume (rho-quadrature of the
    gradient/arclength form) for comparison against the direct formula.
    """
    x, w = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * lam * (x + 1.0)
    w_rho = 0.5 * lam * w
    total = 0.0
    for r, wr in zip(rho, w_rho):
        chk = classical_crosscheck_2d(profile, rho=float(r),
                                      n_angles=n_angles)
        total += wr * float(np.sum(chk.lhs)) * (2.0 * np.pi / n_angles)
    return total


# ----------------------------------------------------------------------
# Monte Carlo volume oracle

def mc_volume_oracle(level, lam, samples, seed):
    """Rejection-sample the volume of { a < lambda } with a binomial error.

    Uniform draws on the bounding box [-lam c_high, lam c_high]^n, counted
    against the membership predicate.  Chunks use counter-keyed Philox
    streams, so the estimate is reproducible bit for bit and chunks could
    be drawn in parallel.
    """
    if samples < MC_MIN_SAMPLES:
        raise ConfigurationError(
            f"Monte Carlo oracle needs >= {MC_MIN_SAMPLES} samples")
    n = level.dim
    half = lam * level.profile.c_high
    box_volume = (2.0 * half) ** n
    hits = 0
    n_chunks = -(-samples // MC_CHUNK)
    for chunk in range(n_chunks):
        count = min(MC_CHUNK, samples - chunk * MC_CHUNK)
        rng = np.random.Generator(
            np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, chunk]))
        pts = rng.uniform(-half, half, size=(count, n))
        hits += int(np.count_nonzero(level.eval(pts) < lam))
    p_hat = hits / samples
    estimate = box_volume * p_hat
    stderr = box_volume * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / samples)
    return estimate, stderr


# ----------------------------------------------------------------------
# bundled report

@dataclass(frozen=True)
class CoareaReport:
    lambdas: np.ndarray
    volumes: np.ndarray
    dv_formula: np.ndarray
    dv_central_diff: np.ndarray
    mc_estimates: np.ndarray    # nan entries when sampling was disabled
    mc_stderrs: np.ndarray


def coarea_report(profile, quad, lambdas, mc_samples=0, seed=0):
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0 or (lambdas <= 0).any():
        raise ConfigurationError("lambda grid must be positive and nonempty")
    level = LevelFunction(profile)
    vols = np.asarray([volume_Vlambda(level, quad, l) for l in lambdas])
    dv = np.asarray([dV_dlambda(level, quad, l) for l in lambdas])
    dv_fd = np.empty_like(dv)
    for i, lam in enumerate(lambdas):
        h = 1.0e-5 * lam
        dv_fd[i] = (volume_Vlambda(level, quad, lam + h)
                    - volume_Vlambda(level, quad, lam - h)) / (2.0 * h)
    mc_est = np.full(lambdas.shape, np.nan)
    mc_err = np.full(lambdas.shape, np.nan)
    if mc_samples:
        for i, lam in enumerate(lambdas):
            mc_est[i], mc_err[i] = mc_volume_oracle(level, lam, mc_samples,
                                                    seed)
    return CoareaReport(lambdas=lambdas, volumes=vols, dv_formula=dv,
                        dv_central_diff=dv_fd, mc_estimates=mc_est,
                        mc_stderrs=mc_err)
