"""Test-function families with exact derivatives, Sobolev norms, operator U.

All fields are scalar functions on R^n (n = 2 or 3) with closed-form
gradient and Laplacian; radially symmetric kinds also expose the radial
profile of their Fourier-transform modulus, which is what the fractional
Sobolev norms integrate.  The Fourier convention is unitary,
F f(k) = (2 pi)^{-n/2} integral e^{-ik.x} f(x) dx, so Plancherel holds
with no extra constants.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .errors import ConfigurationError, UnsupportedKindError
from .sphere_quad import sphere_area
from .star_geometry import _as_points

__all__ = [
    "TestFunction", "GaussianRadial", "ShellGaussian", "PolyGaussian",
    "ExpLinear", "Bump", "ConstantField", "RadialCosGaussian", "CustomField",
    "RadialQuadrature", "poly_gaussian_family", "testfunction_from_config",
    "w1p_norm_domain", "ws2_norm_rn", "l2_norm_rn", "w12_norm_rn",
    "apply_U", "USample",
]

_TINY_RADIUS = 1e-30


# ----------------------------------------------------------------------
# radial quadrature

@dataclass(frozen=True)
class RadialQuadrature:
    """Nodes/weights on the reference interval [0, 1], mapped as needed."""

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    @classmethod
    def gauss_legendre(cls, n=256):
        x, w = np.polynomial.legendre.leggauss(n)
        return cls(nodes=0.5 * (x + 1.0), weights=0.5 * w,
                   exact_degree=2 * n - 1)

    @classmethod
    def composite(cls, n_panels, nodes_per_panel=24):
        x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
        edges = np.linspace(0.0, 1.0, n_panels + 1)
        half = 0.5 / n_panels
        nodes = (edges[:-1, None] + half * (x + 1.0)[None, :]).ravel()
        weights = np.tile(half * w, n_panels)
        return cls(nodes=nodes, weights=weights,
                   exact_degree=2 * nodes_per_panel - 1)

    def on_interval(self, lo, hi):
        span = hi - lo
        return lo + span * self.nodes, span * self.weights


def _composite_rule(lo, hi, panel_len, nodes_per_panel=24):
    n_panels = max(1, int(math.ceil((hi - lo) / panel_len)))
    rule = RadialQuadrature.composite(n_panels, nodes_per_panel)
    return rule.on_interval(lo, hi)


# ----------------------------------------------------------------------
# test-function kinds

class TestFunction:
    """Scalar field with closed-form eval / gradient / Laplacian."""

    kind = "abstract"
    is_radial = False
    is_decaying = True

    def __init__(self, dim):
        if dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {dim}")
        self.dim = dim

    def eval(self, x):
        pts, single = _as_points(x, self.dim)
        vals = self._eval(pts)
        return float(vals[0]) if single else vals

    def gradient(self, x):
        pts, single = _as_points(x, self.dim)
        g = self._gradient(pts)
        return g[0] if single else g

    def laplacian(self, x):
        pts, single = _as_points(x, self.dim)
        vals = self._laplacian(pts)
        return float(vals[0]) if single else vals

    def __call__(self, x):
        """Vectorized evaluation; lets instances be passed as integrands."""
        return self._eval(np.atleast_2d(np.asarray(x, dtype=float)))

    # radial interface -------------------------------------------------
    def radial_eval(self, r):
        raise UnsupportedKindError(f"{self.kind} is not radially symmetric")

    def radial_derivative(self, r):
        raise UnsupportedKindError(f"{self.kind} is not radially symmetric")

    def fourier_radial_modulus(self, k):
        raise UnsupportedKindError(
            f"{self.kind} does not expose a radial Fourier profile")

    def fourier_panels(self, s):
        raise UnsupportedKindError(
            f"{self.kind} does not expose a radial Fourier profile")

    # decay hints --------------------------------------------------------
    def decay_radius(self):
        if not self.is_decaying:
            raise UnsupportedKindError(f"{self.kind} does not decay")
        raise NotImplementedError

    def radial_scale(self):
        return 1.0

    def to_config(self):
        raise NotImplementedError

    def __repr__(self):
        items = ", ".join(f"{k}={v!r}" for k, v in self.to_config().items()
                          if k != "kind")
        return f"{type(self).__name__}({items})"


class _RadialKind(TestFunction):
    """Shared gradient/Laplacian plumbing for radially symmetric kinds.

    Subclasses provide radial_eval, radial_derivative, _second_derivative
    and _dfdr_over_r (the smooth extension of f'(r)/r through r = 0).
    """

    is_radial = True

    def _radii(self, pts):
        return np.linalg.norm(pts, axis=1)

    def _eval(self, pts):
        return self.radial_eval(self._radii(pts))

    def _dfdr_over_r(self, r):
        safe = np.maximum(r, _TINY_RADIUS)
        return self.radial_derivative(safe) / safe

    def _gradient(self, pts):
        r = self._radii(pts)
        return self._dfdr_over_r(r)[:, None] * pts

    def _laplacian(self, pts):
        r = self._radii(pts)
        return self._second_derivative(r) \
            + (self.dim - 1) * self._dfdr_over_r(r)


class GaussianRadial(_RadialKind):
    """f = exp(-a |x|^2)."""

    kind = "gaussian"

    def __init__(self, dim, a=0.5):
        super().__init__(dim)
        if a <= 0.0:
            raise ConfigurationError(f"gaussian needs a > 0, got {a}")
        self.a = float(a)

    def radial_eval(self, r):
        return np.exp(-self.a * np.asarray(r, dtype=float) ** 2)

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        return -2.0 * self.a * r * self.radial_eval(r)

    def _dfdr_over_r(self, r):
        return -2.0 * self.a * self.radial_eval(r)

    def _second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        return (4.0 * self.a ** 2 * r ** 2 - 2.0 * self.a) \
            * self.radial_eval(r)

    def fourier_radial_modulus(self, k):
        k = np.asarray(k, dtype=float)
        return (2.0 * self.a) ** (-self.dim / 2.0) \
            * np.exp(-k ** 2 / (4.0 * self.a))

    def fourier_panels(self, s):
        k_max = math.sqrt(2.0 * self.a * (50.0 + 10.0 * s))
        return [(0.0, k_max, 256)]

    def decay_radius(self):
        return math.sqrt(45.0 / self.a)

    def radial_scale(self):
        return 1.0 / math.sqrt(2.0 * self.a)

    def l2_norm_exact(self):
        return (math.pi / (2.0 * self.a)) ** (self.dim / 4.0)

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "a": self.a}


class ShellGaussian(_RadialKind):
    """f = exp(-(|x| - r0)^2 / (2 sigma^2)): a Gaussian ridge on a sphere.

    Not smooth at the origin, where its value is exp(-r0^2/(2 sigma^2));
    keep r0 >> sigma so that is negligible.
    """

    kind = "shellgaussian"

    def __init__(self, dim, r0, sigma):
        super().__init__(dim)
        if r0 <= 0.0 or sigma <= 0.0:
            raise ConfigurationError("shellgaussian needs r0 > 0, sigma > 0")
        self.r0 = float(r0)
        self.sigma = float(sigma)

    def radial_eval(self, r):
        t = (np.asarray(r, dtype=float) - self.r0) / self.sigma
        return np.exp(-0.5 * t ** 2)

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        return -(r - self.r0) / self.sigma ** 2 * self.radial_eval(r)

    def _second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        t = (r - self.r0) / self.sigma
        return (t ** 2 - 1.0) / self.sigma ** 2 * self.radial_eval(r)

    def decay_radius(self):
        return self.r0 + 10.0 * self.sigma

    def support_interval(self):
        return max(0.0, self.r0 - 10.0 * self.sigma), self.decay_radius()

    def radial_scale(self):
        return self.sigma

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "r0": self.r0,
                "sigma": self.sigma}


# -- small helpers for multivariate polynomials as {exponent tuple: coeff} --

def _poly_eval(terms, pts):
    out = np.zeros(pts.shape[0])
    for expo, coeff in terms.items():
        mono = np.ones(pts.shape[0])
        for axis, e in enumerate(expo):
            if e:
                mono = mono * pts[:, axis] ** e
        out += coeff * mono
    return out


def _poly_diff(terms, axis):
    out = {}
    for expo, coeff in terms.items():
        if expo[axis] == 0:
            continue
        new = list(expo)
        new[axis] -= 1
        key = tuple(new)
        out[key] = out.get(key, 0.0) + coeff * expo[axis]
    return out


def _poly_shift(terms, axis, power=1):
    out = {}
    for expo, coeff in terms.items():
        new = list(expo)
        new[axis] += power
        out[tuple(new)] = out.get(tuple(new), 0.0) + coeff
    return out


def _poly_add(*polys):
    out = {}
    for p in polys:
        for expo, coeff in p.items():
            out[expo] = out.get(expo, 0.0) + coeff
    return out


def _poly_scale(terms, factor):
    return {expo: coeff * factor for expo, coeff in terms.items()}


class PolyGaussian(TestFunction):
    """f = P(x) * exp(-a |x|^2) for a multivariate polynomial P.

    ``terms`` maps exponent tuples to coefficients,
    e.g. {(0, 0): 1.0, (2, 1): -0.5} for 1 - 0.5 x^2 y on R^2.
    """

    kind = "polygaussian"

    def __init__(self, dim, terms, a=0.5):
        super().__init__(dim)
        if a <= 0.0:
            raise ConfigurationError(f"polygaussian needs a > 0, got {a}")
        terms = {tuple(int(e) for e in expo): float(c)
                 for expo, c in terms.items() if c != 0.0}
        if not terms:
            terms = {(0,) * dim: 0.0}
        for expo in terms:
            if len(expo) != dim or any(e < 0 for e in expo):
                raise ConfigurationError(f"bad exponent tuple {expo}")
        self.a = float(a)
        self.terms = terms
        # gradient polynomials: dP/dx_l - 2 a x_l P
        self._grad_terms = [
            _poly_add(_poly_diff(terms, l),
                      _poly_scale(_poly_shift(terms, l), -2.0 * self.a))
            for l in range(dim)
        ]
        # Laplacian polynomial:
        # lap P - 4a sum x_l dP/dx_l - 2 a n P + 4 a^2 |x|^2 P
        lap = _poly_add(*[_poly_diff(_poly_diff(terms, l), l)
                          for l in range(dim)])
        cross = _poly_add(*[_poly_shift(_poly_diff(terms, l), l)
                            for l in range(dim)])
        r2p = _poly_add(*[_poly_shift(terms, l, 2) for l in range(dim)])
        self._lap_terms = _poly_add(
            lap, _poly_scale(cross, -4.0 * self.a),
            _poly_scale(terms, -2.0 * self.a * dim),
            _poly_scale(r2p, 4.0 * self.a ** 2))
        self.degree = max(sum(e) for e in terms)

    def _envelope(self, pts):
        return np.exp(-self.a * np.sum(pts ** 2, axis=1))

    def _eval(self, pts):
        return _poly_eval(self.terms, pts) * self._envelope(pts)

    def _gradient(self, pts):
        env = self._envelope(pts)
        return np.column_stack([_poly_eval(g, pts) for g in self._grad_terms]
                               ) * env[:, None]

    def _laplacian(self, pts):
        return _poly_eval(self._lap_terms, pts) * self._envelope(pts)

    def decay_radius(self):
        return math.sqrt((65.0 + 5.0 * self.degree) / self.a)

    def radial_scale(self):
        return 1.0 / math.sqrt(2.0 * self.a)

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "a": self.a,
                "terms": [[*expo, coeff]
                          for expo, coeff in sorted(self.terms.items())]}


class ExpLinear(TestFunction):
    """f = exp(d . x); not decaying, used as a harmonic-type carrier."""

    kind = "explinear"
    is_decaying = False

    def __init__(self, dim, direction):
        super().__init__(dim)
        d = np.asarray(direction, dtype=float)
        if d.shape != (dim,):
            raise ConfigurationError(
                f"direction must have shape ({dim},), got {d.shape}")
        self.direction = d

    def _eval(self, pts):
        return np.exp(pts @ self.direction)

    def _gradient(self, pts):
        return self._eval(pts)[:, None] * self.direction[None, :]

    def _laplacian(self, pts):
        return float(self.direction @ self.direction) * self._eval(pts)

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim,
                "direction": [float(v) for v in self.direction]}


class Bump(_RadialKind):
    """Smooth mollifier supported in |x| < radius, normalized to f(0) = 1.

    f = exp(1 - 1/(1 - (r/R)^2)) inside the support, 0 outside.
    """

    kind = "bump"

    def __init__(self, dim, radius):
        super().__init__(dim)
        if radius <= 0.0:
            raise ConfigurationError(f"bump needs radius > 0, got {radius}")
        self.radius = float(radius)

    def _inside(self, r):
        u = (np.asarray(r, dtype=float) / self.radius) ** 2
        return u, u < 1.0 - 1e-14

    def radial_eval(self, r):
        u, ok = self._inside(r)
        out = np.zeros_like(u)
        g = 1.0 / (1.0 - u[ok])
        out[ok] = np.exp(1.0 - g)
        return out

    def _g_parts(self, r):
        u, ok = self._inside(r)
        g = np.zeros_like(u)
        g[ok] = 1.0 / (1.0 - u[ok])
        return u, ok, g

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        _, ok, g = self._g_parts(r)
        out = np.zeros_like(g)
        out[ok] = -(2.0 * r[ok] / self.radius ** 2) * g[ok] ** 2 \
            * np.exp(1.0 - g[ok])
        return out

    def _dfdr_over_r(self, r):
        # f'(r)/r = -(2/R^2) g^2 f is smooth through the origin
        _, ok, g = self._g_parts(np.asarray(r, dtype=float))
        out = np.zeros_like(g)
        out[ok] = -(2.0 / self.radius ** 2) * g[ok] ** 2 * np.exp(1.0 - g[ok])
        return out

    def _second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        _, ok, g = self._g_parts(r)
        out = np.zeros_like(g)
        rr = r[ok]
        gg = g[ok]
        gp = (2.0 * rr / self.radius ** 2) * gg ** 2
        gpp = (2.0 / self.radius ** 2) * gg ** 2 \
            + (8.0 * rr ** 2 / self.radius ** 4) * gg ** 3
        out[ok] = (gp ** 2 - gpp) * np.exp(1.0 - gg)
        return out

    def decay_radius(self):
        return self.radius

    def radial_scale(self):
        return self.radius / 6.0

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "radius": self.radius}


class ConstantField(TestFunction):
    kind = "constant"
    is_decaying = False

    def __init__(self, dim, value):
        super().__init__(dim)
        self.value = float(value)

    def _eval(self, pts):
        return np.full(pts.shape[0], self.value)

    def _gradient(self, pts):
        return np.zeros_like(pts)

    def _laplacian(self, pts):
        return np.zeros(pts.shape[0])

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "value": self.value}


class RadialCosGaussian(_RadialKind):
    """f = cos(omega |x|) * exp(-a |x|^2): the oscillatory trace probe.

    The radial Fourier modulus is closed-form for n=3 (sine-transform
    identity); for n=2 it is computed by an oscillation-resolving
    Gauss-Legendre Hankel quadrature, since no elementary form exists.
    """

    kind = "cosgaussian"

    def __init__(self, dim, omega, a=0.5):
        super().__init__(dim)
        if omega < 0.0 or a <= 0.0:
            raise ConfigurationError("cosgaussian needs omega >= 0, a > 0")
        self.omega = float(omega)
        self.a = float(a)

    def radial_eval(self, r):
        r = np.asarray(r, dtype=float)
        return np.cos(self.omega * r) * np.exp(-self.a * r ** 2)

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        env = np.exp(-self.a * r ** 2)
        return (-self.omega * np.sin(self.omega * r)
                - 2.0 * self.a * r * np.cos(self.omega * r)) * env

    def _dfdr_over_r(self, r):
        r = np.asarray(r, dtype=float)
        env = np.exp(-self.a * r ** 2)
        # omega*sin(omega r)/r -> omega^2 smoothly via sinc
        sin_term = self.omega ** 2 * np.sinc(self.omega * r / np.pi)
        return (-sin_term - 2.0 * self.a * np.cos(self.omega * r)) * env

    def _second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        env = np.exp(-self.a * r ** 2)
        c = np.cos(self.omega * r)
        sn = np.sin(self.omega * r)
        return ((-self.omega ** 2 + 4.0 * self.a ** 2 * r ** 2
                 - 2.0 * self.a) * c
                + 4.0 * self.a * self.omega * r * sn) * env

    def _sine_transform(self, b):
        # integral_0^inf r sin(b r) exp(-a r^2) dr, odd in b
        b = np.asarray(b, dtype=float)
        return (b / (4.0 * self.a)) * math.sqrt(math.pi / self.a) \
            * np.exp(-b ** 2 / (4.0 * self.a))

    def _hankel_modulus_2d(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        r_max = math.sqrt(48.0 / self.a)
        f_max = float(np.max(k)) + self.omega
        # 16-node panels spanning <= 4 wavelengths of the fastest beat
        panel = min(8.0 * math.pi / max(f_max, 1.0),
                    0.7 / math.sqrt(self.a))
        r, w = _composite_rule(0.0, r_max, panel, nodes_per_panel=16)
        base = w * r * np.cos(self.omega * r) * np.exp(-self.a * r ** 2)
        out = np.empty(k.size)
        chunk = max(1, int(4e6 // r.size))
        for lo in range(0, k.size, chunk):
            kk = k[lo:lo + chunk]
            out[lo:lo + chunk] = j0(np.outer(kk, r)) @ base
        return np.abs(out)

    def fourier_radial_modulus(self, k):
        k = np.asarray(k, dtype=float)
        if self.dim == 3:
            t = 0.5 * (self._sine_transform(k + self.omega)
                       + self._sine_transform(k - self.omega))
            safe = np.maximum(np.abs(k), _TINY_RADIUS)
            return np.abs(math.sqrt(2.0 / math.pi) * t / safe)
        return self._hankel_modulus_2d(k)

    def fourier_panels(self, s):
        width = math.sqrt(4.0 * self.a * (50.0 + 10.0 * s))
        lo = max(0.0, self.omega - width)
        panels = []
        if lo > 0.0:
            panels.append((0.0, lo, 96))
        panels.append((lo, self.omega + width, 256))
        return panels

    def decay_radius(self):
        return math.sqrt(45.0 / self.a)

    def radial_scale(self):
        base = 1.0 / math.sqrt(2.0 * self.a)
        if self.omega > 0.0:
            return min(base, 2.0 * math.pi / self.omega / 6.0)
        return base

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "omega": self.omega,
                "a": self.a}


class CustomField(TestFunction):
    """Wrap plain callables as a field; for manufactured solutions in tests.

    ``fn``, ``grad`` and ``lap`` act on (N, n) point arrays.
    """

    kind = "custom"

    def __init__(self, dim, fn, grad=None, lap=None, decaying=False,
                 radius=None):
        super().__init__(dim)
        self._fn = fn
        self._grad = grad
        self._lap = lap
        self.is_decaying = decaying
        self._radius = radius

    def _eval(self, pts):
        return np.asarray(self._fn(pts), dtype=float)

    def _gradient(self, pts):
        if self._grad is None:
            raise UnsupportedKindError("custom field has no gradient")
        return np.asarray(self._grad(pts), dtype=float)

    def _laplacian(self, pts):
        if self._lap is None:
            raise UnsupportedKindError("custom field has no laplacian")
        return np.asarray(self._lap(pts), dtype=float)

    def decay_radius(self):
        if self._radius is None:
            return super().decay_radius()
        return self._radius

    def to_config(self):
        raise UnsupportedKindError("custom fields are not serializable")


def helmholtz_residual(field):
    """The field u = -lap f + f, so that f solves -lap f + f = u."""
    return CustomField(
        field.dim,
        fn=lambda pts: -field._laplacian(pts) + field._eval(pts),
        decaying=field.is_decaying,
        radius=field.decay_radius() if field.is_decaying else None)


_FIELD_KINDS = {
    "gaussian": GaussianRadial,
    "shellgaussian": ShellGaussian,
    "polygaussian": PolyGaussian,
    "explinear": ExpLinear,
    "bump": Bump,
    "constant": ConstantField,
    "cosgaussian": RadialCosGaussian,
}


def testfunction_from_config(cfg):
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind not in _FIELD_KINDS:
        raise ConfigurationError(f"unknown test-function kind: {kind!r}")
    if kind == "polygaussian":
        cfg["terms"] = {tuple(row[:-1]): row[-1] for row in cfg["terms"]}
    try:
        return _FIELD_KINDS[kind](**cfg)
    except TypeError as exc:
        raise ConfigurationError(f"bad test-function config for {kind}: {exc}")


def poly_gaussian_family(count, dim, seed, degree=3, a=0.5):
    """Deterministic family of random low-degree PolyGaussian fields."""
    rng = np.random.default_rng(seed)
    exponents = [expo for expo in np.ndindex(*(degree + 1,) * dim)
                 if sum(expo) <= degree]
    family = []
    for _ in range(count):
        coeffs = rng.uniform(-1.0, 1.0, size=len(exponents))
        terms = {expo: c for expo, c in zip(exponents, coeffs)}
        family.append(PolyGaussian(dim, terms, a=a))
    return family


# ----------------------------------------------------------------------
# norms

def w1p_norm_domain(domain, quad, f, p, radial_rule=None):
    """Sobolev norm on the star domain via spherical coordinates.

    ( integral |f|^p + sum_l integral |df/dx_l|^p )^(1/p), with the domain
    integral reduced to sum_nu w_nu integral_0^{b(nu)} (.) r^{n-1} dr.
    """
    if p < 1:
        raise ConfigurationError(f"p must be >= 1, got {p}")
    if radial_rule is None:
        radial_rule = RadialQuadrature.gauss_legendre(128)
    b = domain.profile._values(quad.nodes)
    n = domain.dim
    # per-direction radial grid: reference nodes scaled by b(nu)
    r = b[:, None] * radial_rule.nodes[None, :]          # (Nnu, Nr)
    wr = b[:, None] * radial_rule.weights[None, :]
    pts = r[:, :, None] * quad.nodes[:, None, :]          # (Nnu, Nr, n)
    flat = pts.reshape(-1, n)
    dens = np.abs(f._eval(flat)) ** p \
        + np.sum(np.abs(f._gradient(flat)) ** p, axis=1)
    dens = dens.reshape(r.shape) * r ** (n - 1)
    radial = np.sum(dens * wr, axis=1)
    return float(np.dot(quad.weights, radial)) ** (1.0 / p)


def _fourier_grid(f, s, radial_rule):
    if radial_rule is not None:
        hi = max(hi for (_, hi, _) in f.fourier_panels(s))
        return radial_rule.on_interval(0.0, hi)
    ks, ws = [], []
    for lo, hi, n in f.fourier_panels(s):
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (hi - lo)
        ks.append(0.5 * (lo + hi) + half * x)
        ws.append(half * w)
    return np.concatenate(ks), np.concatenate(ws)


def ws2_norm_rn(f, s, radial_rule=None):
    """Fractional Sobolev norm on R^n from the radial Fourier modulus.

    ( area(S^{n-1}) * integral_0^inf (1+k^2)^s |Ff|(k)^2 k^{n-1} dk )^(1/2).
    """
    if s < 0:
        raise ConfigurationError(f"s must be >= 0, got {s}")
    k, w = _fourier_grid(f, s, radial_rule)
    modulus = f.fourier_radial_modulus(k)
    integrand = (1.0 + k ** 2) ** s * modulus ** 2 * k ** (f.dim - 1)
    return math.sqrt(sphere_area(f.dim) * float(np.dot(w, integrand)))


def _radial_physical_grid(f, oscillation=0.0):
    lo, hi = 0.0, f.decay_radius()
    if isinstance(f, ShellGaussian):
        lo, hi = f.support_interval()
    panel = 2.0 * f.radial_scale()
    if oscillation > 0.0:
        panel = min(panel, 8.0 * math.pi / oscillation)
    return _composite_rule(lo, hi, panel, nodes_per_panel=16)


def l2_norm_rn(f):
    """Physical-space L^2(R^n) norm of a decaying radial field."""
    r, w = _radial_physical_grid(f, getattr(f, "omega", 0.0))
    vals = f.radial_eval(r) ** 2 * r ** (f.dim - 1)
    return math.sqrt(sphere_area(f.dim) * float(np.dot(w, vals)))


def w12_norm_rn(f):
    """Physical-space W^1_2(R^n) norm of a decaying radial field.

    Equals the s=1 Fourier-side norm by Plancherel:
    |f|^2 + |grad f|^2 integrates to (1+k^2) |Ff|^2.
    """
    r, w = _radial_physical_grid(f, getattr(f, "omega", 0.0))
    vals = (f.radial_eval(r) ** 2 + f.radial_derivative(r) ** 2) \
        * r ** (f.dim - 1)
    return math.sqrt(sphere_area(f.dim) * float(np.dot(w, vals)))


# ----------------------------------------------------------------------
# the radial rescaling operator U

@dataclass(frozen=True)
class USample:
    """(U f)(rho, omega) = rho^{(n-1)/2} f(rho omega) on a product grid."""

    rho_nodes: np.ndarray
    rho_weights: np.ndarray
    values: np.ndarray          # (Nrho, Nsphere)
    norm: float                 # L^2((0, inf); b^n-weighted L^2(S))


def apply_U(surface, f, quad, rho_rule=None):
    """Sample U f over (0, inf) x S and return it with its weighted norm.

    The norm is sum_j w_j sum_i w_i b_i^n |(Uf)(rho_j, omega_i)|^2, which
    for the exact operator equals the squared L^2(R^n) norm of f.
    """
    if surface.rho != 1.0:
        raise ConfigurationError("apply_U expects the reference surface S")
    if not f.is_decaying:
        raise UnsupportedKindError(
            f"{f.kind} does not decay; U sample norm would diverge")
    profile = surface.profile
    n = surface.dim
    if rho_rule is None:
        r_max = f.decay_radius() / profile.c_low
        panel = min(1.0, 2.0 * f.radial_scale() / profile.c_high)
        rho, w_rho = _composite_rule(0.0, r_max, panel, nodes_per_panel=24)
    else:
        rho, w_rho = rho_rule
    b = profile._values(quad.nodes)
    # evaluate f(rho_j * b_i * nu_i) on the product grid
    radii = np.outer(rho, b)                          # (Nrho, Nnu)
    pts = radii[:, :, None] * quad.nodes[None, :, :]
    vals = f._eval(pts.reshape(-1, n)).reshape(radii.shape)
    u_vals = rho[:, None] ** ((n - 1) / 2.0) * vals
    weighted = np.dot(u_vals ** 2 * (b ** n)[None, :], quad.weights)
    norm = math.sqrt(float(np.dot(w_rho, weighted)))
    return USample(rho_nodes=rho, rho_weights=w_rho, values=u_vals,
                   norm=norm)
