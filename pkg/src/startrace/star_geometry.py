"""Boundary profiles b(nu), star-shaped surfaces/domains, pullback measures.

A star-shaped hypersurface is { rho * b(nu) * nu : nu in S^{n-1} } for a
positive angular profile b bounded away from 0 and infinity.  The surface
measure used throughout is the pullback of the sphere measure through the
radial bijection (times rho^{n-1} for scaled surfaces); it deliberately
ignores the area distortion of b, which is what makes rough profiles usable.

Profile kinds, from smoothest to roughest:

* ``constant``   b == c
* ``smoothtrig`` cosine series in the azimuth (n=2) / polar angle (n=3)
* ``lipschitz``  periodic piecewise-linear in theta (n=2) or in z (n=3)
* ``cusp``       c0 + geodesic_distance(nu, apex)^alpha, 0 < alpha < 1
* ``pwconst``    piecewise constant on equal-measure angular cells, values
                 either drawn by a seeded RNG from a range or given explicitly
"""

import numpy as np

from .errors import ConfigurationError, EvaluationError, UnsupportedKindError
from .sphere_quad import build_sphere_quadrature, integrate_sphere

__all__ = [
    "BoundaryProfile", "ConstantProfile", "SmoothTrigProfile",
    "LipschitzProfile", "CuspProfile", "PiecewiseConstantProfile",
    "StarSurface", "StarDomain",
    "eval_profile", "project_P", "lift_Pinv",
    "integrate_surface", "lp_norm_boundary", "weighted_inner_product_L2b",
    "recommended_quadrature", "profile_from_config", "profile_from_spec",
]

# default two-sided bound 0 < C < b < 1/C with C = 1/4
DEFAULT_VALUE_RANGE = (0.25, 4.0)


def _as_points(x, dim):
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise ConfigurationError(
            f"points have dimension {pts.shape[1]}, profile has {dim}")
    return pts, single


class BoundaryProfile:
    """Base class: positive angular function on S^{n-1} with known bounds."""

    kind = "abstract"

    def __init__(self, dim, c_low, c_high):
        if dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {dim}")
        if not (0.0 < c_low <= c_high):
            raise ConfigurationError(
                f"profile bounds must satisfy 0 < c_low <= c_high, "
                f"got [{c_low}, {c_high}]")
        self.dim = dim
        self.c_low = float(c_low)
        self.c_high = float(c_high)

    def _values(self, nu):
        raise NotImplementedError

    def eval(self, nu):
        """b at unit direction(s) nu; accepts (n,) or (N, n) arrays."""
        pts, single = _as_points(nu, self.dim)
        vals = self._values(pts)
        return float(vals[0]) if single else vals

    # equal-measure cell structure for grid alignment; None when smooth
    def cell_structure(self):
        return {}

    def to_config(self):
        raise NotImplementedError

    def __repr__(self):
        items = ", ".join(f"{k}={v!r}" for k, v in self.to_config().items()
                          if k != "kind")
        return f"{type(self).__name__}({items})"


class ConstantProfile(BoundaryProfile):
    kind = "constant"

    def __init__(self, dim, value):
        super().__init__(dim, value, value)
        self.value = float(value)

    def _values(self, pts):
        return np.full(pts.shape[0], self.value)

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "value": self.value}


class SmoothTrigProfile(BoundaryProfile):
    """b = sum_m a_m * cos(m * angle), i.e. a Chebyshev series in one axis.

    For n=2 the angle is the azimuth (cos(theta) = nu_x); for n=3 it is the
    polar angle (cos(theta) = nu_z).  The safe bounds a_0 -+ sum |a_m| are
    used for c_low/c_high, so positivity is guaranteed, not just sampled.
    """

    kind = "smoothtrig"

    def __init__(self, dim, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ConfigurationError("smoothtrig needs a 1-d coefficient list")
        tail = float(np.sum(np.abs(coeffs[1:])))
        super().__init__(dim, coeffs[0] - tail, coeffs[0] + tail)
        self.coeffs = coeffs

    def _axis_coordinate(self, pts):
        return pts[:, 0] if self.dim == 2 else pts[:, 2]

    def _values(self, pts):
        return np.polynomial.chebyshev.chebval(self._axis_coordinate(pts),
                                               self.coeffs)

    def theta_values(self, theta):
        """b(theta) for n=2 via the azimuth directly."""
        return np.polynomial.chebyshev.chebval(np.cos(theta), self.coeffs)

    def theta_derivative(self, theta):
        """db/dtheta for n=2: -sin(theta) * (dC/dx)(cos(theta))."""
        if self.dim != 2:
            raise UnsupportedKindError("theta derivative is n=2 only")
        der = np.polynomial.chebyshev.chebder(self.coeffs)
        return -np.sin(theta) * np.polynomial.chebyshev.chebval(
            np.cos(theta), der)

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim,
                "coeffs": [float(c) for c in self.coeffs]}


class LipschitzProfile(BoundaryProfile):
    """Piecewise-linear interpolation of values at equispaced knots.

    n=2: periodic knots theta_k = 2*pi*k/K.  n=3: knots at z = -1..1
    (axisymmetric), endpoint values held at the poles.
    """

    kind = "lipschitz"

    def __init__(self, dim, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ConfigurationError("lipschitz needs >= 2 knot values")
        super().__init__(dim, float(values.min()), float(values.max()))
        self.values = values

    def _values(self, pts):
        if self.dim == 2:
            theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
            k = self.values.size
            knots = np.arange(k + 1) * (2.0 * np.pi / k)
            vals = np.append(self.values, self.values[0])  # periodic wrap
            return np.interp(theta, knots, vals)
        z = np.clip(pts[:, 2], -1.0, 1.0)
        knots = np.linspace(-1.0, 1.0, self.values.size)
        return np.interp(z, knots, self.values)

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim,
                "values": [float(v) for v in self.values]}


class CuspProfile(BoundaryProfile):
    """b = c0 + d(nu, apex)^alpha with geodesic distance d; 0 < alpha < 1.

    Continuous but not Lipschitz at the apex.  The apex sits at azimuth
    theta0 (in the equatorial plane for n=3).
    """

    kind = "cusp"

    def __init__(self, dim, c0, theta0, alpha):
        if not 0.0 < alpha < 1.0:
            raise ConfigurationError(f"cusp needs 0 < alpha < 1, got {alpha}")
        if c0 <= 0.0:
            raise ConfigurationError(f"cusp needs c0 > 0, got {c0}")
        super().__init__(dim, c0, c0 + np.pi ** alpha)
        self.c0 = float(c0)
        self.theta0 = float(theta0)
        self.alpha = float(alpha)
        apex = [np.cos(self.theta0), np.sin(self.theta0)]
        if dim == 3:
            apex.append(0.0)
        self.apex = np.array(apex)

    def _values(self, pts):
        dot = np.clip(pts @ self.apex, -1.0, 1.0)
        return self.c0 + np.arccos(dot) ** self.alpha

    def to_config(self):
        return {"kind": self.kind, "dim": self.dim, "c0": self.c0,
                "theta0": self.theta0, "alpha": self.alpha}


class PiecewiseConstantProfile(BoundaryProfile):
    """Piecewise-constant b on equal-measure cells; the rough-profile stand-in.

    n=2: ``cells`` equal angular sectors.  n=3: ``cells`` equal-width bands
    in z = cos(theta) times ``2 * cells`` sectors in phi (equal-area cells).
    Cell values come from a seeded uniform draw over ``value_range``, or are
    given explicitly via ``values`` (row-major z-band x phi-sector for n=3).
    """

    kind = "pwconst"

    def __init__(self, dim, cells=None, seed=None, value_range=None,
                 values=None):
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.ndim != 1:
                raise ConfigurationError("explicit cell values must be 1-d")
            if cells is None:
                if dim == 3:
                    raise ConfigurationError(
                        "n=3 explicit values need the cells (z-band) count")
                cells = values.size
            expected = cells if dim == 2 else cells * 2 * cells
            if values.size != expected:
                raise ConfigurationError(
                    f"expected {expected} cell values, got {values.size}")
            if values.min() <= 0.0:
                raise ConfigurationError("cell values must be positive")
            super().__init__(dim, float(values.min()), float(values.max()))
            self.seed = None
            self.value_range = None
        else:
            if cells is None or cells < 1:
                raise ConfigurationError("pwconst needs cells >= 1")
            if seed is None:
                raise ConfigurationError("random pwconst needs a seed")
            lo, hi = value_range if value_range is not None \
                else DEFAULT_VALUE_RANGE
            if not 0.0 < lo <= hi:
                raise ConfigurationError(
                    f"value range must satisfy 0 < lo <= hi, got [{lo}, {hi}]")
            super().__init__(dim, lo, hi)
            count = cells if dim == 2 else cells * 2 * cells
            rng = np.random.default_rng(seed)
            values = rng.uniform(lo, hi, size=count)
            self.seed = int(seed)
            self.value_range = (float(lo), float(hi))
        self.cells = int(cells)
        self.values = values

    def _cell_index(self, pts):
        if self.dim == 2:
            theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
            return np.minimum((theta * self.cells / (2.0 * np.pi)).astype(int),
                              self.cells - 1)
        n_phi = 2 * self.cells
        z = np.clip(pts[:, 2], -1.0, 1.0)
        iz = np.minimum(((z + 1.0) * 0.5 * self.cells).astype(int),
                        self.cells - 1)
        phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
        ip = np.minimum((phi * n_phi / (2.0 * np.pi)).astype(int), n_phi - 1)
        return iz * n_phi + ip

    def _values(self, pts):
        return self.values[self._cell_index(pts)]

    def cell_structure(self):
        if self.dim == 2:
            return {"theta_cells": self.cells}
        return {"z_bands": self.cells, "phi_cells": 2 * self.cells}

    def cell_measures(self):
        """Pullback measure of each cell, aligned with ``values`` order."""
        if self.dim == 2:
            return np.full(self.cells, 2.0 * np.pi / self.cells)
        n_phi = 2 * self.cells
        return np.full(self.cells * n_phi,
                       (2.0 / self.cells) * (2.0 * np.pi / n_phi))

    def to_config(self):
        cfg = {"kind": self.kind, "dim": self.dim, "cells": self.cells}
        if self.seed is not None:
            cfg["seed"] = self.seed
            cfg["value_range"] = [self.value_range[0], self.value_range[1]]
        else:
            cfg["values"] = [float(v) for v in self.values]
        return cfg


_PROFILE_KINDS = {
    "constant": ConstantProfile,
    "smoothtrig": SmoothTrigProfile,
    "lipschitz": LipschitzProfile,
    "cusp": CuspProfile,
    "pwconst": PiecewiseConstantProfile,
}


def profile_from_config(cfg):
    """Rebuild a profile from its ``to_config()`` dictionary."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind not in _PROFILE_KINDS:
        raise ConfigurationError(f"unknown profile kind: {kind!r}")
    try:
        if kind == "pwconst" and "value_range" in cfg:
            cfg["value_range"] = tuple(cfg["value_range"])
        return _PROFILE_KINDS[kind](**cfg)
    except TypeError as exc:
        raise ConfigurationError(f"bad profile config for {kind}: {exc}")


def profile_from_spec(spec, dim):
    """Parse a compact command-line profile spec.

    Grammar: ``kind:comma-separated-params``, e.g. ``constant:1``,
    ``smoothtrig:1,0.3``, ``lipschitz:0.8,1.2,1.0``, ``cusp:1,0,0.5``,
    ``pwconst:8,42,0.5,2`` (cells, seed, lo, hi) and
    ``pwvalues:1,2`` (explicit cell values, n=2 style).
    """
    kind, _, params = spec.partition(":")
    try:
        vals = [float(p) for p in params.split(",")] if params else []
    except ValueError:
        raise ConfigurationError(f"non-numeric profile parameters in {spec!r}")
    if kind == "constant" and len(vals) == 1:
        return ConstantProfile(dim, vals[0])
    if kind == "smoothtrig" and vals:
        return SmoothTrigProfile(dim, vals)
    if kind == "lipschitz" and len(vals) >= 2:
        return LipschitzProfile(dim, vals)
    if kind == "cusp" and len(vals) == 3:
        return CuspProfile(dim, vals[0], vals[1], vals[2])
    if kind == "pwconst" and len(vals) == 4:
        return PiecewiseConstantProfile(dim, cells=int(vals[0]),
                                        seed=int(vals[1]),
                                        value_range=(vals[2], vals[3]))
    if kind == "pwvalues" and vals:
        if dim != 2:
            raise ConfigurationError("pwvalues spec is n=2 only")
        return PiecewiseConstantProfile(dim, values=vals)
    raise ConfigurationError(f"cannot parse profile spec {spec!r}")


def eval_profile(profile, nu):
    """b(nu); total on the sphere, deterministic for seeded kinds."""
    return profile.eval(nu)


class StarSurface:
    """S_rho = { rho * b(nu) * nu }; rho=1 gives the reference surface S."""

    def __init__(self, profile, rho=1.0):
        if rho <= 0.0:
            raise ConfigurationError(f"surface scale must be > 0, got {rho}")
        self.profile = profile
        self.rho = float(rho)

    @property
    def dim(self):
        return self.profile.dim


class StarDomain:
    """Bounded open domain { |x| < b(x/|x|) } for a continuous-type profile."""

    def __init__(self, profile):
        self.profile = profile

    @property
    def dim(self):
        return self.profile.dim

    def contains(self, x):
        """Membership mask; the origin is always inside (b > 0)."""
        pts, single = _as_points(x, self.dim)
        r = np.linalg.norm(pts, axis=1)
        inside = np.empty(pts.shape[0], dtype=bool)
        at_origin = r == 0.0
        inside[at_origin] = True
        if (~at_origin).any():
            nu = pts[~at_origin] / r[~at_origin, None]
            inside[~at_origin] = r[~at_origin] < self.profile._values(nu)
        return bool(inside[0]) if single else inside

    def boundary_surface(self):
        return StarSurface(self.profile, rho=1.0)


def project_P(surface, omega):
    """Radial projection omega -> omega/|omega| onto S^{n-1}."""
    pts, single = _as_points(omega, surface.dim)
    r = np.linalg.norm(pts, axis=1)
    if (r == 0.0).any():
        raise EvaluationError("cannot project the origin onto the sphere")
    nu = pts / r[:, None]
    return nu[0] if single else nu


def lift_Pinv(surface, nu):
    """Inverse of the projection: nu -> rho * b(nu) * nu on the surface."""
    pts, single = _as_points(nu, surface.dim)
    radii = surface.rho * surface.profile._values(pts)
    out = radii[:, None] * pts
    return out[0] if single else out


def surface_points(surface, quad):
    return lift_Pinv(surface, quad.nodes)


def integrate_surface(surface, quad, f):
    """Pullback integral over S_rho: rho^{n-1} * sum w_i f(rho b(nu_i) nu_i).

    The rho^{n-1} factor is the scaled-surface measure; it is 1 on the
    reference surface and on domain boundaries.
    """
    pts = surface_points(surface, quad)
    scale = surface.rho ** (surface.dim - 1)
    return scale * integrate_sphere(quad, lambda nodes: f(pts))


def lp_norm_boundary(surface, quad, f, p):
    """L^p norm in the pullback measure: (integral of |f|^p)^(1/p)."""
    if p < 1:
        raise ConfigurationError(f"p must be >= 1, got {p}")
    val = integrate_surface(surface, quad, lambda pts: np.abs(f(pts)) ** p)
    return val ** (1.0 / p)


def weighted_inner_product_L2b(surface, quad, f, g):
    """Inner product with weight b^n; defined on the reference surface."""
    if surface.rho != 1.0:
        raise ConfigurationError("the b^n-weighted space lives on S (rho=1)")
    pts = surface_points(surface, quad)
    b = surface.profile._values(quad.nodes)
    vals = np.asarray(f(pts)) * np.conj(np.asarray(g(pts))) \
        * b ** surface.dim
    vals = np.broadcast_to(vals, (quad.size,))
    out = np.dot(quad.weights, vals)
    return float(out.real) if np.isrealobj(vals) else complex(out)


def recommended_quadrature(profile, resolution):
    """Grid matched to the profile: cell-aligned for pwconst, plain otherwise."""
    return build_sphere_quadrature(profile.dim, resolution,
                                   **profile.cell_structure())
