"""Quadrature grids and integration on the unit sphere S^{n-1}, n in {2, 3}.

Every surface measure in the package is a pullback of the Lebesgue measure
on the unit sphere, so these grids are the substrate for all integrals.
Azimuthal nodes are equispaced with a half-cell offset (midpoint variant of
the periodic trapezoid rule, same spectral accuracy): the offset keeps nodes
strictly away from the equal-angle cell boundaries used by piecewise-constant
boundary profiles.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EvaluationError

__all__ = [
    "SphereQuadrature",
    "build_sphere_quadrature",
    "integrate_sphere",
    "sphere_area",
]

MIN_RESOLUTION = 4


def sphere_area(dim):
    """Total measure of S^{dim-1}: 2*pi for dim=2, 4*pi for dim=3."""
    if dim == 2:
        return 2.0 * np.pi
    if dim == 3:
        return 4.0 * np.pi
    raise ConfigurationError(f"dim must be 2 or 3, got {dim}")


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes and weights on S^{n-1}.

    Attributes
    ----------
    dim : int
        Ambient dimension n (2 or 3); nodes live on S^{n-1}.
    nodes : ndarray, shape (N, n)
        Unit direction vectors.
    weights : ndarray, shape (N,)
        Positive weights summing to the sphere area.
    exact_degree : int
        Spherical polynomials up to this degree are integrated exactly.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    @property
    def size(self):
        return self.weights.shape[0]

    def refined(self, factor=2):
        """Same construction at ``factor`` times the base resolution."""
        return build_sphere_quadrature(
            self.dim,
            self._resolution * factor,
            theta_cells=self._theta_cells,
            z_bands=self._z_bands,
            phi_cells=self._phi_cells,
        )

    # construction parameters, kept for refined(); set by the builder
    _resolution: int = 0
    _theta_cells: int | None = None
    _z_bands: int | None = None
    _phi_cells: int | None = None


def _round_up_multiple(value, base):
    return int(base * -(-value // base))


def _circle_nodes(count):
    # midpoint offset: never hits theta = 2*pi*k/count for integer k
    theta = (np.arange(count) + 0.5) * (2.0 * np.pi / count)
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    weights = np.full(count, 2.0 * np.pi / count)
    return nodes, weights


def _gauss_legendre_bands(n_per_band, edges):
    """Composite Gauss-Legendre nodes/weights for z on the given band edges."""
    x, w = np.polynomial.legendre.leggauss(n_per_band)
    zs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        zs.append(0.5 * (lo + hi) + half * x)
        ws.append(half * w)
    return np.concatenate(zs), np.concatenate(ws)


def build_sphere_quadrature(dim, resolution, theta_cells=None, z_bands=None,
                            phi_cells=None):
    """Build a deterministic quadrature grid on S^{dim-1}.

    dim=2: equispaced (half-offset) rule with ``resolution`` nodes on the
    circle, exact for trigonometric polynomials of degree ``resolution - 1``.
    dim=3: Gauss-Legendre in cos(theta) (``resolution`` nodes) times the
    equispaced rule in phi (``2 * resolution`` nodes), exact for spherical
    polynomials of degree ``2 * resolution - 1``.

    ``theta_cells`` (dim=2) / ``z_bands``, ``phi_cells`` (dim=3) align the
    grid with equal-measure cells of a piecewise-constant integrand: node
    counts are rounded up to a multiple of the cell count, and for dim=3 the
    Gauss-Legendre rule is applied per z-band, so cellwise-constant functions
    are integrated exactly.
    """
    if dim not in (2, 3):
        raise ConfigurationError(f"dim must be 2 or 3, got {dim}")
    if resolution < MIN_RESOLUTION:
        raise ConfigurationError(
            f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")

    if dim == 2:
        count = resolution
        if theta_cells:
            count = _round_up_multiple(count, theta_cells)
        nodes, weights = _circle_nodes(count)
        exact_degree = count - 1
    else:
        n_z = resolution
        if z_bands:
            per_band = -(-resolution // z_bands)
            edges = np.linspace(-1.0, 1.0, z_bands + 1)
            z, wz = _gauss_legendre_bands(per_band, edges)
            # per-band rule is exact for polynomials of degree 2*per_band - 1
            exact_degree = 2 * per_band - 1
        else:
            z, wz = np.polynomial.legendre.leggauss(n_z)
            exact_degree = 2 * n_z - 1
        n_phi = 2 * resolution
        if phi_cells:
            n_phi = _round_up_multiple(n_phi, phi_cells)
        phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
        exact_degree = min(exact_degree, n_phi - 1)
        s = np.sqrt(1.0 - z ** 2)
        # outer product ordering: z-major, phi-minor, fixed for determinism
        nodes = np.column_stack([
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.outer(z, np.ones(n_phi)).ravel(),
        ])
        weights = np.outer(wz, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()

    quad = SphereQuadrature(dim=dim, nodes=nodes, weights=weights,
                            exact_degree=exact_degree,
                            _resolution=resolution, _theta_cells=theta_cells,
                            _z_bands=z_bands, _phi_cells=phi_cells)
    return quad


def integrate_sphere(quad, g):
    """Integrate ``g`` over S^{n-1}: sum of w_i * g(nu_i).

    ``g`` takes an (N, n) array of unit vectors and returns (N,) values
    (scalars broadcast). Raises EvaluationError with the offending node
    index if any value is not finite.
    """
    values = np.broadcast_to(np.asarray(g(quad.nodes), dtype=float),
                             (quad.size,))
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise EvaluationError(
            f"integrand not finite at node {idx}: {values[idx]}",
            node_index=idx)
    # fixed-order reduction keeps results bit-identical between runs
    return float(np.dot(quad.weights, values))
