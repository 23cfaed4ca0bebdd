"""Embedded-boundary solver for -lap f + f = u with trace data on a star domain.

The boundary value h is always supplied through a carrier field q with
h = trace of q, and the solve runs on the lifted unknown v = f - q with
homogeneous data:  (-lap + I) v = lap q - q + u,  v = 0 on the boundary.

The discretization is a Cartesian 5-point Laplacian with cut-cell
corrections at the boundary (Shortley-Weller distances, applied in the
symmetrized ghost-extrapolation form): each boundary-crossing stencil leg
of length theta*h contributes 1/(theta h^2) to the diagonal and nothing to
the right-hand side, which keeps the matrix symmetric positive definite so
a conjugate-gradient solve is certified.  Only continuity of the profile is
needed to locate the crossings by bisection, so cusped boundaries work.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, SolverError, UnsupportedKindError
from .star_geometry import PiecewiseConstantProfile
from .trace_ops import ExponentFit, fit_exponent

__all__ = [
    "DirichletProblem", "EmbeddedGrid", "GridSolution",
    "discretize", "solve_lifted", "convergence_study", "ConvergenceStudy",
]

_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_BISECTION_STEPS = 50
_THETA_FLOOR = 1.0e-6   # a crossing this close pins the node to the boundary


@dataclass(frozen=True)
class DirichletProblem:
    """Right-hand side u and boundary carrier q on a 2-d star domain."""

    domain: object
    u: object
    q: object

    def __post_init__(self):
        if self.domain.dim != 2:
            raise ConfigurationError("the solver is implemented for n = 2")


@dataclass(frozen=True)
class EmbeddedGrid:
    """Cartesian grid classification against the curved boundary.

    ``fractions[k, d]`` is the cut fraction theta in (0, 1] of interior
    node k along direction d (1 when the neighbor is interior too), and
    ``neighbors[k, d]`` the interior index of that neighbor or -1 across
    the boundary.  ``cut_points`` are the located boundary crossings.
    """

    h: float
    half_extent: int
    inside: np.ndarray
    index: np.ndarray
    points: np.ndarray
    neighbors: np.ndarray
    fractions: np.ndarray
    cut_points: np.ndarray

    @property
    def n_interior(self):
        return self.points.shape[0]

    def near_boundary_mask(self):
        return (self.fractions < 1.0).any(axis=1)

    def index_of(self, i, j):
        return int(self.index[i + self.half_extent, j + self.half_extent])


def _bisect_crossings(profile, base, step):
    """Boundary crossings on segments base + t*step, t in (0, 1]."""

    def signed(t):
        pts = base + t[:, None] * step
        r = np.linalg.norm(pts, axis=1)
        nu = pts / np.maximum(r, 1e-300)[:, None]
        return r - profile._values(nu)

    lo = np.zeros(base.shape[0])
    hi = np.ones(base.shape[0])
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        neg = signed(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    theta = 0.5 * (lo + hi)
    return np.maximum(theta, _THETA_FLOOR)


def discretize(domain, h):
    """Classify a Cartesian grid against the domain and cut its stencils."""
    profile = domain.profile
    if isinstance(profile, PiecewiseConstantProfile):
        raise UnsupportedKindError(
            "piecewise-constant profiles have no continuous boundary to cut")
    if h >= profile.c_low / 8.0:
        raise ConfigurationError(
            f"grid spacing {h} too coarse; need h < c_low/8 = "
            f"{profile.c_low / 8.0}")
    m = int(np.ceil(profile.c_high / h)) + 1
    coords = np.arange(-m, m + 1) * h
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    pts_all = np.column_stack([xx.ravel(), yy.ravel()])
    inside = domain.contains(pts_all).reshape(xx.shape)

    index = -np.ones(inside.shape, dtype=np.int64)
    index[inside] = np.arange(np.count_nonzero(inside))
    ii, jj = np.nonzero(inside)
    points = np.column_stack([coords[ii], coords[jj]])

    n = points.shape[0]
    neighbors = np.empty((n, 4), dtype=np.int64)
    fractions = np.ones((n, 4))
    cut_chunks = []
    for d, (di, dj) in enumerate(_DIRECTIONS):
        neighbors[:, d] = index[ii + di, jj + dj]
        cut = neighbors[:, d] < 0
        if cut.any():
            base = points[cut]
            step = h * np.array([di, dj], dtype=float)
            theta = _bisect_crossings(profile, base, step)
            fractions[cut, d] = theta
            cut_chunks.append(base + theta[:, None] * step)
    cut_points = np.vstack(cut_chunks) if cut_chunks else np.empty((0, 2))
    return EmbeddedGrid(h=h, half_extent=m, inside=inside, index=index,
                        points=points, neighbors=neighbors,
                        fractions=fractions, cut_points=cut_points)


def assemble_system(grid):
    """Sparse SPD matrix for (-lap_h + I) with zero boundary values."""
    n = grid.n_interior
    h2 = grid.h ** 2
    diag = 1.0 + np.sum(1.0 / (grid.fractions * h2), axis=1)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [diag]
    for d in range(4):
        linked = grid.neighbors[:, d] >= 0
        rows.append(np.flatnonzero(linked))
        cols.append(grid.neighbors[linked, d])
        vals.append(np.full(int(linked.sum()), -1.0 / h2))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    return mat.tocsr()


def _pcg_jacobi(mat, rhs, tol, max_iter):
    """Deterministic Jacobi-preconditioned conjugate gradient."""
    norm_rhs = float(np.linalg.norm(rhs))
    if norm_rhs == 0.0:
        return np.zeros_like(rhs), 0, 0.0
    inv_diag = 1.0 / mat.diagonal()
    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    for k in range(1, max_iter + 1):
        ap = mat @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        rel = float(np.linalg.norm(r)) / norm_rhs
        if rel <= tol:
            return x, k, rel
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"conjugate gradient did not reach {tol} in {max_iter} iterations",
        iterations=max_iter)


@dataclass(frozen=True)
class GridSolution:
    """Discrete solution f = v + q on the interior nodes."""

    grid: EmbeddedGrid
    v: np.ndarray
    f: np.ndarray
    iterations: int
    residual: float

    def value_at_origin(self):
        k = self.grid.index_of(0, 0)
        if k < 0:
            raise ConfigurationError("the origin is not an interior node")
        return float(self.f[k])

    def max_error_against(self, field):
        exact = field._eval(self.grid.points)
        return float(np.max(np.abs(self.f - exact)))


def solve_lifted(problem, h, tol=1.0e-10, max_iter=None):
    """Assemble and solve the lifted system, returning f = v + q."""
    grid = discretize(problem.domain, h)
    pts = grid.points
    q_vals = problem.q._eval(pts)
    rhs = problem.q._laplacian(pts) - q_vals + problem.u._eval(pts)
    mat = assemble_system(grid)
    if max_iter is None:
        max_iter = max(1000, 20 * grid.n_interior)
    v, iters, rel = _pcg_jacobi(mat, rhs, tol, max_iter)
    return GridSolution(grid=grid, v=v, f=v + q_vals, iterations=iters,
                        residual=rel)


@dataclass(frozen=True)
class ConvergenceStudy:
    hs: np.ndarray
    errors: np.ndarray
    fit: ExponentFit | None     # None in self-referenced (pure stability) mode
    monotone: bool


def _shared_node_error(coarse, fine):
    ratio = coarse.grid.h / fine.grid.h
    r = int(round(ratio))
    if abs(ratio - r) > 1e-9:
        raise ConfigurationError("grids are not nested; spacings must halve")
    mc, mf = coarse.grid.half_extent, fine.grid.half_extent
    idx_c = coarse.grid.index
    # coarse node (i, j) sits at fine node (r i, r j); compare where both
    # grids classify the node as interior
    ic, jc = np.nonzero(idx_c >= 0)
    fi = (ic - mc) * r + mf
    fj = (jc - mc) * r + mf
    ok = (fi >= 0) & (fi < 2 * mf + 1) & (fj >= 0) & (fj < 2 * mf + 1)
    idx_f = fine.grid.index[fi[ok], fj[ok]]
    both = idx_f >= 0
    cvals = coarse.f[idx_c[ic[ok][both], jc[ok][both]]]
    fvals = fine.f[idx_f[both]]
    return float(np.max(np.abs(cvals - fvals)))


def convergence_study(problem, hs, f_exact=None, tol=1.0e-10):
    """Solve across halving grids and fit the max-norm error order.

    With ``f_exact`` the error is measured against it and the log-log slope
    is returned; without it (rough boundaries have no manufactured smooth
    solution) the finest solve is the reference and only monotone decrease
    is reported.
    """
    hs = np.asarray(sorted(hs, reverse=True), dtype=float)
    if hs.size < 4:
        raise ConfigurationError("convergence study needs >= 4 grid levels")
    if not np.allclose(hs[:-1] / hs[1:], 2.0, rtol=1e-9):
        raise ConfigurationError("grid levels must halve the spacing")
    solutions = [solve_lifted(problem, float(h), tol=tol) for h in hs]
    if f_exact is not None:
        errors = np.asarray([s.max_error_against(f_exact) for s in solutions])
        fit = fit_exponent(hs, errors)
        return ConvergenceStudy(hs=hs, errors=errors, fit=fit,
                                monotone=bool(np.all(np.diff(errors) < 0)))
    reference = solutions[-1]
    errors = np.asarray([_shared_node_error(s, reference)
                         for s in solutions[:-1]])
    return ConvergenceStudy(hs=hs[:-1], errors=errors, fit=None,
                            monotone=bool(np.all(np.diff(errors) < 0)))
