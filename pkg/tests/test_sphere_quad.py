import numpy as np
import pytest

from startrace.errors import ConfigurationError, EvaluationError
from startrace.sphere_quad import (build_sphere_quadrature, integrate_sphere,
                                   sphere_area)


def double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def exact_monomial_integral(dim, exponents):
    """Closed-form sphere integral of x^a y^b (z^c), the exactness oracle."""
    if any(e % 2 for e in exponents):
        return 0.0
    num = 1
    for e in exponents:
        num *= double_factorial(e - 1)
    total = sum(exponents)
    if dim == 2:
        return 2.0 * np.pi * num / double_factorial(total)
    return 4.0 * np.pi * num / double_factorial(total + 1)


@pytest.mark.parametrize("dim,resolution", [(2, 64), (2, 100), (3, 16),
                                            (3, 25)])
def test_total_measure(dim, resolution):
    quad = build_sphere_quadrature(dim, resolution)
    assert abs(np.sum(quad.weights) - sphere_area(dim)) < 1e-12
    assert (quad.weights > 0).all()


def test_nodes_are_unit_vectors():
    for dim, res in ((2, 37), (3, 12)):
        quad = build_sphere_quadrature(dim, res)
        radii = np.linalg.norm(quad.nodes, axis=1)
        assert np.max(np.abs(radii - 1.0)) < 1e-12


def test_cos_squared_integral():
    quad = build_sphere_quadrature(2, 64)
    assert abs(integrate_sphere(quad, lambda nu: nu[:, 0] ** 2)
               - np.pi) < 1e-12


def test_z_squared_on_sphere():
    quad = build_sphere_quadrature(3, 16)
    val = integrate_sphere(quad, lambda nu: nu[:, 2] ** 2)
    assert abs(val - 4.0 * np.pi / 3.0) < 1e-12


def test_upper_half_indicator_exact():
    # the half-offset grid never samples the discontinuity, so the cell
    # counts are exact and the integral is pi to machine precision
    quad = build_sphere_quadrature(2, 64)
    val = integrate_sphere(quad, lambda nu: (nu[:, 1] > 0).astype(float))
    assert val == pytest.approx(np.pi, abs=1e-14)


@pytest.mark.parametrize("dim,resolution", [(2, 16), (2, 33), (3, 8),
                                            (3, 13)])
def test_polynomial_exactness(dim, resolution):
    rng = np.random.default_rng(5)
    quad = build_sphere_quadrature(dim, resolution)
    degree = min(quad.exact_degree, 8)
    for _ in range(20):
        exponents = rng.integers(0, degree + 1, size=dim)
        while sum(exponents) > degree:
            exponents = rng.integers(0, degree + 1, size=dim)
        monomial = lambda nu: np.prod(nu ** exponents, axis=1)
        expected = exact_monomial_integral(dim, tuple(exponents))
        assert integrate_sphere(quad, monomial) == pytest.approx(
            expected, abs=1e-10)


def test_refinement_monotonicity_smooth():
    smooth = lambda nu: np.exp(nu[:, 0] + 0.3 * nu[:, 1])
    errors = []
    reference = integrate_sphere(build_sphere_quadrature(2, 512), smooth)
    for res in (8, 16, 32):
        errors.append(abs(integrate_sphere(build_sphere_quadrature(2, res),
                                           smooth) - reference))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-12


def test_deterministic_generation():
    a = build_sphere_quadrature(3, 20)
    b = build_sphere_quadrature(3, 20)
    assert (a.nodes == b.nodes).all()
    assert (a.weights == b.weights).all()


def test_cell_aligned_counts():
    quad = build_sphere_quadrature(2, 60, theta_cells=8)
    assert quad.size % 8 == 0
    # nodes stay strictly interior to the equal-angle cells
    theta = np.mod(np.arctan2(quad.nodes[:, 1], quad.nodes[:, 0]),
                   2 * np.pi)
    frac = theta * 8 / (2 * np.pi)
    assert np.min(np.abs(frac - np.round(frac))) > 1e-3


def test_resolution_too_small():
    with pytest.raises(ConfigurationError):
        build_sphere_quadrature(2, 3)
    with pytest.raises(ConfigurationError):
        build_sphere_quadrature(4, 16)


def test_nonfinite_integrand_reports_node():
    quad = build_sphere_quadrature(2, 8)

    def bad(nu):
        vals = np.ones(len(nu))
        vals[3] = np.inf
        return vals

    with pytest.raises(EvaluationError) as err:
        integrate_sphere(quad, bad)
    assert err.value.node_index == 3
