import numpy as np
import pytest

from startrace.errors import ConfigurationError, EvaluationError
from startrace.sphere_quad import build_sphere_quadrature, sphere_area
from startrace.star_geometry import (ConstantProfile, CuspProfile,
                                     LipschitzProfile,
                                     PiecewiseConstantProfile,
                                     SmoothTrigProfile, StarDomain,
                                     StarSurface, eval_profile,
                                     integrate_surface, lift_Pinv,
                                     lp_norm_boundary, profile_from_config,
                                     profile_from_spec, project_P,
                                     recommended_quadrature,
                                     weighted_inner_product_L2b)


def all_profile_kinds(dim):
    return [
        ConstantProfile(dim, 1.0),
        SmoothTrigProfile(dim, [1.0, 0.3]),
        LipschitzProfile(dim, [0.8, 1.2, 1.0, 0.9]),
        CuspProfile(dim, 1.0, 0.0, 0.5),
        PiecewiseConstantProfile(dim, cells=8 if dim == 2 else 4, seed=42,
                                 value_range=(0.5, 2.0)),
    ]


def random_directions(dim, count, seed=0):
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=(count, dim))
    return vec / np.linalg.norm(vec, axis=1, keepdims=True)


# ----------------------------------------------------------------------
# profiles

def test_constant_profile_value():
    prof = ConstantProfile(2, 1.0)
    assert eval_profile(prof, np.array([0.0, 1.0])) == 1.0


def test_cusp_value_at_antipode():
    prof = CuspProfile(2, 1.0, 0.0, 0.5)
    val = eval_profile(prof, np.array([-1.0, 0.0]))
    assert val == pytest.approx(1.0 + np.pi ** 0.5, abs=1e-14)


def test_pwconst_deterministic():
    nu = random_directions(2, 50, seed=3)
    a = PiecewiseConstantProfile(2, cells=8, seed=42, value_range=(0.5, 2.0))
    b = PiecewiseConstantProfile(2, cells=8, seed=42, value_range=(0.5, 2.0))
    assert (a.eval(nu) == b.eval(nu)).all()


@pytest.mark.parametrize("dim", [2, 3])
def test_profile_values_within_bounds(dim):
    nu = random_directions(dim, 500, seed=11)
    for prof in all_profile_kinds(dim):
        vals = prof.eval(nu)
        assert (vals >= prof.c_low - 1e-14).all()
        assert (vals <= prof.c_high + 1e-14).all()
        assert prof.c_low > 0


def test_smoothtrig_positivity_guard():
    with pytest.raises(ConfigurationError):
        SmoothTrigProfile(2, [0.5, 0.7])   # conservative lower bound <= 0


def test_explicit_two_value_profile():
    prof = PiecewiseConstantProfile(2, values=[1.0, 2.0])
    assert prof.eval(np.array([np.cos(1.0), np.sin(1.0)])) == 1.0
    assert prof.eval(np.array([np.cos(4.0), np.sin(4.0)])) == 2.0


# ----------------------------------------------------------------------
# projection and lift

def test_projection_normalizes():
    surf = StarSurface(ConstantProfile(2, 1.0))
    assert project_P(surf, np.array([3.0, 4.0])) == pytest.approx([0.6, 0.8])


def test_projection_rejects_origin():
    surf = StarSurface(ConstantProfile(2, 1.0))
    with pytest.raises(EvaluationError):
        project_P(surf, np.zeros(2))


def test_lift_examples():
    assert lift_Pinv(StarSurface(ConstantProfile(2, 1.0)),
                     np.array([1.0, 0.0])) == pytest.approx([1.0, 0.0])
    assert lift_Pinv(StarSurface(ConstantProfile(2, 2.0), rho=3.0),
                     np.array([0.0, 1.0])) == pytest.approx([0.0, 6.0])


@pytest.mark.parametrize("dim", [2, 3])
def test_round_trips(dim):
    nu = random_directions(dim, 100, seed=7)
    for prof in all_profile_kinds(dim):
        surf = StarSurface(prof, rho=1.7)
        omega = lift_Pinv(surf, nu)
        back = project_P(surf, omega)
        assert np.max(np.abs(back - nu)) < 1e-12
        # surface points satisfy |omega| = rho b(omega/|omega|)
        radii = np.linalg.norm(omega, axis=1)
        assert np.max(np.abs(radii - surf.rho * prof.eval(back))) < 1e-12


def test_cusp_lift_consistency():
    prof = CuspProfile(2, 1.0, 0.3, 0.5)
    surf = StarSurface(prof, rho=2.0)
    nu = random_directions(2, 20, seed=1)
    radii = np.linalg.norm(lift_Pinv(surf, nu), axis=1)
    assert radii == pytest.approx(2.0 * prof.eval(nu))


# ----------------------------------------------------------------------
# pullback integrals

@pytest.mark.parametrize("dim", [2, 3])
def test_pullback_total_measure_blind_to_profile(dim):
    for prof in all_profile_kinds(dim):
        quad = recommended_quadrature(prof, 64 if dim == 2 else 16)
        total = integrate_surface(StarSurface(prof), quad,
                                  lambda pts: np.ones(len(pts)))
        assert abs(total - sphere_area(dim)) < 1e-12


def test_scaled_surface_measure():
    quad = build_sphere_quadrature(3, 16)
    surf = StarSurface(ConstantProfile(3, 1.0), rho=2.0)
    total = integrate_surface(surf, quad, lambda pts: np.ones(len(pts)))
    assert abs(total - 16.0 * np.pi) < 1e-11


def test_pwconst_quadrature_cellwise_exact():
    prof = PiecewiseConstantProfile(2, cells=8, seed=42,
                                    value_range=(0.5, 2.0))
    oracle = float(np.dot(prof.cell_measures(), prof.values ** 2))
    for res in (64, 128, 256):
        quad = recommended_quadrature(prof, res)
        val = integrate_surface(StarSurface(prof), quad,
                                lambda pts: np.sum(pts ** 2, axis=1))
        assert val == pytest.approx(oracle, abs=1e-12)


def test_pwconst_quadrature_cellwise_exact_3d():
    prof = PiecewiseConstantProfile(3, cells=4, seed=9,
                                    value_range=(0.5, 2.0))
    oracle = float(np.dot(prof.cell_measures(), prof.values ** 3))
    for res in (16, 32):
        quad = recommended_quadrature(prof, res)
        val = integrate_surface(StarSurface(prof), quad,
                                lambda pts: np.linalg.norm(pts, axis=1) ** 3)
        assert val == pytest.approx(oracle, rel=1e-13)


def test_indicator_additivity_exact():
    prof = PiecewiseConstantProfile(2, cells=8, seed=42,
                                    value_range=(0.5, 2.0))
    quad = recommended_quadrature(prof, 64)
    surf = StarSurface(prof)

    def cell_indicator(cells):
        def f(pts):
            theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
            idx = np.minimum((theta * 8 / (2 * np.pi)).astype(int), 7)
            return np.isin(idx, cells).astype(float)
        return f

    separate = sum(integrate_surface(surf, quad, cell_indicator([c]))
                   for c in (1, 4, 6))
    union = integrate_surface(surf, quad, cell_indicator([1, 4, 6]))
    assert union == separate


# ----------------------------------------------------------------------
# boundary norms and the weighted inner product

def test_lp_norm_constant():
    quad = build_sphere_quadrature(2, 64)
    surf = StarSurface(ConstantProfile(2, 1.0))
    norm = lp_norm_boundary(surf, quad, lambda pts: np.ones(len(pts)), 2)
    assert norm == pytest.approx(np.sqrt(2 * np.pi), abs=1e-13)
    norm1 = lp_norm_boundary(surf, quad,
                             lambda pts: -3.0 * np.ones(len(pts)), 1)
    assert norm1 == pytest.approx(3.0 * 2 * np.pi, abs=1e-12)


def test_lp_norm_homogeneity():
    prof = CuspProfile(2, 1.0, 0.0, 0.5)
    quad = build_sphere_quadrature(2, 64)
    surf = StarSurface(prof)
    f = lambda pts: np.sin(pts[:, 0]) + 0.2
    base = lp_norm_boundary(surf, quad, f, 3)
    scaled = lp_norm_boundary(surf, quad, lambda pts: -2.5 * f(pts), 3)
    assert scaled == pytest.approx(2.5 * base, rel=1e-14)


def test_lp_norm_requires_p_at_least_one():
    quad = build_sphere_quadrature(2, 16)
    surf = StarSurface(ConstantProfile(2, 1.0))
    with pytest.raises(ConfigurationError):
        lp_norm_boundary(surf, quad, lambda pts: np.ones(len(pts)), 0.5)


def test_weighted_inner_product_values():
    quad = build_sphere_quadrature(2, 64)
    one = lambda pts: np.ones(len(pts))
    assert weighted_inner_product_L2b(
        StarSurface(ConstantProfile(2, 2.0)), quad, one, one) \
        == pytest.approx(8 * np.pi, abs=1e-11)
    assert weighted_inner_product_L2b(
        StarSurface(ConstantProfile(2, 1.0)), quad, one, one) \
        == pytest.approx(2 * np.pi, abs=1e-12)


def test_weighted_norm_equivalence():
    prof = PiecewiseConstantProfile(2, cells=8, seed=5,
                                    value_range=(0.5, 2.0))
    quad = recommended_quadrature(prof, 64)
    surf = StarSurface(prof)
    rng = np.random.default_rng(8)
    coeff = rng.normal(size=3)

    def f(pts):
        return coeff[0] + coeff[1] * pts[:, 0] + coeff[2] * pts[:, 1] ** 2

    plain = lp_norm_boundary(surf, quad, f, 2) ** 2
    weighted = weighted_inner_product_L2b(surf, quad, f, f)
    n = prof.dim
    assert prof.c_low ** n * plain <= weighted + 1e-12
    assert weighted <= prof.c_high ** n * plain + 1e-12


def test_weighted_inner_product_needs_reference_surface():
    quad = build_sphere_quadrature(2, 16)
    one = lambda pts: np.ones(len(pts))
    with pytest.raises(ConfigurationError):
        weighted_inner_product_L2b(StarSurface(ConstantProfile(2, 1.0), 2.0),
                                   quad, one, one)


# ----------------------------------------------------------------------
# domains and serialization

def test_domain_membership_bounds():
    prof = PiecewiseConstantProfile(2, cells=8, seed=42,
                                    value_range=(0.5, 2.0))
    dom = StarDomain(prof)
    rng = np.random.default_rng(0)
    nu = random_directions(2, 200, seed=2)
    inner = nu * rng.uniform(0.0, prof.c_low, size=(200, 1))
    outer = nu * rng.uniform(prof.c_high + 1e-9, 3.0, size=(200, 1))
    assert dom.contains(inner).all()
    assert not dom.contains(outer).any()
    assert dom.contains(np.zeros(2))


@pytest.mark.parametrize("dim", [2, 3])
def test_profile_config_round_trip(dim):
    nu = random_directions(dim, 64, seed=4)
    for prof in all_profile_kinds(dim):
        clone = profile_from_config(prof.to_config())
        assert type(clone) is type(prof)
        assert (clone.eval(nu) == prof.eval(nu)).all()
        assert clone.c_low == prof.c_low and clone.c_high == prof.c_high


def test_profile_specs_parse():
    assert isinstance(profile_from_spec("constant:1", 2), ConstantProfile)
    assert isinstance(profile_from_spec("smoothtrig:1,0.3", 2),
                      SmoothTrigProfile)
    assert isinstance(profile_from_spec("lipschitz:0.8,1.2,1.0", 2),
                      LipschitzProfile)
    assert isinstance(profile_from_spec("cusp:1,0,0.5", 3), CuspProfile)
    pw = profile_from_spec("pwconst:8,42,0.5,2", 2)
    assert isinstance(pw, PiecewiseConstantProfile) and pw.seed == 42
    two = profile_from_spec("pwvalues:1,2", 2)
    assert (two.values == [1.0, 2.0]).all()
    for bad in ("unknown:1", "cusp:1", "constant:a", "pwvalues:1,2|dim3"):
        with pytest.raises(ConfigurationError):
            profile_from_spec(bad, 3 if "dim3" in bad else 2)
