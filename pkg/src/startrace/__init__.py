"""Measures, trace maps and coarea identities on rough star-shaped surfaces."""

from .errors import (ConfigurationError, EvaluationError, PrecisionWarning,
                     SolverError, UnsupportedKindError)
from .sphere_quad import (SphereQuadrature, build_sphere_quadrature,
                          integrate_sphere, sphere_area)
from .star_geometry import (BoundaryProfile, ConstantProfile, CuspProfile,
                            LipschitzProfile, PiecewiseConstantProfile,
                            SmoothTrigProfile, StarDomain, StarSurface,
                            eval_profile, integrate_surface, lift_Pinv,
                            lp_norm_boundary, profile_from_config,
                            profile_from_spec, project_P,
                            recommended_quadrature,
                            weighted_inner_product_L2b)
from .function_spaces import (Bump, ConstantField, CustomField, ExpLinear,
                              GaussianRadial, PolyGaussian,
                              RadialCosGaussian, RadialQuadrature,
                              ShellGaussian, TestFunction, apply_U,
                              helmholtz_residual, l2_norm_rn,
                              poly_gaussian_family, testfunction_from_config,
                              w12_norm_rn, w1p_norm_domain, ws2_norm_rn)
from .trace_ops import (ExponentFit, TraceSample, decay_experiment,
                        dyadic_deltas, fit_exponent, holder_experiment,
                        kernel_bound_K, kernel_regime_experiment,
                        trace_Tp, trace_Ts, trace_constant_experiment)
from .coarea import (CoareaReport, LevelFunction, classical_crosscheck_2d,
                     classical_volume_consistency, coarea_report,
                     dV_dlambda, integral_full_space, mc_volume_oracle,
                     volume_Vlambda)
from .dirichlet import (DirichletProblem, GridSolution, convergence_study,
                        discretize, solve_lifted)

__version__ = "0.1.0"
