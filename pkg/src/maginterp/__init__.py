"""Magnetic interpolation inequalities: sharp constants, bound curves and
Keller-Lieb-Thirring eigenvalue estimates for constant magnetic fields."""

__version__ = "0.1.0"

from .bounds import (mu_gauss, mu_interp, mu_LT, nu_gauss, nu_interp, nu_LT, xi_constant_field,
                     xi_lower_bound)
from .curves import BoundCurve, evaluate_curve, invert_curve
from .el_solver import ELPoint, build_curve, nu_el_at_beta, solve_mu_el, solve_nu_el
from .errors import MagInterpError
from .ground_states import GNConstants, ProblemParams, compute_C_p, compute_S_p, xi_zero_field
from .klt import (KLTBound, PotentialGrid, gibbs_integral, klt_case_i, klt_case_ii, klt_case_iii,
                  klt_threshold_case, lq_norm_inverse, lq_norm_negative_part, lq_plus_norm)
from .profiles import RadialProfile, SolverConfig
from .stability import StabilityConfig, lowest_c1_eigenvalue, quadratic_form_check

__all__ = [
    "__version__", "ProblemParams", "GNConstants", "compute_C_p", "compute_S_p", "xi_zero_field",
    "mu_interp", "mu_LT", "mu_gauss", "nu_interp", "nu_LT", "nu_gauss", "xi_constant_field",
    "xi_lower_bound", "BoundCurve", "evaluate_curve", "invert_curve", "ELPoint", "solve_mu_el",
    "solve_nu_el", "nu_el_at_beta", "build_curve", "StabilityConfig", "lowest_c1_eigenvalue",
    "quadratic_form_check", "PotentialGrid", "KLTBound", "lq_norm_negative_part", "lq_plus_norm",
    "lq_norm_inverse", "gibbs_integral", "klt_case_i", "klt_case_ii", "klt_case_iii", "klt_threshold_case",
    "RadialProfile", "SolverConfig", "MagInterpError",
]
