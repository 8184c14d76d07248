"""Measure-preserving maps from the unit cube to balls, spheres and projective spaces."""
from .bundles import FiberSpec, HopfTarget, ProductSpace, hopf_project, phi_hopf, phi_product
from .crosses import (Ball, CrossSpace, CutLocusError, canonicalize, complex_proj,
                      cross_space, distance, distance_to_base, exp_chart, log_chart,
                      octonion_plane, phi_ball, phi_m, phi_m_inv, quat_proj, real_proj,
                      sphere)
from .cube_gauss import GaussianMeasure, phi_rd, phi_rd_inv
from .radial import NormalizationError, RadialProfile, make_profile
from .specfun import (BracketError, ConvergenceError, DomainError, SpecfunError, erf_inv,
                      erfc_inv, gammainc_inv, gammainc_p, gammainc_q)
from .targets import parse_target

__all__ = [
    "Ball", "BracketError", "ConvergenceError", "CrossSpace", "CutLocusError", "DomainError",
    "FiberSpec", "GaussianMeasure", "HopfTarget", "NormalizationError", "ProductSpace",
    "RadialProfile", "SpecfunError", "canonicalize", "complex_proj", "cross_space", "distance",
    "distance_to_base", "erf_inv", "erfc_inv", "exp_chart", "gammainc_inv", "gammainc_p",
    "gammainc_q", "hopf_project", "log_chart", "make_profile", "octonion_plane", "parse_target",
    "phi_ball", "phi_hopf", "phi_m", "phi_m_inv", "phi_product", "phi_rd", "phi_rd_inv",
    "quat_proj", "real_proj", "sphere",
]
