"""Finite-volume laboratory for the two-dimensional Burgers equation.

Solves u_t + (u^2/2)_x1 + (u^3/3)_x2 = 0 with a first-order monotone
finite-volume scheme, ships exact solution families (N-waves, very
self-similar flows) as oracles, and provides a diagnostics harness that
measures contraction, mass conservation, support growth, dispersive decay
and moment growth on families of nearly-singular initial data.
"""

from .core import CellField, Constants, Grid2D, build_grid, discretize, lp_norm
from .data import (InitialDatum, MollifierSpec, NWaveParams, Profile1D,
                   bump_datum, dirac_family, mollified_line_measure,
                   nwave_exact, nwave_slice, scale_datum, scale_solution)
from .diagnostics import (DiagnosticSpec, DiagnosticsReport, build_report,
                          calibrate_cinfty, dispersive_fit, moment_Iq,
                          semigroup_check, support_interval,
                          tightness_exponent, weighted_moment)
from .scheme import (SchemeConfig, cfl_dt, entropy_residual, evolve_together,
                     godunov_flux_quadratic, run, step, upwind_flux_cubic)
from .selfsim import (CharacteristicState, SelfSimilarProfile, VSSParams,
                      contrg_check, extract_profile, g_of_profile,
                      integrate_characteristic, profile_residual, shock_locus,
                      unbounded_support_check, vss_eval)

__version__ = "0.1.0"

__all__ = [
    "CellField",
    "CharacteristicState",
    "Constants",
    "DiagnosticSpec",
    "DiagnosticsReport",
    "Grid2D",
    "InitialDatum",
    "MollifierSpec",
    "NWaveParams",
    "Profile1D",
    "SchemeConfig",
    "SelfSimilarProfile",
    "VSSParams",
    "build_grid",
    "build_report",
    "bump_datum",
    "calibrate_cinfty",
    "cfl_dt",
    "contrg_check",
    "dirac_family",
    "discretize",
    "dispersive_fit",
    "entropy_residual",
    "evolve_together",
    "extract_profile",
    "g_of_profile",
    "godunov_flux_quadratic",
    "integrate_characteristic",
    "lp_norm",
    "moment_Iq",
    "mollified_line_measure",
    "nwave_exact",
    "nwave_slice",
    "profile_residual",
    "run",
    "scale_datum",
    "scale_solution",
    "semigroup_check",
    "shock_locus",
    "step",
    "support_interval",
    "unbounded_support_check",
    "upwind_flux_cubic",
    "vss_eval",
    "tightness_exponent",
    "weighted_moment",
    "__version__",
]
