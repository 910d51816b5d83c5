"""Numerical toolkit for the fractional Lane-Emden equation
(-Delta)^s u = |u|^{p-1} u: exact Gamma-function constants, the
stability dividing exponent, fractional-Laplacian quadrature for
radial functions, the weighted harmonic extension with a degenerate
finite-volume solver, the minimal-solution branch on the half ball,
and the scaled-energy monotonicity diagnostics."""

from .exponents import (ConvergenceError, ExponentTableRow, StabilityVerdict,
                        classical_joseph_lundgren, cond_gamma_form,
                        cond_margin, joseph_lundgren, region_table,
                        stability_verdict, tail_margin)
from .extension import (AxisymGrid, ExtendedSingular, ExtField, MinimalBranch,
                        SolverError, extended_singular, kernel_mass,
                        minimal_branch, poisson_extend, rescale_blowup,
                        solve_linear_degenerate, solve_minimal, sphere_profile,
                        weighted_flux)
from .fraclap import (DEFAULT_SPEC, QuadratureError, QuadratureSpec,
                      RadialFunction, angular_kernel, bubble, frac_lap_power,
                      frac_lap_radial, gaussian, hardy_quotient,
                      hs_seminorm_sq, lp_norm_radial, pohozaev_residual,
                      power_function, pv_constant, rho_kernel, sphere_area,
                      stability_form, verify_rho_bounds, weighted_l2)
from .monotonicity import (EnergyReport, energy, energy_derivative,
                           energy_report, homogeneity_defect)
from .special import (DomainError, Params, hardy_constant, kappa,
                      lambda_of_alpha, log_gamma, normalizing_constant,
                      poisson_constant, singular_amplitude, sobolev_exponent)

__version__ = "0.1.0"
