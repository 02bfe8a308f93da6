"""Capacity of noncoherent Rician fading channels under discrete
amplitude inputs, with Kuhn-Tucker optimality certification.

The public surface re-exports the channel kernel, the quadrature-backed
information functionals, the capacity solver, the certificate machinery,
the Monte Carlo cross-check, and the sweep-record serialization.
"""

from .constraints import (AveragePower, InfeasibleError, Moment4, Peak,
                          check_feasible, constraint_name, feasibility_slacks,
                          is_feasible)
from .density import (divergence_pn, log_output_density, mutual_information,
                      mutual_information_classical, mutual_information_pn,
                      output_entropy)
from .distributions import AmplitudeDistribution
from .kernels import (ChannelModel, ChannelSpec, kernel_mean, log_i0,
                      log_kernel_g, sample_R)
from .kt import (KTReport, estimate_multipliers, kt_lhs_moment4, kt_lhs_peak,
                 kt_lhs_pn, verify)
from .mc import MCEstimate, mc_mutual_information
from .optimize import (Solution, SolverConfig, ansatz_two_point,
                       optimize_probabilities, refine_locations,
                       solve_capacity, solve_fixed_n)
from .quadrature import (QuadratureConfig, QuadratureError, integrate_adaptive,
                         truncation_radius)
from .records import (SCHEMA_ID, SweepRecord, read_sweep_csv, write_sweep_csv)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeDistribution", "AveragePower", "ChannelModel", "ChannelSpec",
    "InfeasibleError", "KTReport", "MCEstimate", "Moment4", "Peak",
    "QuadratureConfig", "QuadratureError", "SCHEMA_ID", "Solution",
    "SolverConfig", "SweepRecord", "ansatz_two_point", "check_feasible",
    "constraint_name", "divergence_pn", "estimate_multipliers",
    "feasibility_slacks", "integrate_adaptive", "is_feasible", "kernel_mean",
    "kt_lhs_moment4", "kt_lhs_peak", "kt_lhs_pn", "log_i0", "log_kernel_g",
    "log_output_density", "mc_mutual_information", "mutual_information",
    "mutual_information_classical", "mutual_information_pn",
    "optimize_probabilities", "output_entropy", "read_sweep_csv",
    "refine_locations", "sample_R", "solve_capacity", "solve_fixed_n",
    "truncation_radius", "verify", "write_sweep_csv",
]
