"""Finite-volume solvers for scalar conservation laws in one and two
dimensions, exact Riemann fans, L2 projections onto convex target sets, and
decay audits of the distances to those sets along a run."""

from .envelope import (ContactStructure, FluxEnvelope, PiecewiseLinear, flux_envelope, legendre,
                       lower_convex_envelope, upper_concave_envelope)
from .fields import CellField, Field2D, Grid1D, PiecewiseConstant, step_profile
from .flux import PolyFlux, bitangent_slopes, chord, lipschitz_bound
from .lyapunov import (DecayReport, EntropyPair, audit_decay, delta_ball, norms_and_tv,
                       relative_entropy_delta)
from .oracle import analytic_solution, fit_rate, monotone_projection_bruteforce
from .project import (IntervalSet, L1Ball, L2Ball, Monotone, distance_l2, project,
                      project_l1ball, project_monotone, project_monotone_infsup)
from .riemann import cell_average_fan, godunov_flux, kunik_value, sample_fan, solve_riemann
from .solver import CFLError, SchemeConfig, evolve, mesh_project, run, run_2d, step, step_2d

__version__ = "0.1.0"
