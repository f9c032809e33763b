"""Normalized ground states of two-component Gross-Pitaevskii systems on bounded domains.

Modules:
    grid: Dirichlet meshes, quadrature and the discrete Laplacian spectrum.
    model: parameters, regimes, energy and Euler-Lagrange residuals.
    constants: sharp Gagliardo-Nirenberg and Sobolev constants.
    thresholds: explicit admissible-mass conditions.
    minimize: constrained minimizers and the concentrating witness sequence.
    evolve: time-dependent flow and orbital-stability experiments.
    segregation: strong-competition sweeps and the segregated limit.
    cli: the ``gpsolve`` command.
"""

__version__ = "0.1.0"

from .grid import (Domain, Grid, EigenPair, build_grid, principal_eigenpairs,
                   analytic_eigenvalues)
from .model import (Regime, SystemParams, MassPair, exponents, classify_regime, energy,
                    energy_gradient, nonlinearity, el_residual, lagrange_multipliers)
from .constants import solve_Z, gn_constant, sobolev_constant, talenti_constant
from .thresholds import (ThresholdReport, check_h2_condition, lambda_capital, lambda_prime,
                         check_supercritical, hat_c_bounds, threshold_report, region_sample)
from .minimize import (ConstraintSpec, FlowOptions, GroundStateResult, initial_guess,
                       normalized_gradient_flow, ground_state, verify_local_min,
                       make_divergent_sequence, witness_table)
from .evolve import WaveState, EvolutionTrace, step_crank_nicolson, orbit_distance, stability_experiment
from .segregation import SegregationRecord, beta_sweep, limit_profile_check
