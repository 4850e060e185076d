"""Symmetry-preserving variational solver for second-order initial value problems.

Discretizes the world-line action of a point particle in a potential with
summation-by-parts operators, doubles the degrees of freedom to make the
variational problem causal, and finds the critical point with a damped
Newton method.  The continuum time-translation symmetry survives the
discretization, so the associated conserved charge stays exactly constant
in the interior of the simulated window.
"""

from .action import (
    DiscreteAction,
    InvalidConfig,
    Potential,
    ProblemConfig,
    StateVector,
    action_gradient,
    action_hessian,
    action_value,
    custom_potential,
    free_potential,
    linear_potential,
    metric_g00,
    quartic_potential,
)
from .diagnostics import (
    DiagnosticsReport,
    ErrorNorms,
    HBvpDiagnostic,
    NotFreePotential,
    PhysicalLimitViolation,
    charge_deviation,
    diagnose,
    error_norms,
    free_case_charges,
    geodesic_residuals,
    h_bvp_profile,
    noether_charge_t,
)
from .reference import (
    ConvergenceRow,
    ConvergenceTable,
    PhysicalTrajectory,
    ReferenceTrajectory,
    StepFailure,
    StiffnessSuspected,
    SuperluminalVelocity,
    convergence_study,
    scaled_tdot_study,
    solve_geodesic_ode,
    solve_physical_eom,
)
from .sbp import (
    RegularizedOperator,
    SbpOperator,
    apply,
    build_operator,
    build_sbp21,
    build_sbp42,
    inner_product,
    regularize,
)
from .solver import (
    NonConvergence,
    SingularSystem,
    Solution,
    SolveOptions,
    continuation_solve,
    initial_guess,
    solve,
)

__version__ = "0.1.0"
