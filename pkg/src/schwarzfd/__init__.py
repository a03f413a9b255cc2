"""Invariant finite-difference schemes for the Schwarzian equation and its
second-order reduction: exact schemes, first integrals, symmetry flows, and
the discrete Backlund-type transformation."""

from __future__ import annotations

from .backlund import (
    AlphaPair,
    PairedTrajectories,
    b1_residual,
    b2_residual,
    compatibility_backward,
    compatibility_forward,
    construct_xu_side,
    continuous_limit_report,
    fit_alphas,
    reconstruct_ty_side,
    residual_profiles,
)
from .continuous import (
    Jet3,
    Ode2SolutionParams,
    SchwarzSolutionParams,
    continuous_backlund_invariants,
    continuous_backlund_residual,
    multiplier_identity_check,
    ode2_first_integral,
    ode2_residual,
    ode2_solution,
    schwarz_solution,
    schwarzian,
    singular_slope_residual,
)
from .errors import (
    BranchError,
    ConvergenceError,
    DegenerateStencilError,
    DomainError,
    PoleError,
    SchwarzFDError,
    ZeroIntegralError,
)
from .integrals import (
    IntegralReport,
    constancy_report,
    ctilde_from_c,
    integral_form_c,
    integral_form_ctilde,
    j1,
    j2,
    j3,
    j4,
    winternitz_integral,
)
from .schemes import (
    Ode2ExactParams,
    StepperConfig,
    WinternitzExactParams,
    c_bracket,
    ctilde_bracket,
    derived_residual_profile,
    derived_scheme_residuals,
    exact_scheme_params,
    k_from_c,
    mesh_residual,
    mesh_residual_profile,
    ode2_exact_node,
    ode2_exact_trajectory,
    ode2_mesh_residuals,
    ode2_run,
    ode2_scheme_residual,
    ode2_step,
    scheme_residual_profile,
    scheme_residual_raw,
    singular_consistency_residual,
    singular_eps_root,
    singular_recursion_step,
    singular_trajectory,
    theta_exact,
    winternitz_exact_trajectory,
    winternitz_residuals,
    winternitz_step,
)
from .stencil import (
    SchemeParams,
    Stencil4,
    Trajectory,
    cross_ratio_mixed,
    cross_ratio_same,
    mixed_cross_ratio,
    read_trajectory_csv,
    stencil_at,
    write_trajectory_csv,
)
from .symmetry import (
    GENERATORS,
    JOINT_GENERATORS,
    MobiusMap,
    SINGLE_GENERATORS,
    flow,
    infinitesimal_invariance,
    invariance_max_residual,
    invariance_row,
    invariance_table,
    prolong_jet,
)

__version__ = "0.1.0"
