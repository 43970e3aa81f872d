//! Mean-field (semiclassical) analysis: flow, fixed points, stability and phase diagrams.

mod cubic;
mod dynamics;
mod phase;
mod roots;
mod stability;

pub use cubic::{
    real_cubic_roots, symmetric_branch, symmetric_cubic_coefficients, symmetric_slope, symmetric_state,
    symmetric_turning_points, BranchPoint,
};
pub use dynamics::{
    integrate, rhs, wrap_phase, MeanFieldState, MeanFieldTrajectory, DIVERGENCE_GUARD, STATIONARY_RHS,
    STATIONARY_WINDOW,
};
pub use phase::{count_states, phase_diagram, PhaseCell, StateCounts, SweepAxis};
pub use roots::{
    find_all_steady_states, newton, state_equation_residual, SearchGrid, SteadyStateSolution, Symmetry,
    DEDUP_TOLERANCE, MAX_ROOTS, ROOT_RESIDUAL, SYMMETRY_TOLERANCE,
};
pub use stability::{Stability, StabilityMatrix, MARGINAL_BAND};
