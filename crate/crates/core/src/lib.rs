//! Smooth and sparse regularized optimal transport.
//!
//! The crate solves discrete OT between histograms `a ∈ Δᵐ` and `b ∈ Δⁿ`
//! with ground cost `C` through four smooth formulations (regularized dual,
//! regularized semi-dual, relaxed primal and semi-relaxed primal), checks them
//! against an exact network-simplex solver, computes closed-form
//! approximation-error bounds and applies the resulting plans to color
//! transfer between images.

pub mod bounds;
pub mod colortransfer;
pub mod csvio;
pub mod error;
pub mod oracle;
pub mod problem;
pub mod regularizers;
pub mod solvers;

pub use error::{OtError, Result};
pub use problem::{
    c_transform, primal_value, semi_dual_value, validate_instance, CostMatrix, DualPotentials,
    Groups, Histogram, Instance, RegKind, RegParams, TransportPlan,
};
pub use solvers::{
    alternating_minimization, solve_dual, solve_relaxed_primal, solve_semi_relaxed_primal, solve_semidual,
    DualSolution, Formulation, PrimalSolution, RelaxationParams, SolveOptions, SolveReport, SolverKind,
};
pub use oracle::{plan_error, solve_exact, value_errors, ExactSolution, ValueErrors};
pub use bounds::{bound_report, theorem1_bounds, theorem2_bounds, verify_sandwich, BoundReport, RegularizedBounds, RelaxedBounds};
