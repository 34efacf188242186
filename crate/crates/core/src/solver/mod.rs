//! Solvers built on the Green representation: linear Dirichlet problems on
//! balls and the half-space, the Picard iteration for the semilinear
//! half-space problem, and discrete checks on the solutions.

mod checks;
mod grid;
mod linear;
mod nonlinearity;
mod operator;
mod picard;

pub use checks::{
    holder_estimate_check, lambda0_estimate, monotonicity_profile, moving_plane_check, HolderEstimate, Lambda0Estimate,
    MonotonicityProfile, ReflectionReport, ReflectionViolation, LAMBDA0_MARGIN, LAMBDA0_SAMPLES,
};
pub use grid::{fmt17, linspace, ExteriorRule, GridFunction, GridValue};
pub use linear::{solve_ball_dirichlet, solve_halfspace_linear, BallSolution};
pub use nonlinearity::Nonlinearity;
pub use operator::{HalfspaceBox, HalfspaceOperator};
pub use picard::{picard_semilinear, PicardFailure, PicardOptions, SolveReport, Verdict};
