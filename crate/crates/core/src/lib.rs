//! Potential theory for the fractional Laplacian `(-Δ)^s`.
//!
//! The crate evaluates the explicit Poisson and Green kernels of balls and of
//! the half-space, integrates them against data with singularity-aware
//! quadrature, solves linear and semilinear Dirichlet problems through their
//! Green representation, and runs numerical checks of the associated kernel
//! estimates, reflection inequalities and Liouville-type statements.

pub mod error;
pub mod kernels;
pub mod params;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{reflect_point, Domain, Kernels, Point, StripSet};
pub use params::{CriticalExponent, CriticalExponents, FracParams, Regime};
pub use special::KernelIntegral;
