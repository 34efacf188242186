//! Numerical integration: adaptive rules, scalar fields, and the kernel
//! integrals built on them.

mod extension;
mod field;
mod integrals;
pub mod rules;
pub(crate) mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use extension::{ExtensionResolution, PoissonExtension};
pub use field::{Growth, Interface, ScalarField, Smoothness, Support};
pub use integrals::{
    ball_green_integral, exterior_poisson_integral, frac_laplacian_point, halfspace_green_integral, strip_mass,
    HalfspaceIntegral,
};
pub use rules::{Estimate, Tol};

/// How singular cells are integrated when assembling the half-space operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityStrategy {
    /// Polar coordinates about the singular point with adaptive radial refinement.
    #[default]
    PolarSubtraction,
    /// Fixed tensor rules on pyramids collapsed at the singular point.
    DuffySplit,
}

/// Lateral truncation of half-space integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRadius {
    /// Map the unbounded lateral range onto a finite interval; no truncation error.
    #[default]
    Adaptive,
    /// Truncate at this lateral radius and report the kernel-bound tail estimate.
    Fixed(f64),
}

/// Whether parallel reductions must follow a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecMode {
    /// Bit-reproducible results for a fixed configuration.
    #[default]
    Strict,
    /// Parallel reductions in arbitrary order; results may differ in the last bits.
    Fast,
}

/// Tolerances and strategies shared by every integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections of any panel.
    pub max_refinements: u32,
    pub tail_radius: TailRadius,
    pub singularity_strategy: SingularityStrategy,
    pub mode: ExecMode,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_refinements: 30,
            tail_radius: TailRadius::Adaptive,
            singularity_strategy: SingularityStrategy::PolarSubtraction,
            mode: ExecMode::Strict,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureSpec { rel_tol, abs_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_refinements < 1 {
            return Err(Error::InvalidParams("max_refinements must be at least 1".into()));
        }
        if let TailRadius::Fixed(l) = self.tail_radius {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParams(format!("tail radius must be positive and finite, got {l}")));
            }
        }
        Ok(())
    }

    /// The same spec with both tolerances halved.
    pub fn refined(&self) -> Self {
        QuadratureSpec { rel_tol: 0.5 * self.rel_tol, abs_tol: 0.5 * self.abs_tol, ..*self }
    }

    pub fn tol(&self) -> Tol {
        Tol::new(self.abs_tol, self.rel_tol)
    }
}
