//! Runnable checks of the quantitative statements about the kernels, the
//! integrators and the solvers. Every check returns a [`Report`] keyed by a
//! stable check id; `pass` is a pure function of the report's measurements
//! and tolerances.

mod fit;
mod halfspace_checks;
mod kernel_checks;
mod report;
mod solution_checks;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::FracParams;
use crate::quadrature::QuadratureSpec;

pub use fit::{fit_line, log_log_slope, LineFit};
pub use halfspace_checks::{
    check_decay_regimes, check_lambda0, check_strip_mass, decay_integral, experiment_liouville, experiment_monotonicity,
    LiouvilleRun,
};
pub use kernel_checks::{
    check_dimension_reduction, check_green_limit, check_green_symmetry, check_h_monotonicity, check_kernel_bounds,
    check_poisson_normalization, check_reflection_inequalities, reduction_quadrature,
};
pub use report::{reports_to_csv, Condition, Relation, Report};
pub use solution_checks::{
    check_ball_torsion, check_boundary_estimate, check_harmonicity_meanvalue, check_holder, check_s_harmonicity,
    mean_value_convolution,
};

/// Settings shared by all checks.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub spec: QuadratureSpec,
    /// Run the check for these parameters instead of its default list.
    pub params: Option<FracParams>,
    /// Record wall-clock time in the report (off in strict mode).
    pub record_time: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, spec: QuadratureSpec::default(), params: None, record_time: false }
    }
}

/// A registered check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckInfo {
    pub id: &'static str,
    pub summary: &'static str,
}

pub const CHECKS: &[CheckInfo] = &[
    CheckInfo { id: "poisson-normalization", summary: "exterior integral of the ball Poisson kernel equals 1" },
    CheckInfo { id: "green-symmetry", summary: "Green functions are symmetric and vanish outside their domain" },
    CheckInfo { id: "ball-torsion", summary: "ball solve with f = 1 reproduces the Getoor profile" },
    CheckInfo { id: "s-harmonicity", summary: "the Poisson extension of exterior data is s-harmonic in the ball" },
    CheckInfo { id: "reflection-inequalities", summary: "reflection inequalities of the half-space Green function" },
    CheckInfo { id: "h-monotonicity", summary: "signs of the partial derivatives of H(r, t)" },
    CheckInfo { id: "green-limit", summary: "shifted-ball Green functions increase to the half-space Green function" },
    CheckInfo { id: "boundary-estimate", summary: "boundary decay exponent of ball Green potentials" },
    CheckInfo { id: "decay-regimes", summary: "growth of the exterior integral T(x_1) as x_1 -> 0" },
    CheckInfo { id: "strip-mass", summary: "Green mass of thin strips tends to 0" },
    CheckInfo { id: "dimension-reduction", summary: "Beta identity linking a_{N-1,s} and a_{N,s}" },
    CheckInfo { id: "harmonicity-meanvalue", summary: "s-harmonic functions equal their mollified Poisson averages" },
    CheckInfo { id: "kernel-bounds", summary: "half-space and ball Green functions stay below their bound shapes" },
    CheckInfo { id: "liouville", summary: "Picard iterations of u^q collapse to zero for subcritical q" },
    CheckInfo { id: "monotonicity", summary: "Picard solutions increase in x_1 and satisfy the reflection property" },
    CheckInfo { id: "holder", summary: "interior Holder quotients of ball solutions stay bounded under refinement" },
    CheckInfo { id: "lambda0", summary: "strip width lambda_0 with Green mass below 1 / C_u" },
];

pub fn check_ids() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|c| c.id)
}

/// ChaCha8 stream for one check: the top-level seed offset by a hash of the id.
pub fn check_rng(seed: u64, check_id: &str) -> ChaCha8Rng {
    let digest = Sha256::digest(check_id.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from_le_bytes(bytes)))
}

/// Runs one check by id.
pub fn run_check(id: &str, config: &VerifyConfig) -> Result<Report> {
    config.spec.validate()?;
    let only = config.params.map(|p| vec![p]);
    let list = |default: &[(usize, f64)]| -> Result<Vec<FracParams>> {
        match &only {
            Some(v) => Ok(v.clone()),
            None => default.iter().map(|&(n, s)| FracParams::new(n, s)).collect(),
        }
    };
    let seed = config.seed;
    let spec = &config.spec;
    let start = Instant::now();
    let mut report = match id {
        "poisson-normalization" => check_poisson_normalization(&list(kernel_checks::NORMALIZATION_PARAMS)?, 100, spec, seed),
        "green-symmetry" => check_green_symmetry(&list(kernel_checks::SYMMETRY_PARAMS)?, 10_000, seed),
        "ball-torsion" => check_ball_torsion(&list(&[(1, 0.5)])?, spec, seed),
        "s-harmonicity" => check_s_harmonicity(&list(solution_checks::HARMONIC_PARAMS)?, 20, spec, seed),
        "reflection-inequalities" => check_reflection_inequalities(&list(kernel_checks::REFLECTION_PARAMS)?, 10_000, seed),
        "h-monotonicity" => check_h_monotonicity(&list(kernel_checks::REFLECTION_PARAMS)?, 30, seed),
        "green-limit" => check_green_limit(&list(&[(2, 0.5)])?, 10, 20, seed),
        "boundary-estimate" => check_boundary_estimate(&list(solution_checks::BOUNDARY_PARAMS)?, spec, seed),
        "decay-regimes" => check_decay_regimes(&list(halfspace_checks::DECAY_PARAMS)?, 40, seed),
        "strip-mass" => check_strip_mass(&list(&[(2, 0.5)])?, 7, spec, seed),
        "dimension-reduction" => check_dimension_reduction(&list(kernel_checks::REDUCTION_PARAMS)?, seed),
        "harmonicity-meanvalue" => check_harmonicity_meanvalue(&list(solution_checks::MEANVALUE_PARAMS)?, &[0.4, 0.2, 0.1], spec, seed),
        "kernel-bounds" => check_kernel_bounds(&list(kernel_checks::BOUND_PARAMS)?, 2.0, 10_000, seed),
        "liouville" => experiment_liouville(&liouville_runs(&only)?, spec, seed),
        "monotonicity" => experiment_monotonicity(&list(halfspace_checks::MONOTONICITY_PARAMS)?, spec, seed),
        "holder" => check_holder(&list(&[(1, 0.5), (1, 0.25)])?, spec, seed),
        "lambda0" => check_lambda0(&list(&[(2, 0.5)])?, 1.0, spec, seed),
        _ => Err(Error::InvalidParams(format!("unknown check id '{id}'"))),
    }?;
    if config.record_time {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

fn liouville_runs(only: &Option<Vec<FracParams>>) -> Result<Vec<LiouvilleRun>> {
    match only {
        Some(v) => Ok(v.iter().map(|p| LiouvilleRun { params: *p, q: 2.0 }).collect()),
        None => halfspace_checks::LIOUVILLE_RUNS
            .iter()
            .map(|&(n, s, q)| Ok(LiouvilleRun { params: FracParams::new(n, s)?, q }))
            .collect(),
    }
}

/// Key prefix naming a parameter pair, e.g. `N2_s0.5`.
pub(crate) fn tag(p: &FracParams) -> String {
    format!("N{}_s{}", p.dim(), p.s())
}

pub(crate) fn params_value(list: &[FracParams]) -> Value {
    Value::Array(list.iter().map(|p| json!({"N": p.dim(), "s": p.s()})).collect())
}

/// Largest finite value, or `+∞` when any entry is not finite.
pub(crate) fn max_finite(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m: f64, v| if v.is_finite() { m.max(v) } else { f64::INFINITY })
}
