//! Picard iteration `u_{k+1} = ∫_box G_∞^+(·, y) f(u_k(y)) dy` for the
//! semilinear half-space problem.

use serde::{Deserialize, Serialize};

use super::grid::{ExteriorRule, GridFunction};
use super::nonlinearity::Nonlinearity;
use super::operator::{HalfspaceBox, HalfspaceOperator};
use crate::error::Error;
use crate::kernels::Domain;
use crate::params::FracParams;
use crate::quadrature::QuadratureSpec;

/// Stopping thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub max_iter: usize,
    /// Converged when `sup |u_{k+1} - u_k| < residual_tol (1 + sup |u_k|)`.
    pub residual_tol: f64,
    /// Diverged when `sup u_k` exceeds this.
    pub blowup: f64,
    /// A converged iterate below this sup norm counts as zero.
    pub zero_tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { max_iter: 200, residual_tol: 1e-6, blowup: 1e3, zero_tol: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergedToZero,
    ConvergedNonzero,
    Diverged,
    BudgetExhausted,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConvergedToZero => "converged-to-zero",
            Verdict::ConvergedNonzero => "converged-nonzero",
            Verdict::Diverged => "diverged",
            Verdict::BudgetExhausted => "budget-exhausted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `sup |u_k|` for `k = 1..=iterations`.
    pub sup_norms: Vec<f64>,
    pub residual: f64,
    pub verdict: Verdict,
    pub truncation: HalfspaceBox,
    pub nonlinearity: String,
    pub seed: Option<u64>,
    /// Whether `u_{k+1} <= u_k` held at every node and step, recorded when `u_1 <= u_0`.
    pub monotone_start: Option<bool>,
    /// Largest `f(u)` argument outside the tagged range, if any.
    pub range_exceeded: Option<f64>,
}

/// A failed run with the report accumulated before the failure.
#[derive(Clone, Debug)]
pub struct PicardFailure {
    pub report: SolveReport,
    pub error: Error,
}

/// Runs the iteration from `u0` (sampled at the box nodes). The truncated
/// operator drops a nonnegative tail, so a zero verdict is conservative.
pub fn picard_semilinear(
    params: &FracParams,
    f: &Nonlinearity,
    u0: &GridFunction,
    bx: &HalfspaceBox,
    options: &PicardOptions,
    spec: &QuadratureSpec,
) -> std::result::Result<(GridFunction, SolveReport), Box<PicardFailure>> {
    let mut report = SolveReport {
        iterations: 0,
        sup_norms: Vec::new(),
        residual: f64::NAN,
        verdict: Verdict::BudgetExhausted,
        truncation: *bx,
        nonlinearity: f.name().to_string(),
        seed: None,
        monotone_start: None,
        range_exceeded: None,
    };
    let fail = |report: &SolveReport, error: Error| Box::new(PicardFailure { report: report.clone(), error });
    let grid = GridFunction::zeros(*params, Domain::HalfSpace, bx.axes(params.dim()), ExteriorRule::Zero).map_err(|e| fail(&report, e))?;
    let mut u: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            if x[0] <= 0.0 {
                0.0
            } else {
                u0.eval(&x)
            }
        })
        .collect();
    if let Some(bad) = u.iter().find(|v| !(**v >= 0.0) || **v > f.range_max()) {
        return Err(fail(&report, Error::InvalidParams(format!("initial value {bad} outside [0, {}]", f.range_max()))));
    }
    let op = HalfspaceOperator::assemble(params, bx, spec).map_err(|e| fail(&report, e))?;
    let flat_zero = f.eval(0.0) == 0.0;
    let mut monotone: Option<bool> = None;
    let mut previous_sup = sup(&u);
    while report.iterations < options.max_iter {
        let density: Vec<f64> = u.iter().map(|&v| f.eval(v)).collect();
        let next = op.apply(&density);
        report.iterations += 1;
        let next_sup = sup(&next);
        let residual = next.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.sup_norms.push(next_sup);
        report.residual = residual;
        let decreasing = next.iter().zip(&u).all(|(a, b)| a <= b);
        monotone = match (report.iterations, monotone) {
            (1, _) if decreasing => Some(true),
            (1, _) => None,
            (_, Some(held)) => Some(held && decreasing),
            (_, None) => None,
        };
        if next.iter().any(|v| !v.is_finite()) || next_sup > options.blowup {
            report.verdict = Verdict::Diverged;
            u = next;
            break;
        }
        if next_sup > f.range_max() {
            report.range_exceeded = Some(next_sup);
            report.verdict = Verdict::Diverged;
            u = next;
            break;
        }
        // A zero iterate of a nonlinearity with f(0) = 0 is an exact fixed point.
        let fixed_zero = flat_zero && next_sup == 0.0;
        let converged = fixed_zero || residual < options.residual_tol * (1.0 + previous_sup);
        u = next;
        previous_sup = next_sup;
        if converged {
            report.verdict = if next_sup < options.zero_tol { Verdict::ConvergedToZero } else { Verdict::ConvergedNonzero };
            break;
        }
    }
    report.monotone_start = monotone;
    let field = grid.with_values(u).map_err(|e| fail(&report, e))?;
    Ok((field, report))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}
