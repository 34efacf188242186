//! Discrete checks on solutions: the reflection property used by the moving
//! plane argument, monotonicity in `x_1`, the choice of `λ_0`, and interior
//! Hölder quotients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use crate::error::{Error, Result};
use crate::kernels::{norm2, reflect_point, Domain};
use crate::params::FracParams;
use crate::quadrature::{strip_mass, QuadratureSpec, ScalarField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionViolation {
    pub node: Vec<f64>,
    /// `u(x) - u(x^λ)`
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub lambda: f64,
    pub tolerance: f64,
    pub checked: usize,
    /// Reflected points outside the grid, evaluated at the nearest grid boundary.
    pub extrapolated: usize,
    pub violations: Vec<ReflectionViolation>,
}

impl ReflectionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares `u(x)` with `u(x^λ)` at the nodes of `Σ_λ`; a node violates the
/// reflection property when `u(x) - u(x^λ) > 1e-9 + 1e-6 sup |u|`.
pub fn moving_plane_check(u: &GridFunction, lambda: f64) -> Result<ReflectionReport> {
    if *u.domain() != Domain::HalfSpace {
        return Err(Error::InvalidParams("moving plane check needs a half-space grid function".into()));
    }
    let normal = &u.axes()[0];
    let top = normal[normal.len() - 1];
    if !(lambda > 0.0) || lambda >= top {
        return Err(Error::Domain(format!("λ = {lambda} is outside the grid range (0, {top})")));
    }
    let tolerance = 1e-9 + 1e-6 * u.sup_norm();
    let mut report = ReflectionReport { lambda, tolerance, checked: 0, extrapolated: 0, violations: Vec::new() };
    for i in 0..u.len() {
        let x = u.node(i);
        if !(x[0] > 0.0 && x[0] < lambda) {
            continue;
        }
        report.checked += 1;
        let mirrored = u.eval_flagged(&reflect_point(&x, lambda));
        if mirrored.extrapolated {
            report.extrapolated += 1;
        }
        let excess = u.values()[i] - mirrored.value;
        if excess > tolerance {
            report.violations.push(ReflectionViolation { node: x, excess });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProfile {
    /// Smallest forward difference quotient along `x_1`.
    pub min_slope: f64,
    /// Lower node of the pair attaining it.
    pub location: Vec<f64>,
}

/// Minimum over the grid of `(u(x + h e_1) - u(x)) / h` between consecutive nodes.
pub fn monotonicity_profile(u: &GridFunction) -> MonotonicityProfile {
    let normal = &u.axes()[0];
    let mut best = MonotonicityProfile { min_slope: f64::INFINITY, location: u.node(0) };
    if normal.len() < 2 {
        best.min_slope = 0.0;
        return best;
    }
    let stride = u.len() / normal.len();
    for i in 0..u.len() - stride {
        let k = i / stride;
        let slope = (u.values()[i + stride] - u.values()[i]) / (normal[k + 1] - normal[k]);
        if slope < best.min_slope {
            best = MonotonicityProfile { min_slope: slope, location: u.node(i) };
        }
    }
    best
}

/// Number of sample points of `Σ_λ` used for the supremum of the strip mass.
pub const LAMBDA0_SAMPLES: usize = 64;
/// Required relative margin of `sup_x ∫_{Σ_{2λ_0}} G_∞^+(x, y) dy` below `1 / C_u`.
pub const LAMBDA0_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Estimate {
    pub lambda0: f64,
    /// `sup_{x ∈ Σ_{λ0}} ∫_{Σ_{2λ0}} G_∞^+(x, y) dy`, evaluated directly at `λ0`.
    pub sup_mass: f64,
    /// `1 - C_u sup_mass`
    pub margin: f64,
    /// The whole search bracket is feasible; `lambda0` is its upper end.
    pub at_upper_bracket: bool,
    pub bisection_steps: usize,
}

const BRACKET: (f64, f64) = (1e-8, 1e3);

/// `x_1 / λ` sample points in `(0, 1)`: the base-2 van der Corput sequence.
fn strip_samples() -> Vec<f64> {
    (1..=LAMBDA0_SAMPLES)
        .map(|mut k| {
            let mut v = 0.0;
            let mut scale = 0.5;
            while k > 0 {
                if k & 1 == 1 {
                    v += scale;
                }
                k >>= 1;
                scale *= 0.5;
            }
            v
        })
        .collect()
}

fn sup_strip_mass(params: &FracParams, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    let values = strip_samples()
        .par_iter()
        .map(|t| {
            let mut x = vec![0.0; params.dim()];
            x[0] = t * lambda;
            strip_mass(params, 2.0 * lambda, &x, spec).map(|m| m.value())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Largest `λ_0` in `[1e-8, 1e3]` with `sup_{Σ_{λ0}} ∫_{Σ_{2λ0}} G_∞^+ dy <= 0.89 / C_u`,
/// found by bisection in `log λ`.
///
/// The strip mass is homogeneous of degree `2s` under `(λ, x) ↦ (cλ, cx)`, so
/// the supremum over the 64 sample points is computed once at `λ = 1` and
/// scaled during the bisection; the result is re-evaluated directly at `λ_0`
/// and must clear the 10% margin.
pub fn lambda0_estimate(params: &FracParams, lipschitz: f64, spec: &QuadratureSpec) -> Result<Lambda0Estimate> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidParams(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    let target = (1.0 - LAMBDA0_MARGIN - 0.01) / lipschitz;
    let unit = sup_strip_mass(params, 1.0, spec)?;
    let two_s = 2.0 * params.s();
    let scaled = |lambda: f64| unit * lambda.powf(two_s);
    let (mut lo, mut hi) = (BRACKET.0.ln(), BRACKET.1.ln());
    if scaled(BRACKET.0) > target {
        return Err(Error::Domain(format!("no λ_0 >= {} satisfies the strip-mass bound for C_u = {lipschitz}", BRACKET.0)));
    }
    let mut steps = 0;
    let at_upper_bracket = scaled(BRACKET.1) <= target;
    if !at_upper_bracket {
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if scaled(mid.exp()) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
            steps += 1;
        }
    }
    let lambda0 = if at_upper_bracket { BRACKET.1 } else { lo.exp() };
    let sup_mass = sup_strip_mass(params, lambda0, spec)?;
    let margin = 1.0 - lipschitz * sup_mass;
    if margin < LAMBDA0_MARGIN {
        return Err(Error::ToleranceNotMet { estimate: lambda0, error: margin });
    }
    Ok(Lambda0Estimate { lambda0, sup_mass, margin, at_upper_bracket, bisection_steps: steps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    /// `max |u(x) - u(y)| / |x - y|^α` over node pairs in `B_r`.
    pub quotient: f64,
    /// `quotient / (sup_{B_r} |u| + sup_{B_1} |f|)`
    pub bound_ratio: f64,
    pub u_sup: f64,
    pub f_sup: f64,
    pub nodes: usize,
}

/// Interior Hölder quotient of a solution of `(-Δ)^s u = f` in `B_1`.
pub fn holder_estimate_check(u: &GridFunction, f: &ScalarField, r: f64, alpha: f64) -> Result<HolderEstimate> {
    let s = u.params().s();
    let limit = (2.0 * s).min(1.0);
    if !(alpha > 0.0 && alpha < limit) {
        return Err(Error::InvalidParams(format!("Hölder exponent must lie in (0, {limit}), got {alpha}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParams(format!("inner radius must lie in (0, 1), got {r}")));
    }
    let mut inner = Vec::new();
    let mut f_sup: f64 = 0.0;
    for i in 0..u.len() {
        let x = u.node(i);
        let n2 = norm2(&x);
        if n2 < 1.0 {
            f_sup = f_sup.max(f.eval(&x).abs());
        }
        if n2 < r * r {
            inner.push((x, u.values()[i]));
        }
    }
    let u_sup = inner.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let quotient = inner
        .par_iter()
        .enumerate()
        .map(|(a, (x, ux))| {
            inner[a + 1..].iter().fold(0.0f64, |m, (y, uy)| {
                let d = crate::kernels::dist2(x, y).sqrt();
                m.max((ux - uy).abs() / d.powf(alpha))
            })
        })
        .reduce(|| 0.0, f64::max);
    let scale = u_sup + f_sup;
    let bound_ratio = if scale > 0.0 { quotient / scale } else { 0.0 };
    Ok(HolderEstimate { alpha, quotient, bound_ratio, u_sup, f_sup, nodes: inner.len() })
}
