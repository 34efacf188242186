//! Spectral representation of the Poisson extension of exterior data.
//!
//! For `g` supported at positive distance from `∂B_R`, the extension
//! `u(x) = ∫ Γ_R(x, y) g(y) dy` factors as `u = (R² - |x|²)^s V(x)` with `V`
//! analytic on a neighbourhood of the closed ball. `V` is sampled with
//! [`exterior_poisson_integral`] on a Chebyshev (radius) × Fourier (angle)
//! grid and interpolated, so the extension can be evaluated cheaply and
//! smoothly many times.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::field::{norm, Interface, ScalarField, Smoothness, Support};
use super::integrals::exterior_poisson_integral;
use super::QuadratureSpec;
use crate::error::{check_dim, Error, Result};
use crate::kernels::{dist2, norm2};
use crate::params::FracParams;

/// Sampling resolution of [`PoissonExtension`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionResolution {
    /// Chebyshev nodes in the radius (or in `x` when `N = 1`).
    pub radial: usize,
    /// Equispaced angles (`N = 2` only); must be even.
    pub angular: usize,
}

impl Default for ExtensionResolution {
    fn default() -> Self {
        ExtensionResolution { radial: 24, angular: 48 }
    }
}

/// The s-harmonic extension into `B_R` of exterior data `g`.
#[derive(Clone, Debug)]
pub struct PoissonExtension {
    s: f64,
    radius: f64,
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    angular: usize,
    /// `V` at (radial node, angle) pairs, row-major in the radial index.
    samples: Vec<f64>,
}

impl PoissonExtension {
    pub fn new(params: &FracParams, radius: f64, g: &ScalarField, resolution: ExtensionResolution, spec: &QuadratureSpec) -> Result<Self> {
        let dim = params.dim();
        if dim > 2 {
            return Err(Error::Unsupported("spectral Poisson extension is implemented for N <= 2".into()));
        }
        if resolution.radial < 2 || (dim == 2 && (resolution.angular < 4 || resolution.angular % 2 == 1)) {
            return Err(Error::InvalidParams("extension needs >= 2 radial nodes and an even number (>= 4) of angles".into()));
        }
        if support_gap(g.support(), radius) <= 0.0 {
            return Err(Error::Unsupported(
                "spectral extension needs exterior data supported away from the sphere".into(),
            ));
        }
        let n = resolution.radial;
        let cheb: Vec<f64> = (0..n).map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos()).collect();
        let weights: Vec<f64> =
            (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * ((2 * j + 1) as f64 * PI / (2 * n) as f64).sin()).collect();
        let s = params.s();
        let r2 = radius * radius;
        let (points, angular): (Vec<Vec<f64>>, usize) = if dim == 1 {
            (cheb.iter().map(|t| vec![radius * t]).collect(), 1)
        } else {
            let m = resolution.angular;
            let mut pts = Vec::with_capacity(n * m);
            for t in &cheb {
                let r = 0.5 * radius * (t + 1.0);
                for k in 0..m {
                    let phi = 2.0 * PI * k as f64 / m as f64;
                    pts.push(vec![r * phi.cos(), r * phi.sin()]);
                }
            }
            (pts, m)
        };
        let samples = points
            .par_iter()
            .map(|y| {
                let u = exterior_poisson_integral(params, radius, g, y, spec)?.value;
                Ok(u / (r2 - norm2(y)).powf(s))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(PoissonExtension { s, radius, dim, nodes: cheb, weights, angular, samples })
    }

    /// `u(x)` for `|x| < R`.
    pub fn eval_inside(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let r2 = self.radius * self.radius;
        let d = r2 - norm2(x);
        if d <= 0.0 {
            return Err(Error::Domain("extension is evaluated inside the ball only".into()));
        }
        Ok(d.powf(self.s) * self.smooth_part(x))
    }

    /// The analytic factor `V(x) = u(x) / (R² - |x|²)^s`.
    pub fn smooth_part(&self, x: &[f64]) -> f64 {
        if self.dim == 1 {
            return barycentric(&self.nodes, &self.weights, &self.samples, x[0] / self.radius);
        }
        let r = norm(x);
        let phi = x[1].atan2(x[0]);
        let m = self.angular;
        let mut column = Vec::with_capacity(self.nodes.len());
        let mut cot = Vec::with_capacity(m);
        let mut exact = None;
        for k in 0..m {
            let half = 0.5 * (phi - 2.0 * PI * k as f64 / m as f64);
            let sh = half.sin();
            if sh.abs() < 1e-15 {
                exact = Some(k);
                break;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            cot.push(sign * half.cos() / sh);
        }
        let denom: f64 = cot.iter().sum();
        for row in self.samples.chunks(m) {
            column.push(match exact {
                Some(k) => row[k],
                None => row.iter().zip(&cot).map(|(v, c)| v * c).sum::<f64>() / denom,
            });
        }
        barycentric(&self.nodes, &self.weights, &column, 2.0 * r / self.radius - 1.0)
    }

    /// The extension as a field on `R^N`: the interpolated `u` inside `B_R`
    /// and `g` outside.
    pub fn into_field(self, g: ScalarField) -> ScalarField {
        let radius = self.radius;
        let dim = self.dim;
        let outer = g.support().enclosing_radius(&vec![0.0; dim]);
        let growth = g.growth();
        let ext = Arc::new(self);
        let data = g.clone();
        let mut field = ScalarField::new(move |y: &[f64]| {
            if norm2(y) < radius * radius {
                ext.eval_inside(y).unwrap_or(f64::NAN)
            } else {
                data.eval(y)
            }
        })
        .with_smoothness(Smoothness::C2)
        .with_growth(growth)
        .with_interface(Interface::Sphere { center: vec![0.0; dim], radius });
        if let Some(outer) = outer {
            field = field.with_support(Support::Ball { center: vec![0.0; dim], radius: outer.max(radius) });
        }
        for interface in g.interfaces() {
            field = field.with_interface(interface.clone());
        }
        field
    }
}

/// Distance between the support of the data and the sphere `|y| = R`
/// (0 when unknown or touching).
fn support_gap(support: &Support, radius: f64) -> f64 {
    match support {
        Support::Ball { center, radius: r } => {
            let c = dist2(center, &vec![0.0; center.len()]).sqrt();
            (c - r - radius).max(0.0)
        }
        Support::Box { lower, upper } => {
            // distance from the origin to the box
            let d2: f64 = lower.iter().zip(upper).map(|(l, u)| if *l > 0.0 { l * l } else if *u < 0.0 { u * u } else { 0.0 }).sum();
            (d2.sqrt() - radius).max(0.0)
        }
        Support::Slab { lower, upper } => {
            let d = if *lower > 0.0 { *lower } else if *upper < 0.0 { -upper } else { 0.0 };
            (d - radius).max(0.0)
        }
        Support::Everywhere => 0.0,
    }
}

/// Barycentric interpolation through Chebyshev points of the first kind on [-1, 1].
fn barycentric(nodes: &[f64], weights: &[f64], values: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, w), v) in nodes.iter().zip(weights).zip(values) {
        let d = t - x;
        if d == 0.0 {
            return *v;
        }
        num += w * v / d;
        den += w / d;
    }
    num / den
}
