//! Scalar fields with the metadata the integrators need: smoothness,
//! support, surfaces where the field is not smooth, and growth at infinity.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{dist2, norm2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    /// Twice continuously differentiable near every evaluation point.
    C2,
    Continuous,
    /// Interpolated from grid values.
    GridSampled,
}

/// Where the field may be nonzero. Outside the support it evaluates to 0.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Everywhere,
    Ball { center: Vec<f64>, radius: f64 },
    /// `lower <= x_1 <= upper`, unbounded in the tangential directions.
    Slab { lower: f64, upper: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Support {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Support::Everywhere => true,
            Support::Ball { center, radius } => dist2(x, center) <= radius * radius,
            Support::Slab { lower, upper } => x[0] >= *lower && x[0] <= *upper,
            Support::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| v >= l && v <= u),
        }
    }

    /// Radius of a ball about `x` containing the support, if it is bounded.
    pub fn enclosing_radius(&self, x: &[f64]) -> Option<f64> {
        match self {
            Support::Everywhere | Support::Slab { .. } => None,
            Support::Ball { center, radius } => Some(dist2(x, center).sqrt() + radius),
            Support::Box { lower, upper } => Some(
                x.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(v, (l, u))| (v - l).abs().max((v - u).abs()).powi(2))
                    .sum::<f64>()
                    .sqrt(),
            ),
        }
    }

    /// Values `ρ > 0` where `x + ρ dir` crosses the boundary of the support.
    fn crossings(&self, x: &[f64], dir: &[f64], out: &mut Vec<f64>) {
        match self {
            Support::Everywhere => {}
            Support::Ball { center, radius } => sphere_crossings(center, *radius, x, dir, out),
            Support::Slab { lower, upper } => {
                plane_crossing(0, *lower, x, dir, out);
                plane_crossing(0, *upper, x, dir, out);
            }
            Support::Box { lower, upper } => {
                for (k, (l, u)) in lower.iter().zip(upper).enumerate() {
                    plane_crossing(k, *l, x, dir, out);
                    plane_crossing(k, *u, x, dir, out);
                }
            }
        }
    }

    fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        match self {
            Support::Everywhere => f64::INFINITY,
            Support::Ball { center, radius } => (dist2(x, center).sqrt() - radius).abs(),
            Support::Slab { lower, upper } => (x[0] - lower).abs().min((x[0] - upper).abs()),
            Support::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| (v - l).abs().min((v - u).abs()))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A surface across which the field is continuous but not smooth (or jumps).
#[derive(Clone, Debug, PartialEq)]
pub enum Interface {
    Sphere { center: Vec<f64>, radius: f64 },
    Plane { axis: usize, offset: f64 },
}

/// Behaviour at infinity: `|u(y)| <= C (1 + |y|^exponent)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Growth {
    Bounded,
    Power { exponent: f64 },
}

type Rule = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real function on `R^N` with integration metadata.
#[derive(Clone)]
pub struct ScalarField {
    rule: Rule,
    smoothness: Smoothness,
    support: Support,
    interfaces: Vec<Interface>,
    growth: Growth,
    bound: Option<f64>,
    tangential: bool,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("smoothness", &self.smoothness)
            .field("support", &self.support)
            .field("interfaces", &self.interfaces)
            .field("growth", &self.growth)
            .field("bound", &self.bound)
            .field("tangential", &self.tangential)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    /// A continuous bounded field with unknown bound, supported everywhere.
    pub fn new(rule: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            rule: Arc::new(rule),
            smoothness: Smoothness::Continuous,
            support: Support::Everywhere,
            interfaces: Vec::new(),
            growth: Growth::Bounded,
            bound: None,
            tangential: false,
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_| c).with_smoothness(Smoothness::C2).with_bound(c.abs())
    }

    pub fn zero() -> Self {
        ScalarField::constant(0.0)
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = support;
        self
    }

    pub fn with_interface(mut self, interface: Interface) -> Self {
        self.interfaces.push(interface);
        self
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    /// Declares `sup |u| <= bound`.
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    /// Declares that the field depends on `y_1` only.
    pub fn with_tangential_invariance(mut self) -> Self {
        self.tangential = true;
        self
    }

    /// Whether the field (including its support) depends on `y_1` only.
    pub fn is_tangentially_invariant(&self) -> bool {
        self.tangential && matches!(self.support, Support::Everywhere | Support::Slab { .. })
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.support.contains(x) {
            (self.rule)(x)
        } else {
            0.0
        }
    }

    /// Rejects fields outside the weighted class `L¹_s`
    /// (`∫ |u| / (1 + |y|^{N+2s}) < ∞`).
    pub fn require_l1s(&self, s: f64) -> Result<()> {
        match self.growth {
            Growth::Bounded => Ok(()),
            Growth::Power { exponent } if exponent < 2.0 * s => Ok(()),
            Growth::Power { exponent } => Err(Error::Unsupported(format!(
                "field grows like |y|^{exponent}, not integrable against |y|^(-N-2s) for s = {s}"
            ))),
        }
    }

    /// Sorted values `ρ > 0` at which `x + ρ dir` meets an interface or the
    /// support boundary.
    pub fn ray_breaks(&self, x: &[f64], dir: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        self.support.crossings(x, dir, &mut out);
        for interface in &self.interfaces {
            match interface {
                Interface::Sphere { center, radius } => sphere_crossings(center, *radius, x, dir, &mut out),
                Interface::Plane { axis, offset } => plane_crossing(*axis, *offset, x, dir, &mut out),
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Distance from `x` to the nearest interface or support boundary.
    pub fn distance_to_irregularity(&self, x: &[f64]) -> f64 {
        let mut d = self.support.distance_to_boundary(x);
        for interface in &self.interfaces {
            let di = match interface {
                Interface::Sphere { center, radius } => (dist2(x, center).sqrt() - radius).abs(),
                Interface::Plane { axis, offset } => (x[*axis] - offset).abs(),
            };
            d = d.min(di);
        }
        d
    }
}

fn sphere_crossings(center: &[f64], radius: f64, x: &[f64], dir: &[f64], out: &mut Vec<f64>) {
    // |x - c + ρ d|² = R² with |d| = 1
    let b: f64 = x.iter().zip(center).zip(dir).map(|((xi, ci), di)| (xi - ci) * di).sum();
    let c = dist2(x, center) - radius * radius;
    let disc = b * b - c;
    if disc <= 0.0 {
        return;
    }
    let root = disc.sqrt();
    for rho in [-b - root, -b + root] {
        if rho > 0.0 {
            out.push(rho);
        }
    }
}

fn plane_crossing(axis: usize, offset: f64, x: &[f64], dir: &[f64], out: &mut Vec<f64>) {
    if dir[axis] != 0.0 {
        let rho = (offset - x[axis]) / dir[axis];
        if rho > 0.0 {
            out.push(rho);
        }
    }
}

/// Euclidean norm.
pub(crate) fn norm(x: &[f64]) -> f64 {
    norm2(x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_eval() {
        let f = ScalarField::constant(2.0).with_support(Support::Ball { center: vec![1.0, 0.0], radius: 0.5 });
        assert_eq!(f.eval(&[1.2, 0.1]), 2.0);
        assert_eq!(f.eval(&[0.0, 0.0]), 0.0);
        assert_eq!(f.support().enclosing_radius(&[0.0, 0.0]), Some(1.5));
        let slab = Support::Slab { lower: 0.0, upper: 1.0 };
        assert!(slab.contains(&[0.5, 1e9]) && slab.enclosing_radius(&[0.5, 0.0]).is_none());
    }

    #[test]
    fn ray_breaks_sorted() {
        let f = ScalarField::new(|_| 1.0)
            .with_interface(Interface::Sphere { center: vec![0.0, 0.0], radius: 1.0 })
            .with_interface(Interface::Plane { axis: 0, offset: 0.5 });
        let b = f.ray_breaks(&[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(b, vec![0.5, 1.0]);
        assert!(f.ray_breaks(&[0.0, 0.0], &[0.0, 1.0]) == vec![1.0]);
        assert!((f.distance_to_irregularity(&[0.2, 0.0]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn weighted_class() {
        assert!(ScalarField::constant(1.0).require_l1s(0.1).is_ok());
        let g = ScalarField::new(|x| x[0].abs().sqrt()).with_growth(Growth::Power { exponent: 0.5 });
        assert!(g.require_l1s(0.3).is_ok());
        assert!(g.require_l1s(0.25).is_err());
    }
}
