//! Tensor-grid sampled functions.

use std::fmt::Write as _;

use crate::error::{check_dim, Error, Result};
use crate::kernels::Domain;
use crate::params::FracParams;
use crate::quadrature::{ScalarField, Smoothness};

/// Values outside the domain, i.e. where the grid function is extended by data.
#[derive(Clone, Debug)]
pub enum ExteriorRule {
    Zero,
    Provided(ScalarField),
    /// A provided field that was not carried through serialization;
    /// evaluation outside the domain returns NaN.
    Detached,
}

impl ExteriorRule {
    pub fn tag(&self) -> &'static str {
        match self {
            ExteriorRule::Zero => "zero",
            ExteriorRule::Provided(_) | ExteriorRule::Detached => "provided-field",
        }
    }
}

/// A value produced by [`GridFunction::eval_flagged`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridValue {
    pub value: f64,
    /// The point lies in the domain but outside the grid hull, and the value
    /// was taken from the nearest boundary of the grid.
    pub extrapolated: bool,
}

/// A scalar field sampled on a tensor grid, interpolated multilinearly.
#[derive(Clone, Debug)]
pub struct GridFunction {
    params: FracParams,
    domain: Domain,
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
    exterior: ExteriorRule,
}

impl GridFunction {
    /// Values are stored row-major: the last axis varies fastest.
    pub fn new(params: FracParams, domain: Domain, axes: Vec<Vec<f64>>, values: Vec<f64>, exterior: ExteriorRule) -> Result<Self> {
        check_dim(params.dim(), axes.len())?;
        for (k, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::InvalidParams(format!("grid axis {k} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParams(format!("grid axis {k} must be finite and strictly increasing")));
            }
        }
        let count: usize = axes.iter().map(Vec::len).product();
        if values.len() != count {
            return Err(Error::InvalidParams(format!("expected {count} grid values, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("grid value {i} is not finite")));
        }
        Ok(GridFunction { params, domain, axes, values, exterior })
    }

    /// Samples `rule` at every node.
    pub fn from_fn(
        params: FracParams,
        domain: Domain,
        axes: Vec<Vec<f64>>,
        exterior: ExteriorRule,
        rule: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        check_dim(params.dim(), axes.len())?;
        let count: usize = axes.iter().map(Vec::len).product();
        let mut node = vec![0.0; axes.len()];
        let values = (0..count)
            .map(|i| {
                fill_node(&axes, i, &mut node);
                rule(&node)
            })
            .collect();
        GridFunction::new(params, domain, axes, values, exterior)
    }

    pub fn zeros(params: FracParams, domain: Domain, axes: Vec<Vec<f64>>, exterior: ExteriorRule) -> Result<Self> {
        let count = axes.iter().map(Vec::len).product();
        GridFunction::new(params, domain, axes, vec![0.0; count], exterior)
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> &ExteriorRule {
        &self.exterior
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of node `index`.
    pub fn node(&self, index: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.axes.len()];
        fill_node(&self.axes, index, &mut x);
        x
    }

    /// Per-axis indices of node `index`.
    pub fn node_indices(&self, index: usize) -> Vec<usize> {
        let mut rem = index;
        let mut idx = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            idx[k] = rem % self.axes[k].len();
            rem /= self.axes[k].len();
        }
        idx
    }

    /// Flat index of the node with per-axis indices `idx`.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (i, axis)| acc * axis.len() + i)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Replaces the node values, keeping grid and exterior rule.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridFunction::new(self.params, self.domain, self.axes.clone(), values, self.exterior.clone())
    }

    pub fn contains_in_hull(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.axes).all(|(v, axis)| *v >= axis[0] && *v <= axis[axis.len() - 1])
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_flagged(x).value
    }

    /// Multilinear interpolation inside the grid hull; outside it, nearest-node
    /// extrapolation for points of the domain and the exterior rule elsewhere.
    pub fn eval_flagged(&self, x: &[f64]) -> GridValue {
        if self.contains_in_hull(x) {
            return GridValue { value: self.interpolate(x), extrapolated: false };
        }
        if self.domain.contains(x) {
            let clamped: Vec<f64> =
                x.iter().zip(&self.axes).map(|(v, axis)| v.clamp(axis[0], axis[axis.len() - 1])).collect();
            return GridValue { value: self.interpolate(&clamped), extrapolated: true };
        }
        let value = match &self.exterior {
            ExteriorRule::Zero => 0.0,
            ExteriorRule::Provided(g) => g.eval(x),
            ExteriorRule::Detached => f64::NAN,
        };
        GridValue { value, extrapolated: false }
    }

    fn interpolate(&self, x: &[f64]) -> f64 {
        let dim = self.axes.len();
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0; dim];
        for k in 0..dim {
            let axis = &self.axes[k];
            if axis.len() == 1 {
                continue;
            }
            let i = axis.partition_point(|&a| a <= x[k]).clamp(1, axis.len() - 1) - 1;
            base[k] = i;
            frac[k] = (x[k] - axis[i]) / (axis[i + 1] - axis[i]);
        }
        let mut total = 0.0;
        let mut idx = vec![0usize; dim];
        'corners: for corner in 0..(1usize << dim) {
            let mut weight = 1.0;
            for k in 0..dim {
                let upper = corner >> k & 1 == 1;
                if self.axes[k].len() == 1 {
                    if upper {
                        continue 'corners;
                    }
                    idx[k] = 0;
                    continue;
                }
                idx[k] = base[k] + upper as usize;
                weight *= if upper { frac[k] } else { 1.0 - frac[k] };
            }
            if weight != 0.0 {
                total += weight * self.values[self.flat_index(&idx)];
            }
        }
        total
    }

    /// The interpolant as a field tagged as grid-sampled.
    pub fn to_field(&self) -> ScalarField {
        let grid = self.clone();
        ScalarField::new(move |x: &[f64]| grid.eval(x)).with_smoothness(Smoothness::GridSampled)
    }

    /// Text table: a header (`dim`, `s`, `domain`, `exterior`, one `axis` line
    /// per axis), then one `coords... value` row per node, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# fraclap grid function\n");
        let _ = writeln!(out, "dim {}", self.params.dim());
        let _ = writeln!(out, "s {}", fmt17(self.params.s()));
        match self.domain {
            Domain::Ball { radius } => {
                let _ = writeln!(out, "domain ball {}", fmt17(radius));
            }
            Domain::ShiftedBall { radius } => {
                let _ = writeln!(out, "domain shifted-ball {}", fmt17(radius));
            }
            other => {
                let _ = writeln!(out, "domain {}", other.tag());
            }
        }
        let _ = writeln!(out, "exterior {}", self.exterior.tag());
        for (k, axis) in self.axes.iter().enumerate() {
            let _ = write!(out, "axis {k} {}", axis.len());
            for v in axis {
                let _ = write!(out, " {}", fmt17(*v));
            }
            out.push('\n');
        }
        out.push_str("values\n");
        for (i, v) in self.values.iter().enumerate() {
            for c in self.node(i) {
                let _ = write!(out, "{} ", fmt17(c));
            }
            let _ = writeln!(out, "{}", fmt17(*v));
        }
        out
    }

    /// Parses [`GridFunction::to_text`] output. A provided exterior field
    /// comes back [`ExteriorRule::Detached`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let mut dim = None;
        let mut s = None;
        let mut domain = None;
        let mut exterior = None;
        let mut axes: Vec<Vec<f64>> = Vec::new();
        let bad = |line: usize, what: &str| Error::Io(format!("grid file line {}: {what}", line + 1));
        for (n, line) in lines.by_ref() {
            let mut words = line.split_whitespace();
            match words.next() {
                Some("dim") => dim = words.next().and_then(|w| w.parse::<usize>().ok()),
                Some("s") => s = words.next().and_then(|w| w.parse::<f64>().ok()),
                Some("domain") => {
                    domain = Some(match (words.next(), words.next().map(str::parse::<f64>)) {
                        (Some("ball"), Some(Ok(r))) => Domain::ball(r)?,
                        (Some("shifted-ball"), Some(Ok(r))) => Domain::shifted_ball(r)?,
                        (Some("half-space"), None) => Domain::HalfSpace,
                        (Some("full-space"), None) => Domain::FullSpace,
                        _ => return Err(bad(n, "unknown domain")),
                    })
                }
                Some("exterior") => {
                    exterior = Some(match words.next() {
                        Some("zero") => ExteriorRule::Zero,
                        Some("provided-field") => ExteriorRule::Detached,
                        _ => return Err(bad(n, "unknown exterior rule")),
                    })
                }
                Some("axis") => {
                    let k: usize = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| bad(n, "axis index"))?;
                    let len: usize = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| bad(n, "axis length"))?;
                    let axis = words.map(str::parse::<f64>).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| bad(n, "axis value"))?;
                    if k != axes.len() || axis.len() != len {
                        return Err(bad(n, "axis out of order or wrong length"));
                    }
                    axes.push(axis);
                }
                Some("values") => break,
                _ => return Err(bad(n, "unexpected header line")),
            }
        }
        let dim = dim.ok_or_else(|| Error::Io("grid file: missing dim".into()))?;
        let s = s.ok_or_else(|| Error::Io("grid file: missing s".into()))?;
        let params = FracParams::new(dim, s)?;
        let mut values = Vec::new();
        for (n, line) in lines {
            let fields = line.split_whitespace().collect::<Vec<_>>();
            if fields.len() != dim + 1 {
                return Err(bad(n, "row must hold the node coordinates and one value"));
            }
            values.push(fields[dim].parse::<f64>().map_err(|_| bad(n, "value"))?);
        }
        GridFunction::new(
            params,
            domain.ok_or_else(|| Error::Io("grid file: missing domain".into()))?,
            axes,
            values,
            exterior.ok_or_else(|| Error::Io("grid file: missing exterior rule".into()))?,
        )
    }
}

/// `n` equispaced values on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Scientific notation with 17 significant digits (exact round trip).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn fill_node(axes: &[Vec<f64>], index: usize, node: &mut [f64]) {
    let mut rem = index;
    for k in (0..axes.len()).rev() {
        let len = axes[k].len();
        node[k] = axes[k][rem % len];
        rem /= len;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> FracParams {
        FracParams::new(n, 0.5).unwrap()
    }

    #[test]
    fn multilinear_is_exact_on_bilinear_functions() {
        let axes = vec![linspace(0.0, 2.0, 5), vec![-1.0, -0.2, 0.5, 1.0]];
        let f = |x: &[f64]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
        let g = GridFunction::from_fn(params(2), Domain::HalfSpace, axes, ExteriorRule::Zero, f).unwrap();
        for x in [[0.3, 0.1], [1.99, -0.99], [2.0, 1.0], [0.0, -1.0], [1.1, 0.75]] {
            assert!((g.eval(&x) - f(&x)).abs() < 1e-13);
        }
    }

    #[test]
    fn exterior_and_extrapolation() {
        let axes = vec![linspace(0.0, 1.0, 3), linspace(-1.0, 1.0, 3)];
        let g = GridFunction::from_fn(params(2), Domain::HalfSpace, axes, ExteriorRule::Zero, |x| x[0] + 1.0).unwrap();
        // below the half-space: zero
        assert_eq!(g.eval(&[-0.1, 0.0]), 0.0);
        let v = g.eval_flagged(&[1.5, 0.0]);
        assert!(v.extrapolated);
        assert_eq!(v.value, 2.0);
        assert!(!g.eval_flagged(&[0.5, 0.5]).extrapolated);

        let data = ScalarField::constant(7.0);
        let b = GridFunction::from_fn(params(1), Domain::ball(1.0).unwrap(), vec![linspace(-1.0, 1.0, 5)], ExteriorRule::Provided(data), |_| 1.0)
            .unwrap();
        assert_eq!(b.eval(&[3.0]), 7.0);
    }

    #[test]
    fn validation() {
        let p = params(1);
        assert!(GridFunction::new(p, Domain::HalfSpace, vec![vec![0.0, 0.0]], vec![1.0, 2.0], ExteriorRule::Zero).is_err());
        assert!(GridFunction::new(p, Domain::HalfSpace, vec![vec![0.0, 1.0]], vec![1.0], ExteriorRule::Zero).is_err());
        assert!(GridFunction::new(p, Domain::HalfSpace, vec![vec![0.0, 1.0]], vec![1.0, f64::NAN], ExteriorRule::Zero).is_err());
        assert!(GridFunction::new(p, Domain::HalfSpace, vec![vec![0.0], vec![1.0]], vec![1.0], ExteriorRule::Zero).is_err());
    }

    #[test]
    fn degenerate_axis() {
        let axes = vec![linspace(0.0, 1.0, 11), vec![0.0]];
        let g = GridFunction::from_fn(params(2), Domain::ball(2.0).unwrap(), axes, ExteriorRule::Zero, |x| x[0] * x[0]).unwrap();
        assert!((g.eval(&[0.5, 0.0]) - 0.25).abs() < 1e-12);
        let idx = g.node_indices(7);
        assert_eq!(g.flat_index(&idx), 7);
    }

    #[test]
    fn text_round_trip() {
        let axes = vec![linspace(0.0, 1.0, 4), linspace(-2.0, 2.0, 3)];
        let g = GridFunction::from_fn(params(2), Domain::HalfSpace, axes, ExteriorRule::Zero, |x| (x[0] * 3.3).sin() / 7.0 + x[1]).unwrap();
        let text = g.to_text();
        let back = GridFunction::from_text(&text).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(back.axes(), g.axes());
        assert_eq!(back.to_text(), text);
        assert!(GridFunction::from_text("dim 1\ns 0.5\ndomain moon\n").is_err());
    }
}
