//! Discrete half-space Green operator on a truncated box.
//!
//! A density on the box nodes is expanded in multilinear hat functions and
//! integrated exactly against `G_∞^+`, cell by cell. The lateral grid is
//! uniform, so the weights only depend on the normal indices of target and
//! source and on the absolute lateral offset; the tables are assembled once
//! and reused by every application.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernels;
use crate::params::{FracParams, Regime};
use crate::quadrature::rules::{integrate, integrate_nested, Estimate, GaussLegendre, Tol};
use crate::quadrature::{QuadratureSpec, SingularityStrategy};
use crate::solver::grid::linspace;

/// The truncation box `[0, depth] × [-half_width, half_width]^{N-1}` and its grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceBox {
    pub depth: f64,
    pub half_width: f64,
    pub normal_cells: usize,
    pub lateral_cells: usize,
}

impl HalfspaceBox {
    /// `[0, 4] × [-4, 4]^{N-1}` with a 40 × 80 grid in the plane, 80 cells on
    /// the line and 16 × 32 × 32 cells in space.
    pub fn default_for(dim: usize) -> Self {
        let (normal_cells, lateral_cells) = match dim {
            1 => (80, 0),
            2 => (40, 80),
            _ => (16, 32),
        };
        HalfspaceBox { depth: 4.0, half_width: 4.0, normal_cells, lateral_cells }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.depth > 0.0 && self.depth.is_finite()) || self.normal_cells == 0 {
            return Err(Error::InvalidParams("box needs a positive depth and at least one normal cell".into()));
        }
        if dim > 1 && (!(self.half_width > 0.0 && self.half_width.is_finite()) || self.lateral_cells == 0) {
            return Err(Error::InvalidParams("box needs a positive half width and at least one lateral cell".into()));
        }
        if dim > 3 {
            return Err(Error::Unsupported("half-space operator is implemented for N <= 3".into()));
        }
        Ok(())
    }

    pub fn axes(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut axes = vec![linspace(0.0, self.depth, self.normal_cells + 1)];
        for _ in 1..dim {
            axes.push(linspace(-self.half_width, self.half_width, self.lateral_cells + 1));
        }
        axes
    }

    fn lateral_step(&self) -> f64 {
        2.0 * self.half_width / self.lateral_cells as f64
    }
}

/// Assembled weights of the discrete operator.
#[derive(Clone, Debug)]
pub struct HalfspaceOperator {
    dim: usize,
    normal_nodes: usize,
    lateral_nodes: usize,
    /// `weights[(i * normal_nodes + j) * offsets + m]` with `m` the flattened
    /// absolute lateral offset.
    weights: Vec<f64>,
    offsets: usize,
}

impl HalfspaceOperator {
    pub fn assemble(params: &FracParams, bx: &HalfspaceBox, spec: &QuadratureSpec) -> Result<Self> {
        let dim = params.dim();
        bx.validate(dim)?;
        spec.validate()?;
        let kernels = Kernels::new(*params);
        let normal = linspace(0.0, bx.depth, bx.normal_cells + 1);
        let lateral_nodes = if dim > 1 { bx.lateral_cells + 1 } else { 1 };
        let offsets = lateral_nodes.pow(dim as u32 - 1);
        let h = if dim > 1 { bx.lateral_step() } else { 0.0 };
        let rows = (0..normal.len())
            .into_par_iter()
            .map(|i| assemble_row(&kernels, &normal, i, h, bx.lateral_cells, spec))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(HalfspaceOperator { dim, normal_nodes: normal.len(), lateral_nodes, weights: rows.concat(), offsets })
    }

    pub fn node_count(&self) -> usize {
        self.normal_nodes * self.offsets
    }

    /// `(K ρ)(x_i) = Σ_j w_ij ρ_j` for a density given at the box nodes (row-major,
    /// normal index slowest).
    pub fn apply(&self, density: &[f64]) -> Vec<f64> {
        assert_eq!(density.len(), self.node_count(), "density does not match the box grid");
        (0..self.node_count()).into_par_iter().map(|node| self.apply_at(node, density)).collect()
    }

    fn apply_at(&self, node: usize, density: &[f64]) -> f64 {
        let l = self.lateral_nodes;
        let i = node / self.offsets;
        let rest = node % self.offsets;
        let mut total = 0.0;
        for j in 0..self.normal_nodes {
            let table = &self.weights[(i * self.normal_nodes + j) * self.offsets..][..self.offsets];
            let block = &density[j * self.offsets..][..self.offsets];
            total += match self.dim {
                1 => table[0] * block[0],
                2 => (0..l).map(|jt| table[rest.abs_diff(jt)] * block[jt]).sum::<f64>(),
                _ => {
                    let (ia, ib) = (rest / l, rest % l);
                    let mut sum = 0.0;
                    for ja in 0..l {
                        let row = &table[ia.abs_diff(ja) * l..][..l];
                        let src = &block[ja * l..][..l];
                        for jb in 0..l {
                            sum += row[ib.abs_diff(jb)] * src[jb];
                        }
                    }
                    sum
                }
            };
        }
        total
    }
}

/// Weights of all sources for the targets with normal index `i`.
fn assemble_row(kernels: &Kernels, normal: &[f64], i: usize, h: f64, lateral_cells: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let dim = kernels.params().dim();
    let l = if dim > 1 { lateral_cells + 1 } else { 1 };
    let offsets = l.pow(dim as u32 - 1);
    let mut row = vec![0.0; normal.len() * offsets];
    let x1 = normal[i];
    if x1 == 0.0 {
        return Ok(row);
    }
    let corners = 1usize << dim;
    // Cells with nonnegative lateral offsets, one beyond the box so the edge
    // hats are complete; the rest follow by reflection.
    let cell_offsets: Vec<Vec<usize>> = lateral_multi_indices(dim - 1, lateral_cells);
    let mut moments = vec![0.0; corners];
    for c1 in 0..normal.len() - 1 {
        let (a1, b1) = (normal[c1], normal[c1 + 1]);
        for d in &cell_offsets {
            let mut lower = vec![a1];
            let mut upper = vec![b1];
            for &dk in d {
                lower.push(dk as f64 * h);
                upper.push((dk + 1) as f64 * h);
            }
            let apex = if d.iter().all(|&dk| dk == 0) && (i == c1 || i == c1 + 1) { Some(i == c1 + 1) } else { None };
            match apex {
                Some(at_top) => singular_cell(kernels, x1, &lower, &upper, at_top, spec, &mut moments)?,
                None => regular_cell(kernels, x1, &lower, &upper, c1 == 0, &mut moments),
            }
            for (corner, m) in moments.iter().enumerate() {
                let j = c1 + (corner & 1);
                let mut flat = 0;
                let mut factor = 1.0;
                for (k, &dk) in d.iter().enumerate() {
                    let off = dk + (corner >> (k + 1) & 1);
                    if off >= l {
                        flat = usize::MAX;
                        break;
                    }
                    if off == 0 {
                        factor *= 2.0;
                    }
                    flat = flat * l + off;
                }
                if flat != usize::MAX {
                    row[j * offsets + flat] += factor * m;
                }
            }
        }
    }
    Ok(row)
}

fn lateral_multi_indices(count: usize, cells: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..count {
        out = out.into_iter().flat_map(|prefix| (0..=cells).map(move |c| [prefix.clone(), vec![c]].concat())).collect();
    }
    out
}

fn target(dim: usize, x1: f64) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    x[0] = x1;
    x
}

/// Value of the hat function of `corner` at cell coordinates `z ∈ [0, 1]^N`
/// (bit `k` of `corner` selects the upper end along axis `k`).
#[inline]
fn corner_weight(corner: usize, z: &[f64]) -> f64 {
    z.iter().enumerate().map(|(k, &zk)| if corner >> k & 1 == 1 { zk } else { 1.0 - zk }).product()
}

/// Tensor Gauss rule whose order grows as the cell approaches the target.
/// Cells touching `y_1 = 0` use `y_1 = a + (b - a) v^2` against the `y_1^s` edge.
fn regular_cell(kernels: &Kernels, x1: f64, lower: &[f64], upper: &[f64], bottom: bool, moments: &mut [f64]) {
    let dim = lower.len();
    let x = target(dim, x1);
    let mut dist2 = 0.0;
    let mut diam2 = 0.0;
    for k in 0..dim {
        let gap = (lower[k] - x[k]).max(x[k] - upper[k]).max(0.0);
        dist2 += gap * gap;
        diam2 += (upper[k] - lower[k]).powi(2);
    }
    let ratio = (dist2 / diam2).sqrt();
    let order = match ratio {
        r if r < 1.0 => 8,
        r if r < 2.0 => 6,
        r if r < 4.0 => 4,
        r if r < 8.0 => 3,
        _ => 2,
    };
    let rule = GaussLegendre::new(order);
    let volume: f64 = lower.iter().zip(upper).map(|(a, b)| b - a).product();
    moments.iter_mut().for_each(|m| *m = 0.0);
    let mut z = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let points = order.pow(dim as u32);
    for p in 0..points {
        let mut rem = p;
        let mut weight = volume;
        for k in 0..dim {
            let q = rem % order;
            rem /= order;
            let u = 0.5 * (rule.nodes[q] + 1.0);
            let mut w = 0.5 * rule.weights[q];
            if k == 0 && bottom {
                w *= 2.0 * u;
                z[k] = u * u;
            } else {
                z[k] = u;
            }
            weight *= w;
            y[k] = lower[k] + z[k] * (upper[k] - lower[k]);
        }
        let g = kernels.green_core(crate::kernels::dist2(&x, &y), 4.0 * x1 * y[0]);
        for (corner, m) in moments.iter_mut().enumerate() {
            *m += weight * g * corner_weight(corner, &z);
        }
    }
}

/// Grading exponent for the pyramid coordinate `t = v^p` so that
/// `t^{N-1} G ~ t^{2s-1}` becomes bounded in `v`.
fn radial_grading(params: &FracParams) -> f64 {
    match params.regime() {
        Regime::Transient => (1.0 / (2.0 * params.s())).max(1.0),
        Regime::Critical => 3.0,
        Regime::Recurrent => 1.0,
    }
}

/// Cell with the target at one corner: split into `N` pyramids with apex at
/// the target, each mapped to the unit cube by `ξ_k = t`, `ξ_j = t w_j`.
fn singular_cell(
    kernels: &Kernels,
    x1: f64,
    lower: &[f64],
    upper: &[f64],
    at_top: bool,
    spec: &QuadratureSpec,
    moments: &mut [f64],
) -> Result<()> {
    let dim = lower.len();
    let x = target(dim, x1);
    let size: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| b - a).collect();
    let volume: f64 = size.iter().product();
    let p = radial_grading(kernels.params());
    // cell coordinates of the apex
    let apex: Vec<f64> = (0..dim).map(|k| if k == 0 && at_top { 1.0 } else { 0.0 }).collect();
    let integrand = |pyramid: usize, corner: usize, coords: &[f64]| -> f64 {
        // coords = (w_1, ..., w_{N-1}, v)
        let v = coords[dim - 1];
        if v <= 0.0 {
            return 0.0;
        }
        let t = v.powf(p);
        let jac = p * v.powf(p - 1.0) * t.powi(dim as i32 - 1) * volume;
        let mut z = [0.0; 3];
        let mut y = [0.0; 3];
        let mut w_iter = coords[..dim - 1].iter();
        for k in 0..dim {
            let xi = if k == pyramid { t } else { t * w_iter.next().copied().unwrap_or(0.0) };
            z[k] = if apex[k] == 1.0 { 1.0 - xi } else { xi };
            y[k] = lower[k] + z[k] * size[k];
        }
        let g = kernels.green_core(crate::kernels::dist2(&x, &y[..dim]), 4.0 * x1 * y[0]);
        if !g.is_finite() {
            return 0.0;
        }
        jac * g * corner_weight(corner, &z[..dim])
    };
    for (corner, m) in moments.iter_mut().enumerate() {
        *m = 0.0;
        for pyramid in 0..dim {
            let est = match spec.singularity_strategy {
                SingularityStrategy::DuffySplit => tensor_cube(dim, |c| integrand(pyramid, corner, c)),
                SingularityStrategy::PolarSubtraction => {
                    let tol = Tol::new(spec.abs_tol * volume, spec.rel_tol);
                    let est = adaptive_cube(dim, &mut |c: &[f64]| integrand(pyramid, corner, c), tol, spec.max_refinements);
                    if !est.converged || !est.value.is_finite() {
                        return Err(Error::ToleranceNotMet { estimate: est.value, error: est.error });
                    }
                    est.value
                }
            };
            *m += est;
        }
    }
    Ok(())
}

const DUFFY_RADIAL: usize = 12;
const DUFFY_ANGULAR: usize = 8;

/// Fixed tensor rule on `[0, 1]^dim`, last coordinate radial.
fn tensor_cube(dim: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let radial = GaussLegendre::new(DUFFY_RADIAL);
    let angular = GaussLegendre::new(DUFFY_ANGULAR);
    let rules: Vec<&GaussLegendre> = (0..dim).map(|k| if k == dim - 1 { &radial } else { &angular }).collect();
    let mut total = 0.0;
    let count: usize = rules.iter().map(|r| r.len()).product();
    let mut c = vec![0.0; dim];
    for p in 0..count {
        let mut rem = p;
        let mut w = 1.0;
        for (k, r) in rules.iter().enumerate() {
            let q = rem % r.len();
            rem /= r.len();
            c[k] = 0.5 * (r.nodes[q] + 1.0);
            w *= 0.5 * r.weights[q];
        }
        total += w * f(&c);
    }
    total
}

/// Nested adaptive integration over `[0, 1]^dim`.
fn adaptive_cube(dim: usize, f: &mut dyn FnMut(&[f64]) -> f64, tol: Tol, depth: u32) -> Estimate {
    let mut point = vec![0.0; dim];
    nested_level(0, &mut point, f, tol, depth)
}

fn nested_level(level: usize, point: &mut Vec<f64>, f: &mut dyn FnMut(&[f64]) -> f64, tol: Tol, depth: u32) -> Estimate {
    if level + 1 == point.len() {
        return integrate(
            |t| {
                point[level] = t;
                f(point)
            },
            0.0,
            1.0,
            &[],
            tol,
            depth,
        );
    }
    integrate_nested(
        |t| {
            point[level] = t;
            let e = nested_level(level + 1, point, f, tol.nested(), depth);
            (e.value, e.error)
        },
        0.0,
        1.0,
        &[],
        tol,
        depth,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{halfspace_green_integral, ScalarField, Support};

    fn small_box(dim: usize) -> HalfspaceBox {
        HalfspaceBox { depth: 1.0, half_width: 1.0, normal_cells: 8, lateral_cells: 16 }.with_dim(dim)
    }

    impl HalfspaceBox {
        fn with_dim(mut self, dim: usize) -> Self {
            if dim == 1 {
                self.lateral_cells = 0;
            }
            self
        }
    }

    /// Row sums against the directly integrated box indicator.
    #[test]
    fn unit_density_matches_box_integral() {
        for (n, s) in [(1, 0.5), (1, 0.75), (2, 0.5), (2, 0.25)] {
            let p = FracParams::new(n, s).unwrap();
            let bx = small_box(n);
            let spec = QuadratureSpec::with_tolerances(1e-9, 1e-12);
            let op = HalfspaceOperator::assemble(&p, &bx, &spec).unwrap();
            let out = op.apply(&vec![1.0; op.node_count()]);
            let mut lower = vec![0.0];
            let mut upper = vec![1.0];
            // lateral edge hats are full hats: the effective box is one half cell wider
            let h = if n > 1 { bx.lateral_step() } else { 0.0 };
            for _ in 1..n {
                lower.push(-1.0 - h);
                upper.push(1.0 + h);
            }
            let f = ScalarField::constant(1.0).with_support(Support::Box { lower, upper });
            let lateral_mid = if n > 1 { bx.lateral_cells / 2 } else { 0 };
            for i in [2usize, 4, 8] {
                let x = target(n, i as f64 / 8.0);
                let node = i * op.offsets + lateral_mid;
                let direct = halfspace_green_integral(&p, &f, &x, &QuadratureSpec::with_tolerances(1e-9, 1e-12)).unwrap().value();
                // the hat expansion of 1 is exact inside; near the lateral edge it
                // tapers over one cell, a lower order effect at the centre
                assert!((out[node] / direct - 1.0).abs() < 2e-2, "N={n} s={s} x1={}: {} vs {direct}", x[0], out[node]);
            }
        }
    }

    #[test]
    fn strategies_agree() {
        let p = FracParams::new(2, 0.3).unwrap();
        let bx = HalfspaceBox { depth: 1.0, half_width: 0.5, normal_cells: 4, lateral_cells: 4 };
        let polar = HalfspaceOperator::assemble(&p, &bx, &QuadratureSpec::with_tolerances(1e-10, 1e-14)).unwrap();
        let duffy = HalfspaceOperator::assemble(
            &p,
            &bx,
            &QuadratureSpec { singularity_strategy: SingularityStrategy::DuffySplit, ..QuadratureSpec::with_tolerances(1e-10, 1e-14) },
        )
        .unwrap();
        let rho: Vec<f64> = (0..polar.node_count()).map(|k| 1.0 + (k as f64 * 0.37).sin()).collect();
        let a = polar.apply(&rho);
        let b = duffy.apply(&rho);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-4 * u.abs().max(1e-3), "{u} vs {v}");
        }
    }

    #[test]
    fn weights_are_nonnegative_and_rows_vanish_on_the_boundary() {
        let p = FracParams::new(2, 0.5).unwrap();
        let op = HalfspaceOperator::assemble(&p, &small_box(2), &QuadratureSpec::with_tolerances(1e-8, 1e-12)).unwrap();
        assert!(op.weights.iter().all(|w| *w >= 0.0));
        let out = op.apply(&vec![1.0; op.node_count()]);
        assert!(out[..op.offsets].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lateral_symmetry() {
        let p = FracParams::new(3, 0.5).unwrap();
        let bx = HalfspaceBox { depth: 1.0, half_width: 1.0, normal_cells: 3, lateral_cells: 4 };
        let op = HalfspaceOperator::assemble(&p, &bx, &QuadratureSpec::with_tolerances(1e-7, 1e-11)).unwrap();
        // density symmetric under both lateral reflections
        let l = 5;
        let rho: Vec<f64> = (0..op.node_count())
            .map(|k| {
                let (i, a, b) = (k / (l * l), (k / l) % l, k % l);
                let (da, db) = (a.abs_diff(2) as f64, b.abs_diff(2) as f64);
                1.0 + i as f64 + 0.3 * da + 0.1 * db * db
            })
            .collect();
        let out = op.apply(&rho);
        for i in 0..4 {
            for a in 0..l {
                for b in 0..l {
                    let v = out[(i * l + a) * l + b];
                    let m = out[(i * l + (l - 1 - a)) * l + (l - 1 - b)];
                    assert!((v - m).abs() <= 1e-12 * v.abs().max(1e-300));
                }
            }
        }
    }
}
