//! Checks on solutions of ball problems: the torsion profile, s-harmonicity
//! of Poisson extensions, boundary decay, the mollified mean-value identity
//! and interior Hölder quotients.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::fit::log_log_slope;
use super::kernel_checks::unit_vector;
use super::report::{Relation, Report};
use super::{check_rng, max_finite, params_value, tag};
use crate::error::{Error, Result};
use crate::kernels::{norm2, Kernels};
use crate::params::FracParams;
use crate::quadrature::rules::{integrate, integrate_clustered};
use crate::quadrature::{
    frac_laplacian_point, Estimate, ExtensionResolution, PoissonExtension, QuadratureSpec, ScalarField, Smoothness, Support, Tol,
};
use crate::solver::{holder_estimate_check, linspace, solve_ball_dirichlet, GridFunction};
use crate::special::gamma;

pub(crate) const HARMONIC_PARAMS: &[(usize, f64)] = &[(1, 0.25), (1, 0.75), (2, 0.5)];
pub(crate) const BOUNDARY_PARAMS: &[(usize, f64)] = &[(2, 0.3), (2, 0.5), (1, 0.5), (1, 0.75)];
pub(crate) const MEANVALUE_PARAMS: &[(usize, f64)] = &[(1, 0.25), (2, 0.5)];

/// `λ_{N,s} = 4^s Γ(1+s) Γ(N/2+s) / Γ(N/2)`, so that `(-Δ)^s (1-|x|²)_+^s = λ_{N,s}` in `B_1`.
pub(crate) fn getoor_constant(p: &FracParams) -> f64 {
    let s = p.s();
    let h = p.half_dim();
    4f64.powf(s) * gamma(1.0 + s) * gamma(h + s) / gamma(h)
}

/// Smooth bump `exp(-1/(1 - |y - c|²/r²))` supported in `B_r(c)`.
fn bump_data(center: Vec<f64>, radius: f64) -> ScalarField {
    let c = center.clone();
    ScalarField::new(move |y: &[f64]| {
        let t = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (radius * radius);
        if t < 1.0 {
            (-1.0 / (1.0 - t)).exp()
        } else {
            0.0
        }
    })
    .with_smoothness(Smoothness::C2)
    .with_support(Support::Ball { center, radius })
    .with_bound(1.0)
}

/// Exterior data used for s-harmonic test functions: a bump outside `B_1`.
fn exterior_bump(dim: usize) -> (Vec<f64>, f64, ScalarField) {
    let center = if dim == 1 { vec![2.0] } else { vec![2.5, 1.0] };
    (center.clone(), 0.5, bump_data(center, 0.5))
}

fn getoor_axes(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![linspace(-1.0, 1.0, 41)],
        2 => vec![linspace(-1.0, 1.0, 21); 2],
        _ => vec![linspace(-1.0, 1.0, 9); dim],
    }
}

/// Ball solve with `f = 1`, `g = 0` against `(1 - |x|²)^s / λ_{N,s}` on `|x| <= 0.9`.
pub fn check_ball_torsion(list: &[FracParams], spec: &QuadratureSpec, seed: u64) -> Result<Report> {
    const ID: &str = "ball-torsion";
    let mut r = Report::new(ID, seed);
    r.param("params", params_value(list)).param("radius", 1.0).param("compare_radius", 0.9);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut short = 0usize;
    for p in list {
        let sol = solve_ball_dirichlet(p, 1.0, &ScalarField::constant(1.0).with_bound(1.0), &ScalarField::zero(), getoor_axes(p.dim()), spec)?;
        let lambda = getoor_constant(p);
        let u = &sol.field;
        let err = max_finite((0..u.len()).filter_map(|i| {
            let x = u.node(i);
            let n2 = norm2(&x);
            (n2 <= 0.81 + 1e-12).then(|| (u.values()[i] - (1.0 - n2).powf(p.s()) / lambda).abs())
        }));
        samples += u.len();
        short += sol.node_errors.len();
        r.measure(&format!("{}.max_abs_error", tag(p)), err);
        worst = worst.max(err);
    }
    r.samples = samples;
    r.measure("max_abs_error", worst).measure("nodes_short_of_tolerance", short as f64);
    r.require("max_abs_error", Relation::AtMost, "max_abs_error_tol", 1e-3);
    Ok(r.finish())
}

/// Splits `total` points over `list` in proportion to the dimension.
fn share(list: &[FracParams], total: usize) -> Vec<usize> {
    let weight: usize = list.iter().map(|p| p.dim()).sum();
    let mut out: Vec<usize> = list.iter().map(|p| total * p.dim() / weight).collect();
    let used: usize = out.iter().sum();
    if let Some(last) = out.last_mut() {
        *last += total - used;
    }
    out
}

/// Random interior point with `|x| <= radius`.
fn interior_point(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let dir = unit_vector(rng, dim);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|d| r * d).collect()
}

/// `|(-Δ)^s u(x)|` at interior points for the Poisson extension `u` of a
/// smooth bump outside the unit ball.
pub fn check_s_harmonicity(list: &[FracParams], points: usize, spec: &QuadratureSpec, seed: u64) -> Result<Report> {
    const ID: &str = "s-harmonicity";
    let mut rng = check_rng(seed, ID);
    let laplacian_spec = QuadratureSpec { abs_tol: 1e-8, ..*spec };
    let mut r = Report::new(ID, seed);
    r.param("params", params_value(list)).param("points", points).param("max_point_radius", 0.9);
    r.param("exterior_data", "bump of radius 0.5 centred at (2) or (2.5, 1)");
    let mut worst: f64 = 0.0;
    for (p, count) in list.iter().zip(share(list, points)) {
        let (_, _, g) = exterior_bump(p.dim());
        let u = PoissonExtension::new(p, 1.0, &g, ExtensionResolution::default(), spec)?.into_field(g);
        let xs: Vec<Vec<f64>> = (0..count).map(|_| interior_point(&mut rng, p.dim(), 0.9)).collect();
        let values = xs
            .par_iter()
            .map(|x| frac_laplacian_point(p, &u, x, &laplacian_spec).map(|e| e.value.abs()))
            .collect::<Result<Vec<f64>>>()?;
        let m = max_finite(values.iter().copied());
        r.measure(&format!("{}.max_abs_laplacian", tag(p)), m);
        worst = worst.max(m);
    }
    r.samples = points;
    r.measure("max_abs_laplacian", worst);
    r.require("max_abs_laplacian", Relation::AtMost, "max_abs_laplacian_tol", 1e-4);
    Ok(r.finish())
}

/// Fits `ln u(x)` against `ln(1 - |x|)` for ball potentials of `f = 1` on
/// nodes with `1 - |x| ∈ [1e-3, 1e-1]`. The exponent must be at least
/// `s - 0.05`, or `s - 1/2 - 0.05` when `N = 1 < 2s`. `f = 0` gives `u = 0`,
/// which is reported as degenerate and not fitted.
pub fn check_boundary_estimate(list: &[FracParams], spec: &QuadratureSpec, seed: u64) -> Result<Report> {
    const ID: &str = "boundary-estimate";
    let distances: Vec<f64> = linspace(-3.0, -1.0, 13).into_iter().map(|e| 10f64.powf(e)).collect();
    let mut normal: Vec<f64> = vec![0.0, 0.5];
    normal.extend(distances.iter().rev().map(|d| 1.0 - d));
    let mut r = Report::new(ID, seed);
    r.param("params", params_value(list)).param("fit_window", json!([1e-3, 1e-1])).param("fit_nodes", distances.len());
    r.param("data", json!(["f = 1", "f = 0"]));
    let mut worst_margin = f64::INFINITY;
    let mut degenerate = 0usize;
    let mut samples = 0;
    for p in list {
        let mut axes = vec![normal.clone()];
        axes.extend(std::iter::repeat_n(vec![0.0], p.dim() - 1));
        let one = ScalarField::constant(1.0).with_bound(1.0);
        let sol = solve_ball_dirichlet(p, 1.0, &one, &ScalarField::zero(), axes.clone(), spec)?;
        let zero = solve_ball_dirichlet(p, 1.0, &ScalarField::zero(), &ScalarField::zero(), axes, spec)?;
        if zero.field.sup_norm() == 0.0 {
            degenerate += 1;
        }
        samples += 2 * normal.len();
        let (d, v): (Vec<f64>, Vec<f64>) =
            (0..sol.field.len()).map(|i| (1.0 - sol.field.node(i)[0], sol.field.values()[i])).unzip();
        let fit = log_log_slope(&d, &v, 1e-3 * (1.0 - 1e-9), 1e-1 * (1.0 + 1e-9))
            .ok_or_else(|| Error::InvalidParams("boundary fit needs at least two positive values".into()))?;
        let s = p.s();
        let target = if p.dim() == 1 && 2.0 * s > 1.0 { s - 0.5 } else { s };
        let t = tag(p);
        r.measure(&format!("{t}.slope"), fit.slope);
        r.measure(&format!("{t}.expected_exponent"), target);
        r.measure(&format!("{t}.fit_points"), fit.points as f64);
        worst_margin = worst_margin.min(fit.slope - (target - 0.05));
    }
    r.samples = samples;
    r.measure("min_slope_margin", worst_margin).measure("degenerate_zero_runs", degenerate as f64);
    r.require("min_slope_margin", Relation::AtLeast, "slope_margin_min", 0.0);
    Ok(r.finish())
}

/// Angles `θ` (about `x`, radius `ρ`) where the circle `|x + ρ e^{iθ} - c| = R` is crossed.
fn circle_crossings(x: &[f64], rho: f64, c: &[f64], radius: f64) -> Vec<f64> {
    let v = [c[0] - x[0], c[1] - x[1]];
    let d = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if d == 0.0 {
        return Vec::new();
    }
    let cos = (rho * rho + d * d - radius * radius) / (2.0 * rho * d);
    if cos.abs() >= 1.0 {
        return Vec::new();
    }
    let phi = v[1].atan2(v[0]);
    let a = cos.acos();
    vec![phi - a, phi + a]
}

/// Integral over `[a, b]` split at `breaks`, each piece with nodes clustered at both ends.
fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: Tol) -> Estimate {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|t| *t > a && *t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .map(|w| integrate_clustered(&f, w[0], w[1], true, true, tol, 30))
        .fold(Estimate::exact(0.0), Estimate::combine)
}

/// Spherical mean `∫_{S^{N-1}} u(x + ρθ) dθ` for `N <= 2`, with angular breaks
/// where the circle meets the given interface spheres.
fn sphere_integral(u: &ScalarField, x: &[f64], rho: f64, spheres: &[(Vec<f64>, f64)], tol: Tol) -> Estimate {
    if x.len() == 1 {
        return Estimate::exact(u.eval(&[x[0] + rho]) + u.eval(&[x[0] - rho]));
    }
    let mut breaks: Vec<f64> = spheres.iter().flat_map(|(c, r)| circle_crossings(x, rho, c, *r)).collect();
    let start = breaks.first().copied().unwrap_or(0.0);
    for b in &mut breaks {
        *b = start + (*b - start).rem_euclid(2.0 * PI);
    }
    integrate_pieces(|t| u.eval(&[x[0] + rho * t.cos(), x[1] + rho * t.sin()]), start, start + 2.0 * PI, &breaks, tol)
}

/// `(Γ̃_ε * u)(x) = ∫ Γ̃_ε(y) u(x - y) dy` in polar coordinates about `x`,
/// for `N <= 2` and `x ∈ Ω_ε = {|x| < 1 - ε}`. `spheres` are the interfaces
/// (centre, radius) of `u`; `outer` bounds the support of `u` when it is compact.
pub fn mean_value_convolution(
    params: &FracParams,
    eps: f64,
    u: &ScalarField,
    x: &[f64],
    spheres: &[(Vec<f64>, f64)],
    outer: Option<f64>,
) -> Result<f64> {
    let dim = params.dim();
    if dim > 2 || x.len() != dim {
        return Err(Error::Unsupported("mean-value convolution is implemented for N <= 2".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParams(format!("mollifier scale must lie in (0, 1), got {eps}")));
    }
    let nx = norm2(x).sqrt();
    if nx >= 1.0 - eps {
        return Err(Error::Domain(format!("point with |x| = {nx} lies outside Ω_ε for ε = {eps}")));
    }
    let k = Kernels::new(*params);
    let tol = Tol::new(1e-10, 1e-9);
    let inner = Tol::new(1e-11, 1e-10);
    let rho_factor = |rho: f64| if dim == 1 { 1.0 } else { rho };
    let radial = |rho: f64| {
        let w = k.regularized_unit(rho / eps) / eps.powi(dim as i32) * rho_factor(rho);
        if w == 0.0 {
            0.0
        } else {
            w * sphere_integral(u, x, rho, spheres, inner).value
        }
    };
    let mut breaks = vec![eps, 0.75 * eps];
    for (c, r) in spheres {
        let d = norm2(&c.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt();
        breaks.extend([(d - r).abs(), d + r]);
    }
    match outer {
        Some(outer) => {
            let est = integrate_pieces(radial, 0.5 * eps, nx + outer, &breaks, tol);
            Ok(est.value)
        }
        None => {
            // ρ = ρ_c σ^{-1/(2s)} on the tail beyond every interface.
            let rho_c = breaks.iter().fold(eps, |m, b| m.max(*b));
            let head = integrate_pieces(&radial, 0.5 * eps, rho_c, &breaks, tol);
            let q = 1.0 / (2.0 * params.s());
            let tail = integrate(
                |sigma| {
                    let rho = rho_c * sigma.powf(-q);
                    if rho.is_finite() {
                        radial(rho) * rho * q / sigma
                    } else {
                        0.0
                    }
                },
                0.0,
                1.0,
                &[],
                tol,
                30,
            );
            Ok(head.value + tail.value)
        }
    }
}

/// `|u(x) - (Γ̃_ε * u)(x)|` for the Poisson extension `u` of a bump outside
/// `B_1`, at random points of `Ω_ε`, plus the constant case `g = 1` (`u = 1`)
/// whose error is the kernel-mass error.
pub fn check_harmonicity_meanvalue(list: &[FracParams], eps_list: &[f64], spec: &QuadratureSpec, seed: u64) -> Result<Report> {
    const ID: &str = "harmonicity-meanvalue";
    const POINTS: usize = 3;
    let mut rng = check_rng(seed, ID);
    let mut r = Report::new(ID, seed);
    r.param("params", params_value(list)).param("eps", eps_list.to_vec()).param("points_per_eps", POINTS);
    let mut worst: f64 = 0.0;
    let mut mass_worst: f64 = 0.0;
    let mut samples = 0;
    for p in list {
        let dim = p.dim();
        let (centre, radius, g) = exterior_bump(dim);
        let u = PoissonExtension::new(p, 1.0, &g, ExtensionResolution::default(), spec)?.into_field(g);
        let spheres = vec![(vec![0.0; dim], 1.0), (centre.clone(), radius)];
        let outer = norm2(&centre).sqrt() + radius;
        let one = ScalarField::constant(1.0);
        let mut per_eps = Vec::new();
        for &eps in eps_list {
            let xs: Vec<Vec<f64>> = (0..POINTS).map(|_| interior_point(&mut rng, dim, 1.0 - eps - 1e-3)).collect();
            let errors = xs
                .par_iter()
                .map(|x| {
                    let conv = mean_value_convolution(p, eps, &u, x, &spheres, Some(outer))?;
                    Ok((u.eval(x) - conv).abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            let mass = mean_value_convolution(p, eps, &one, &vec![0.0; dim], &[], None)?;
            let e = max_finite(errors.iter().copied());
            per_eps.push(e);
            r.measure(&format!("{}.eps{eps}.max_abs_error", tag(p)), e);
            worst = worst.max(e);
            mass_worst = mass_worst.max((mass - 1.0).abs());
            samples += POINTS + 1;
        }
        let increases = per_eps.windows(2).filter(|w| w[1] > w[0]).count();
        r.detail(&format!("{}.error_by_eps", tag(p)), per_eps.clone());
        r.detail(&format!("{}.error_increases_as_eps_shrinks", tag(p)), increases);
    }
    r.samples = samples;
    r.measure("max_abs_error", worst).measure("kernel_mass_error", mass_worst);
    r.require("max_abs_error", Relation::AtMost, "max_abs_error_tol", 1e-4);
    r.require("kernel_mass_error", Relation::AtMost, "kernel_mass_tol", 1e-6);
    Ok(r.finish())
}

/// Interior Hölder quotients (`α = min(1, 2s)/2`, `|x| < 0.51`) of ball
/// solutions with `g = 0` for `f = 1` and `f = cos(6πx)`, on 41 and 81
/// nodes. The refined bound ratio may not exceed the coarse one beyond a
/// relative `1e-6` allowance for quadrature noise.
pub fn check_holder(list: &[FracParams], spec: &QuadratureSpec, seed: u64) -> Result<Report> {
    const ID: &str = "holder";
    const SLACK: f64 = 1e-6;
    const INNER: f64 = 0.51;
    let data: Vec<(&str, ScalarField)> = vec![
        ("constant", ScalarField::constant(1.0).with_bound(1.0)),
        ("oscillatory", ScalarField::new(|x: &[f64]| (6.0 * PI * x[0]).cos()).with_bound(1.0)),
    ];
    let mut r = Report::new(ID, seed);
    r.param("params", params_value(list)).param("nodes", json!([41, 81])).param("inner_radius", INNER);
    r.param("data", json!(["1", "cos(6 pi x_1)"]));
    let mut worst_growth = f64::NEG_INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let mut samples = 0;
    for p in list {
        if p.dim() != 1 {
            return Err(Error::Unsupported("the Hölder check runs on one-dimensional grids".into()));
        }
        let alpha = 0.5 * (2.0 * p.s()).min(1.0);
        for (name, f) in &data {
            let ratios = [41usize, 81]
                .iter()
                .map(|&n| {
                    let sol = solve_ball_dirichlet(p, 1.0, f, &ScalarField::zero(), vec![linspace(-1.0, 1.0, n)], spec)?;
                    let u: &GridFunction = &sol.field;
                    holder_estimate_check(u, f, INNER, alpha)
                })
                .collect::<Result<Vec<_>>>()?;
            samples += 41 + 81;
            let t = format!("{}.{name}", tag(p));
            r.measure(&format!("{t}.alpha"), alpha);
            r.measure(&format!("{t}.bound_ratio_coarse"), ratios[0].bound_ratio);
            r.measure(&format!("{t}.bound_ratio_fine"), ratios[1].bound_ratio);
            let growth = ratios[1].bound_ratio / ratios[0].bound_ratio - 1.0;
            worst_growth = worst_growth.max(if growth.is_nan() { f64::INFINITY } else { growth });
            worst_ratio = max_finite([worst_ratio, ratios[0].bound_ratio, ratios[1].bound_ratio]);
        }
    }
    r.samples = samples;
    r.measure("max_bound_ratio", worst_ratio).measure("max_refinement_growth", worst_growth);
    r.require("max_bound_ratio", Relation::Below, "finite_ratio_cap", f64::MAX);
    r.require("max_refinement_growth", Relation::AtMost, "refinement_growth_slack", SLACK);
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, s: f64) -> FracParams {
        FracParams::new(n, s).unwrap()
    }

    #[test]
    fn getoor_constant_spot_values() {
        assert!((getoor_constant(&p(1, 0.5)) - 1.0).abs() < 1e-14);
        // N = 2, s = 1/2: 2 Γ(3/2) Γ(3/2) / Γ(1) = π/2
        assert!((getoor_constant(&p(2, 0.5)) - 0.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn kernel_mass_and_constant_convolution() {
        for (n, s) in [(1, 0.25), (1, 0.75), (2, 0.5)] {
            let q = p(n, s);
            let one = ScalarField::constant(1.0);
            let mass = mean_value_convolution(&q, 0.3, &one, &vec![0.0; n], &[], None).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "N={n} s={s}: {mass}");
        }
        let q = p(1, 0.5);
        let one = ScalarField::constant(1.0);
        assert!(matches!(mean_value_convolution(&q, 0.3, &one, &[0.75], &[], None), Err(Error::Domain(_))));
    }

    #[test]
    fn torsion_and_boundary_in_one_dimension() {
        let spec = QuadratureSpec::default();
        let r = check_ball_torsion(&[p(1, 0.5)], &spec, 0).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        let r = check_boundary_estimate(&[p(1, 0.5)], &spec, 0).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        assert!((r.measured["N1_s0.5.slope"] - 0.5).abs() < 0.01);
        assert_eq!(r.measured["degenerate_zero_runs"], 1.0);
    }

    #[test]
    fn holder_ratio_is_finite_and_creeps_up_under_refinement() {
        // The finer grid contains the coarser one, so its discrete supremum
        // can only grow; the growth stays small.
        let r = check_holder(&[p(1, 0.5)], &QuadratureSpec::default(), 0).unwrap();
        assert!(r.measured["max_bound_ratio"].is_finite());
        let growth = r.measured["max_refinement_growth"];
        assert!((0.0..0.05).contains(&growth), "{growth}");
    }

    #[test]
    fn shares_follow_dimension() {
        let list = [p(1, 0.25), p(1, 0.75), p(2, 0.5)];
        assert_eq!(share(&list, 20), vec![5, 5, 10]);
    }
}
