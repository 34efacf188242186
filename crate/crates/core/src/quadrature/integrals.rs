//! Pointwise integrals against the fractional kernels.

use std::f64::consts::PI;

use super::field::{norm, ScalarField, Smoothness, Support};
use super::rules::{integrate, integrate_clustered, integrate_graded, Estimate, Tol};
use super::sphere::{integrate_sphere, integrate_sphere_axisymmetric, Frame};
use super::{QuadratureSpec, TailRadius};
use crate::error::{check_dim, Error, Result};
use crate::kernels::{norm2, Kernels};
use crate::params::{FracParams, Regime};

fn finish(est: Estimate) -> Result<Estimate> {
    if est.converged && est.value.is_finite() {
        Ok(est)
    } else {
        Err(Error::ToleranceNotMet { estimate: est.value, error: est.error })
    }
}

/// Kernel value with the (measure-zero) diagonal mapped to 0; quadrature
/// nodes can land on it after a steep graded substitution rounds.
#[inline]
fn off_diagonal(g: f64) -> f64 {
    if g.is_finite() {
        g
    } else {
        0.0
    }
}

/// `Tol` for an integral whose result is multiplied by `factor` afterwards.
fn scaled_tol(spec: &QuadratureSpec, factor: f64) -> Tol {
    Tol::new(spec.abs_tol / factor.abs().max(f64::MIN_POSITIVE), spec.rel_tol)
}

fn add_scaled(out: &mut [f64], x: &[f64], rho: f64, dir: &[f64]) {
    for ((o, xi), di) in out.iter_mut().zip(x).zip(dir) {
        *o = xi + rho * di;
    }
}

/// `(-Δ)^s u(x)` as `a_{N,s} ∫_{half sphere} ∫_0^∞ (2u(x) - u(x+ρθ) - u(x-ρθ)) ρ^{-1-2s} dρ dθ`.
///
/// Near `ρ = 0` the second difference is fitted by `Aρ² + Bρ⁴` and integrated
/// exactly; the middle range is adaptive with breakpoints where the ray meets
/// an interface; the tail is mapped onto `(0, 1]` by `ρ = ρ_c τ^{-1/(2s)}`
/// (or summed in closed form when `u` has compact support).
pub fn frac_laplacian_point(params: &FracParams, u: &ScalarField, x: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    check_dim(params.dim(), x.len())?;
    if u.smoothness() != Smoothness::C2 {
        return Err(Error::Unsupported("pointwise fractional Laplacian needs a field tagged C2".into()));
    }
    let s = params.s();
    u.require_l1s(s)?;
    let two_s = 2.0 * s;
    let d_irr = u.distance_to_irregularity(x);
    if d_irr <= 0.0 {
        return Err(Error::Domain("evaluation point lies on an interface of the field".into()));
    }
    let delta = 0.05 * d_irr.min(1.0);
    let compact = u.support().enclosing_radius(x);
    let tail_beta = match u.growth() {
        super::Growth::Bounded => 0.0,
        super::Growth::Power { exponent } => -exponent / two_s,
    };
    let a = params.normalization_a();
    let tol = scaled_tol(spec, a);
    let inner_tol = tol.nested();
    let depth = spec.max_refinements;
    let ux = u.eval(x);
    let dim = x.len();

    let radial = |theta: &[f64]| -> (f64, f64) {
        let mut plus = vec![0.0; dim];
        let mut minus = vec![0.0; dim];
        let mut diff = |rho: f64| {
            add_scaled(&mut plus, x, rho, theta);
            add_scaled(&mut minus, x, -rho, theta);
            2.0 * ux - u.eval(&plus) - u.eval(&minus)
        };
        // D(ρ) ≈ Aρ² + Bρ⁴ + Cρ⁶ on [0, δ], fitted at δ, δ/2, δ/4.
        let e: [f64; 3] = [1.0f64, 0.25, 0.0625].map(|t| diff(delta * t.sqrt()) / t);
        let (a2, b2, c2) = quadratic_through(&[1.0, 0.25, 0.0625], &e);
        let near_terms = [a2 / (2.0 - two_s), b2 / (4.0 - two_s), c2 / (6.0 - two_s)];
        let scale = delta.powf(-two_s);
        let near = scale * near_terms.iter().sum::<f64>();
        let near_err = 1e-2 * (scale * near_terms[2]).abs();

        let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
        let mut kinks = u.ray_breaks(x, theta);
        kinks.extend(u.ray_breaks(x, &neg));
        kinks.sort_by(f64::total_cmp);
        let last_kink = kinks.last().copied().unwrap_or(0.0);
        let rho_c = match compact {
            Some(r) => r.max(2.0 * delta),
            None => (2.0 * last_kink).max(1.0).max(2.0 * delta),
        };
        let mut points = vec![delta];
        let mut g = 4.0 * delta;
        while g < rho_c {
            points.push(g);
            g *= 4.0;
        }
        points.extend(kinks.iter().copied().filter(|&k| k > delta && k < rho_c));
        points.push(rho_c);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let segment_tol = Tol::new(inner_tol.abs / points.len() as f64, inner_tol.rel);
        let is_kink = |p: f64| kinks.contains(&p);
        let mut middle = Estimate::exact(0.0);
        for w in points.windows(2) {
            let piece = integrate_clustered(
                |rho| diff(rho) * rho.powf(-1.0 - two_s),
                w[0],
                w[1],
                is_kink(w[0]),
                is_kink(w[1]),
                segment_tol,
                depth,
            );
            middle = middle.combine(piece);
        }
        let tail_factor = rho_c.powf(-two_s) / two_s;
        let tail = if compact.is_some() {
            Estimate::exact(2.0 * ux * tail_factor)
        } else {
            integrate_graded(|tau| diff(rho_c * tau.powf(-1.0 / two_s)), 0.0, 1.0, tail_beta, &[], inner_tol, depth)
                .scale(tail_factor)
        };
        (near + middle.value + tail.value, near_err + middle.error + tail.error)
    };
    let frame = Frame::new(&unit(dim));
    let est = integrate_sphere(&frame, true, &[], tol, depth, radial)?;
    finish(est.scale(a))
}

/// Coefficients `(a, b, c)` of the parabola `a + b t + c t²` through three points.
fn quadratic_through(t: &[f64; 3], e: &[f64; 3]) -> (f64, f64, f64) {
    let d01 = (e[1] - e[0]) / (t[1] - t[0]);
    let d12 = (e[2] - e[1]) / (t[2] - t[1]);
    let c = (d12 - d01) / (t[2] - t[0]);
    let b = d01 - c * (t[0] + t[1]);
    let a = e[0] - b * t[0] - c * t[0] * t[0];
    (a, b, c)
}

fn unit(dim: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    e
}

/// `∫_{B_R} G_R(x, y) f(y) dy` in polar coordinates about `x`, with the
/// radial variable graded as `ρ = ρ_max τ^p`, `p = max(1, 1/(2s))`, to absorb
/// the `|x - y|^{2s-N}` singularity.
pub fn ball_green_integral(params: &FracParams, radius: f64, f: &ScalarField, x: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    check_dim(params.dim(), x.len())?;
    check_radius(radius)?;
    let r2 = radius * radius;
    let ax = r2 - norm2(x);
    if ax <= 0.0 {
        return Err(Error::Domain(format!("x must lie inside B_{radius}")));
    }
    let kernels = Kernels::new(*params);
    let dim = x.len();
    let p = (1.0 / (2.0 * params.s())).max(1.0);
    let tol = spec.tol();
    let inner_tol = tol.nested();
    let depth = spec.max_refinements;
    let gap = radius - norm(x);
    let w = (gap / radius).sqrt();
    let polar_breaks = [0.25 * w, w, 4.0 * w, 0.5 * PI];

    let radial = |theta: &[f64]| -> (f64, f64) {
        let xt: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let root = (xt * xt + ax).sqrt();
        let rho_max = root - xt;
        let rho_min = -xt - root;
        let breaks: Vec<f64> = f
            .ray_breaks(x, theta)
            .into_iter()
            .filter(|&b| b < rho_max)
            .map(|b| (b / rho_max).powf(1.0 / p))
            .collect();
        let mut y = vec![0.0; dim];
        let est = integrate(
            |tau| {
                if tau <= 0.0 {
                    return 0.0;
                }
                let rho = rho_max * tau.powf(p);
                add_scaled(&mut y, x, rho, theta);
                let fy = f.eval(&y);
                if fy == 0.0 {
                    return 0.0;
                }
                let ay = (rho_max - rho) * (rho - rho_min);
                let g = off_diagonal(kernels.green_core(rho * rho, ax * ay / r2));
                g * fy * rho.powi(dim as i32 - 1) * rho_max * p * tau.powf(p - 1.0)
            },
            0.0,
            1.0,
            &breaks,
            inner_tol,
            depth,
        );
        (est.value, est.error)
    };
    let frame = Frame::new(x);
    finish(integrate_sphere(&frame, false, &polar_breaks, tol, depth, radial)?)
}

/// `∫_{|y|>R} Γ_R(x, y) g(y) dy` in polar coordinates about the origin.
///
/// With `|y|² = R²(1 + q^{1/(1-s)})` the boundary singularity
/// `(|y|² - R²)^{-s}` disappears and the measure becomes
/// `C (R² - |x|²)^s R^{2-2s} / (2(1-s)) · |y|^{N-2} |x - y|^{-N} dq dθ`.
/// The range `q > 1` is mapped to `σ ∈ (0, 1]` by `q = σ^{-(1-s)/s}`, which
/// leaves a bounded integrand for bounded `g`.
pub fn exterior_poisson_integral(params: &FracParams, radius: f64, g: &ScalarField, x: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    check_dim(params.dim(), x.len())?;
    check_radius(radius)?;
    let s = params.s();
    g.require_l1s(s)?;
    let r2 = radius * radius;
    let ax = r2 - norm2(x);
    if ax <= 0.0 {
        return Err(Error::Domain(format!("x must lie inside B_{radius}")));
    }
    let dim = x.len();
    let n = dim as i32;
    let prefactor = params.poisson_constant_c() * ax.powf(s) * radius.powf(2.0 - 2.0 * s) / (2.0 * (1.0 - s));
    let tol = scaled_tol(spec, prefactor);
    let inner_tol = tol.nested();
    let depth = spec.max_refinements;
    let gap = radius - norm(x);
    let w = gap / radius;
    let polar_breaks = [w, 4.0 * w, 16.0 * w, 64.0 * w, 0.5 * PI];
    let m = (1.0 - s) / s;
    let tail_beta = match g.growth() {
        super::Growth::Bounded => 0.0,
        super::Growth::Power { exponent } => -exponent / (2.0 * s),
    };
    let origin = vec![0.0; dim];

    let radial = |theta: &[f64]| -> (f64, f64) {
        let mut y = vec![0.0; dim];
        let mut h = |q: f64| {
            let p = q.powf(1.0 / (1.0 - s));
            let r = radius * (1.0 + p).sqrt();
            add_scaled(&mut y, &origin, r, theta);
            let gy = g.eval(&y);
            if gy == 0.0 {
                return 0.0;
            }
            let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            r.powi(n - 2) * d2.powf(-0.5 * dim as f64) * gy
        };
        let mut breaks: Vec<f64> = [1.0, 4.0, 16.0, 64.0].iter().map(|c| (2.0 * c * w).powf(1.0 - s)).collect();
        let mut tail_breaks = Vec::new();
        for b in g.ray_breaks(&origin, theta) {
            if b > radius {
                let q = ((b * b / r2) - 1.0).powf(1.0 - s);
                if q < 1.0 {
                    breaks.push(q);
                } else {
                    tail_breaks.push(q.powf(-1.0 / m));
                }
            }
        }
        let near = integrate(&mut h, 0.0, 1.0, &breaks, inner_tol, depth);
        let far = integrate_graded(
            |sigma| {
                if sigma <= 0.0 {
                    return 0.0;
                }
                h(sigma.powf(-m)) * m * sigma.powf(-m - 1.0)
            },
            0.0,
            1.0,
            tail_beta,
            &tail_breaks,
            inner_tol,
            depth,
        );
        (near.value + far.value, near.error + far.error)
    };
    let frame = Frame::new(x);
    let est = integrate_sphere(&frame, false, &polar_breaks, tol, depth, radial)?;
    finish(est.scale(prefactor))
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("radius must be positive and finite, got {radius}")))
    }
}

/// Result of a half-space integral: the estimate of the computed part and
/// the bound on any truncated lateral tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfspaceIntegral {
    pub estimate: Estimate,
    /// Lateral truncation radius, if the range was truncated.
    pub truncation: Option<f64>,
    /// Upper bound on the neglected tail (0 without truncation).
    pub tail_bound: f64,
    /// Whether `tail_bound` is a proven bound rather than an estimate.
    pub rigorous_tail: bool,
}

impl HalfspaceIntegral {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }
}

/// `∫_{R^N_+} G_∞^+(x, y) f(y) dy` for `f` supported in a slab or box.
///
/// Polar coordinates about `x`: each ray is clipped to the support, graded
/// near `ρ = 0` where the integrand behaves like `ρ^{2s-1}`, and integrated in
/// `ln ρ` beyond the support width, where rays nearly tangent to the slab
/// see the `ρ^{-1}` decay of `G ρ^{N-1}`. The unbounded lateral range is kept
/// whole unless [`TailRadius::Fixed`] asks for truncation at lateral radius
/// `L`; the neglected part is then bounded via `I(t) <= t^s/s`:
/// `(κ/s) (4x_1)^s sup f ∫ y_1^s dy_1 · |S^{N-2}| / L`.
pub fn halfspace_green_integral(params: &FracParams, f: &ScalarField, x: &[f64], spec: &QuadratureSpec) -> Result<HalfspaceIntegral> {
    spec.validate()?;
    check_dim(params.dim(), x.len())?;
    let dim = x.len();
    let (lower, upper) = match f.support() {
        Support::Slab { lower, upper } => {
            let mut lo = vec![f64::NEG_INFINITY; dim];
            let mut hi = vec![f64::INFINITY; dim];
            lo[0] = *lower;
            hi[0] = *upper;
            (lo, hi)
        }
        Support::Box { lower, upper } => (lower.clone(), upper.clone()),
        _ => {
            return Err(Error::Unsupported(
                "half-space integration needs a slab or box support descriptor".into(),
            ))
        }
    };
    let (mut lower, upper) = (lower, upper);
    lower[0] = lower[0].max(0.0);
    let (lo, hi) = (lower[0], upper[0]);
    if !hi.is_finite() {
        return Err(Error::Unsupported("half-space integration needs support bounded in x_1".into()));
    }
    let untruncated = |estimate| HalfspaceIntegral { estimate, truncation: None, tail_bound: 0.0, rigorous_tail: false };
    let x1 = x[0];
    if x1 < 0.0 {
        return Err(Error::Domain("half-space integral needs x_1 >= 0".into()));
    }
    if x1 == 0.0 || hi <= lo {
        return Ok(untruncated(Estimate::exact(0.0)));
    }
    let s = params.s();
    let (truncation, tail_bound) = match spec.tail_radius {
        TailRadius::Fixed(l) if dim > 1 => {
            let m = f.bound().ok_or_else(|| {
                Error::Unsupported("a truncated half-space integral needs a declared bound on f".into())
            })?;
            let omega = if dim == 2 { 2.0 } else { 2.0 * PI };
            let moment = (hi.powf(1.0 + s) - lo.powf(1.0 + s)) / (1.0 + s);
            let bound = params.green_normalization() / s * (4.0 * x1).powf(s) * m * moment * omega / l;
            (Some(l), bound)
        }
        _ => (None, 0.0),
    };
    let kernels = Kernels::new(*params);
    let beta = match params.regime() {
        Regime::Transient => 2.0 * s - 1.0,
        Regime::Critical => -0.1,
        Regime::Recurrent => 0.0,
    };
    let width = (hi - lo).max(x1);
    let tol = spec.tol();
    let radial_tol = tol.nested();
    let depth = spec.max_refinements;
    let n = dim as i32;

    let radial = |theta: &[f64]| -> (f64, f64) {
        let Some((t_in, mut t_out)) = ray_box(x, theta, &lower, &upper) else {
            return (0.0, 0.0);
        };
        if let Some(l) = truncation {
            let lateral = theta[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if lateral > 0.0 {
                t_out = t_out.min(l / lateral);
            }
        }
        // Exactly tangent rays never occur at quadrature nodes; cap for safety.
        t_out = t_out.min(1e12 * width);
        if t_out <= t_in {
            return (0.0, 0.0);
        }
        let mut y = vec![0.0; dim];
        let mut g = |rho: f64| {
            add_scaled(&mut y, x, rho, theta);
            let fy = f.eval(&y);
            if fy == 0.0 || rho <= 0.0 {
                return 0.0;
            }
            off_diagonal(kernels.green_core(rho * rho, 4.0 * x1 * y[0].max(0.0))) * fy * rho.powi(n - 1)
        };
        let breaks: Vec<f64> = f.ray_breaks(x, theta).into_iter().filter(|&b| b > t_in && b < t_out).collect();
        let rho1 = t_out.min(t_in + width);
        let mut near_breaks = breaks.clone();
        near_breaks.extend([0.1 * width, 0.01 * width].map(|b| t_in + b));
        let mut total = if t_in == 0.0 {
            integrate_graded(&mut g, 0.0, rho1, beta, &near_breaks, radial_tol, depth)
        } else {
            integrate(&mut g, t_in, rho1, &near_breaks, radial_tol, depth)
        };
        if t_out > rho1 {
            let log_breaks: Vec<f64> = breaks.iter().filter(|&&b| b > rho1).map(|b| b.ln()).collect();
            let far = integrate(
                |v| {
                    let rho = v.exp();
                    g(rho) * rho
                },
                rho1.ln(),
                t_out.ln(),
                &log_breaks,
                radial_tol,
                depth,
            );
            total = total.combine(far);
        }
        (total.value, total.error)
    };
    let frame = Frame::new(&unit(dim));
    let polar_breaks = [0.5 * PI];
    let est = if f.is_tangentially_invariant() {
        integrate_sphere_axisymmetric(&frame, &polar_breaks, tol, depth, radial)?
    } else {
        integrate_sphere(&frame, false, &polar_breaks, tol, depth, radial)?
    };
    let estimate = finish(est)?;
    Ok(HalfspaceIntegral { estimate, truncation, tail_bound, rigorous_tail: truncation.is_some() })
}

/// Parameter range `[t_in, t_out]`, `t_in >= 0`, over which `p + t d` stays in the box.
fn ray_box(p: &[f64], d: &[f64], lower: &[f64], upper: &[f64]) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for k in 0..p.len() {
        if !(lower[k].is_finite() || upper[k].is_finite()) {
            continue;
        }
        if d[k] == 0.0 {
            if p[k] < lower[k] || p[k] > upper[k] {
                return None;
            }
        } else {
            let a = (lower[k] - p[k]) / d[k];
            let b = (upper[k] - p[k]) / d[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t1 > t0).then_some((t0, t1))
}

/// Mass `∫_{Σ_λ} G_∞^+(x, y) dy` of the strip `0 < y_1 < λ` seen from `x`.
pub fn strip_mass(params: &FracParams, lambda: f64, x: &[f64], spec: &QuadratureSpec) -> Result<HalfspaceIntegral> {
    if !(x.first().is_some_and(|&x1| x1 > 0.0 && x1 < lambda)) {
        return Err(Error::Domain(format!("strip mass needs 0 < x_1 < λ = {lambda}")));
    }
    let indicator = ScalarField::constant(1.0)
        .with_support(Support::Slab { lower: 0.0, upper: lambda })
        .with_tangential_invariance();
    halfspace_green_integral(params, &indicator, x, spec)
}
