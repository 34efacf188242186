//! Closed-form kernels: Poisson kernels and Green functions of balls, shifted
//! balls and the half-space, the `H(r, t)` reparametrization, the Riesz
//! potential and the mollified Poisson kernel.

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::params::{FracParams, Regime};
use crate::quadrature::rules::{integrate, Tol};
use crate::special::KernelIntegral;

/// A point of `R^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("a point needs at least one coordinate".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    /// `(x1, 0, ..., 0)` in dimension `dim`.
    pub fn on_axis(dim: usize, x1: f64) -> Self {
        let mut c = vec![0.0; dim];
        c[0] = x1;
        Point(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// The tangential part `(x_2, ..., x_N)`.
    pub fn tangential(&self) -> &[f64] {
        &self.0[1..]
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `|x - P_R|^2 - R^2 = |x|^2 - 2 R x_1`, exact for large `R`.
#[inline]
fn shifted_excess(r: f64, x: &[f64]) -> f64 {
    norm2(x) - 2.0 * r * x[0]
}

/// Reflection `x ↦ x^λ = (2λ - x_1, x_2, ..., x_N)` at the plane `{x_1 = λ}`.
pub fn reflect_point(x: &[f64], lambda: f64) -> Point {
    let mut c = x.to_vec();
    c[0] = 2.0 * lambda - c[0];
    Point(c)
}

/// Domains with explicit kernels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// `B_R = {|x| < R}`
    Ball { radius: f64 },
    /// `B_R^+ = {|x - P_R| < R}` with `P_R = (R, 0, ..., 0)`
    ShiftedBall { radius: f64 },
    /// `R^N_+ = {x_1 > 0}`
    HalfSpace,
    FullSpace,
}

impl Domain {
    pub fn ball(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Domain::Ball { radius })
    }

    pub fn shifted_ball(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Domain::ShiftedBall { radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Ball { radius } => norm2(x) < radius * radius,
            Domain::ShiftedBall { radius } => shifted_excess(radius, x) < 0.0,
            Domain::HalfSpace => x[0] > 0.0,
            Domain::FullSpace => true,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Domain::Ball { .. } => "ball",
            Domain::ShiftedBall { .. } => "shifted-ball",
            Domain::HalfSpace => "half-space",
            Domain::FullSpace => "full-space",
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be positive, got {radius}")))
    }
}

/// The strip `Σ_λ = {0 < x_1 < λ}` and the far region `J_λ = {x_1 >= 2λ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSet {
    lambda: f64,
}

impl StripSet {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(StripSet { lambda })
        } else {
            Err(Error::Domain(format!("strip width must be positive, got {lambda}")))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn in_strip(&self, x: &[f64]) -> bool {
        x[0] > 0.0 && x[0] < self.lambda
    }

    pub fn in_far_region(&self, x: &[f64]) -> bool {
        x[0] >= 2.0 * self.lambda
    }
}

/// Partial derivatives of `H` by finite differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPartials {
    pub dr: f64,
    pub dt: f64,
    pub drdt: f64,
}

/// `∫_{-1}^{1} exp(-1 / (1 - u^2)) du`
const BUMP_MASS: f64 = 0.443_993_816_168_079_44;

/// Smooth bump on `(1/2, 1)` with unit integral, used to mollify Poisson kernels.
pub fn bump(r: f64) -> f64 {
    let u = 4.0 * r - 3.0;
    if u.abs() >= 1.0 {
        0.0
    } else {
        4.0 / BUMP_MASS * (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Kernel evaluator for fixed `(N, s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernels {
    params: FracParams,
    integral: KernelIntegral,
    kappa: f64,
}

impl Kernels {
    pub fn new(params: FracParams) -> Self {
        Kernels { params, integral: KernelIntegral::new(&params), kappa: params.green_normalization() }
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn integral(&self) -> &KernelIntegral {
        &self.integral
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.params.dim(), x.len())
    }

    fn check_pair(&self, x: &[f64], y: &[f64]) -> Result<()> {
        self.check(x)?;
        self.check(y)
    }

    /// Green function from `|x - y|^2` and the product `p = ψ |x - y|^2`
    /// (for instance `4 x_1 y_1` on the half-space). Returns `+∞` on the
    /// diagonal unless the kernel is bounded there.
    #[inline]
    pub(crate) fn green_core(&self, d2: f64, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let s = self.params.s();
        if d2 == 0.0 {
            return match self.params.regime() {
                Regime::Recurrent => self.kappa * p.powf(s - 0.5) / (s - 0.5),
                _ => f64::INFINITY,
            };
        }
        let psi = p / d2;
        match self.params.regime() {
            Regime::Critical => psi.sqrt().asinh() / PI,
            _ => self.kappa * d2.powf(s - self.params.half_dim()) * self.integral.eval_unchecked(psi),
        }
    }

    fn finite_or_diagonal(v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::DiagonalSingularity)
        }
    }

    /// Poisson kernel `Γ_R(x, y)` of `B_R`, zero unless `|x| < R < |y|`.
    pub fn poisson_ball(&self, radius: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        check_radius(radius)?;
        let r2 = radius * radius;
        let inside = r2 - norm2(x);
        let outside = norm2(y) - r2;
        Ok(self.poisson_core(inside, outside, dist2(x, y)))
    }

    #[inline]
    pub(crate) fn poisson_core(&self, inside: f64, outside: f64, d2: f64) -> f64 {
        if inside <= 0.0 || outside <= 0.0 {
            return 0.0;
        }
        let n = self.params.half_dim();
        self.params.poisson_constant_c() * (inside / outside).powf(self.params.s()) * d2.powf(-n)
    }

    /// Poisson kernel `Γ_R^+` of the shifted ball `B_R^+`.
    pub fn poisson_shifted_ball(&self, radius: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        check_radius(radius)?;
        Ok(self.poisson_core(-shifted_excess(radius, x), shifted_excess(radius, y), dist2(x, y)))
    }

    /// Green function `G_R(x, y)` of `B_R`, zero when either point is outside.
    pub fn green_ball(&self, radius: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        check_radius(radius)?;
        let r2 = radius * radius;
        let ax = r2 - norm2(x);
        let ay = r2 - norm2(y);
        if ax <= 0.0 || ay <= 0.0 {
            return Ok(0.0);
        }
        let d2 = dist2(x, y);
        if self.params.regime() == Regime::Critical {
            if d2 == 0.0 {
                return Err(Error::DiagonalSingularity);
            }
            let (u, v) = (x[0] / radius, y[0] / radius);
            let num = 1.0 - u * v + ((1.0 - u * u) * (1.0 - v * v)).sqrt();
            return Ok((num / (u - v).abs()).ln() / PI);
        }
        Self::finite_or_diagonal(self.green_core(d2, ax * ay / r2))
    }

    /// Green function `G_R^+` of `B_R^+`, from the cancellation-free form of `ψ_R^+`.
    pub fn green_shifted_ball(&self, radius: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        check_radius(radius)?;
        let ax = 2.0 * x[0] - norm2(x) / radius;
        let ay = 2.0 * y[0] - norm2(y) / radius;
        if ax <= 0.0 || ay <= 0.0 {
            return Ok(0.0);
        }
        Self::finite_or_diagonal(self.green_core(dist2(x, y), ax * ay))
    }

    /// `G_R^+(x, y)` as the ball Green function at `x - P_R, y - P_R`.
    pub fn green_shifted_ball_translated(&self, radius: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        let shift = |p: &[f64]| {
            let mut c = p.to_vec();
            c[0] -= radius;
            c
        };
        self.green_ball(radius, &shift(x), &shift(y))
    }

    /// Half-space Green function `G_∞^+(x, y)`.
    pub fn green_halfspace(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        if x[0] < 0.0 || y[0] < 0.0 {
            return Err(Error::Domain("half-space kernel needs x_1, y_1 >= 0".into()));
        }
        Self::finite_or_diagonal(self.green_core(dist2(x, y), 4.0 * x[0] * y[0]))
    }

    /// `G_∞^+` without validation, `+∞` on the diagonal.
    #[inline]
    pub(crate) fn green_halfspace_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.green_core(dist2(x, y), 4.0 * x[0] * y[0])
    }

    /// `G_∞^+(x^λ.., ..) - G_∞^+(..)` for two pairs at the same distance,
    /// computed as one kernel-integral increment so the difference keeps
    /// full relative accuracy.
    pub(crate) fn green_halfspace_increment(&self, d2: f64, p_lo: f64, p_hi: f64) -> f64 {
        if self.params.regime() == Regime::Critical {
            let (a, b) = ((p_lo / d2).sqrt(), (p_hi / d2).sqrt());
            return (b.asinh() - a.asinh()) / PI;
        }
        self.kappa
            * d2.powf(self.params.s() - self.params.half_dim())
            * self.integral.increment(p_lo / d2, p_hi / d2)
    }

    /// `H(r, t) = r^{s - N/2} I(t / r)`, so that `G_∞^+(x, y) = κ H(|x - y|^2, 4 x_1 y_1)`.
    pub fn h_function(&self, r: f64, t: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("H needs r > 0, got {r}")));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("H needs t >= 0, got {t}")));
        }
        Ok(self.h_unchecked(r, t))
    }

    fn h_exponent(&self) -> f64 {
        self.params.s() - self.params.half_dim()
    }

    fn h_unchecked(&self, r: f64, t: f64) -> f64 {
        r.powf(self.h_exponent()) * self.integral.eval_unchecked(t / r)
    }

    /// `∂_t H(r, ·)` by a central difference (forward at `t < h`).
    fn h_dt(&self, r: f64, t: f64) -> f64 {
        let h = step(t);
        let (lo, hi, width) = if t >= h { (t - h, t + h, 2.0 * h) } else { (t, t + h, h) };
        r.powf(self.h_exponent()) * self.integral.increment(lo / r, hi / r) / width
    }

    /// Finite-difference partials `∂_r H`, `∂_t H`, `∂_r ∂_t H` with steps
    /// `h = max(1e-5, 1e-5 |arg|)`. Differences in `t` are taken as exact
    /// kernel-integral increments, which keeps them accurate for extreme `(r, t)`.
    pub fn h_partials(&self, r: f64, t: f64) -> Result<HPartials> {
        self.h_function(r, t)?;
        let e = self.h_exponent();
        let hr = step(r);
        let (r_lo, r_hi, width) = if r > hr { (r - hr, r + hr, 2.0 * hr) } else { (r, r + hr, hr) };
        // a(r) I(t/r) at r_hi minus at r_lo, split as
        // a_hi (I_hi - I_lo) + (a_hi - a_lo) I_lo.
        let a_lo = r_lo.powf(e);
        let a_hi = r_hi.powf(e);
        let i_lo = self.integral.eval_unchecked(t / r_lo);
        let di = -self.integral.increment(t / r_hi, t / r_lo);
        let da = a_lo * (e * (r_hi / r_lo).ln()).exp_m1();
        let dr = (a_hi * di + da * i_lo) / width;
        let dt = self.h_dt(r, t);
        let drdt = (self.h_dt(r_hi, t) - self.h_dt(r_lo, t)) / width;
        Ok(HPartials { dr, dt, drdt })
    }

    /// Fundamental solution `Φ(x - y)` of `(-Δ)^s`.
    pub fn riesz_potential(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        let d2 = dist2(x, y);
        if d2 == 0.0 {
            return Err(Error::DiagonalSingularity);
        }
        Ok(self.riesz_core(d2))
    }

    #[inline]
    pub(crate) fn riesz_core(&self, d2: f64) -> f64 {
        let c = self.params.riesz_constant();
        let s = self.params.s();
        match self.params.regime() {
            Regime::Transient => c * d2.powf(s - self.params.half_dim()),
            Regime::Critical => -0.5 * c * d2.ln(),
            Regime::Recurrent => -c * d2.powf(s - 0.5),
        }
    }

    /// Mollified Poisson kernel `Γ̃_ε(y) = ε^{-N} Γ̃(y / ε)` with
    /// `Γ̃(z) = ∫_{1/2}^{1} χ(r) Γ_r(0, z) dr`.
    pub fn regularized_poisson(&self, eps: f64, y: &[f64]) -> Result<f64> {
        self.check(y)?;
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("mollifier scale must be positive, got {eps}")));
        }
        let z = y.iter().map(|v| v / eps).collect::<Vec<_>>();
        Ok(eps.powi(-(self.params.dim() as i32)) * self.regularized_unit(norm2(&z).sqrt()))
    }

    /// `Γ̃` at a point of norm `rho`.
    pub(crate) fn regularized_unit(&self, rho: f64) -> f64 {
        if rho <= 0.5 {
            return 0.0;
        }
        let s = self.params.s();
        let c = self.params.poisson_constant_c() * rho.powi(-(self.params.dim() as i32));
        let tol = Tol::new(1e-15, 1e-12);
        if rho < 1.0 {
            // r = ρ - L v^p with p = 1/(1-s) absorbs (ρ - r)^{-s} exactly.
            let len = rho - 0.5;
            let p = 1.0 / (1.0 - s);
            let scale = c * p * len.powf(1.0 - s);
            integrate(
                |v| {
                    let r = rho - len * v.powf(p);
                    let weight = bump(r);
                    if weight == 0.0 {
                        0.0
                    } else {
                        scale * weight * (r * r / (rho + r)).powf(s)
                    }
                },
                0.0,
                1.0,
                &[],
                tol,
                40,
            )
            .value
        } else {
            let integrand = |r: f64| {
                let weight = bump(r);
                if weight == 0.0 {
                    0.0
                } else {
                    weight * c * (r * r / ((rho - r) * (rho + r))).powf(s)
                }
            };
            integrate(integrand, 0.5, 1.0, &[0.75], tol, 40).value
        }
    }
}

fn step(arg: f64) -> f64 {
    (1e-5 * arg.abs()).max(1e-5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::rules::integrate;

    fn kernels(n: usize, s: f64) -> Kernels {
        Kernels::new(FracParams::new(n, s).unwrap())
    }

    #[test]
    fn point_validation() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![0.0, f64::NAN]).is_err());
        let p = Point::new(vec![0.2, 1.0, -1.0]).unwrap();
        assert_eq!(p.tangential(), &[1.0, -1.0]);
    }

    #[test]
    fn reflection() {
        let x = [0.2, 1.0, -1.0];
        assert_eq!(&*reflect_point(&x, 1.0), &[1.8, 1.0, -1.0]);
        let back = reflect_point(&reflect_point(&x, 0.7), 0.7);
        assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(&*reflect_point(&[1.0, 3.0], 1.0), &[1.0, 3.0]);
    }

    #[test]
    fn domain_membership() {
        let b = Domain::ball(2.0).unwrap();
        assert!(b.contains(&[1.0, 1.0]) && !b.contains(&[2.0, 0.0]));
        let sb = Domain::shifted_ball(1.0).unwrap();
        assert!(sb.contains(&[1.5, 0.5]) && !sb.contains(&[0.0, 0.0]) && !sb.contains(&[1.0, 1.0]));
        assert!(Domain::HalfSpace.contains(&[1e-9]) && !Domain::HalfSpace.contains(&[0.0]));
        assert!(Domain::ball(0.0).is_err());
        let strip = StripSet::new(1.0).unwrap();
        assert!(strip.in_strip(&[0.5, 9.0]) && !strip.in_strip(&[1.0]) && strip.in_far_region(&[2.0]));
    }

    #[test]
    fn poisson_ball_values() {
        let k = kernels(1, 0.5);
        let v = k.poisson_ball(1.0, &[0.0], &[2.0]).unwrap();
        let expected = (1.0 / PI) * (1.0f64 / 3.0).sqrt() * 0.5;
        assert!((v - expected).abs() < 1e-15);
        assert!((expected - 0.091_888).abs() < 1e-6);
        assert_eq!(k.poisson_ball(1.0, &[0.0], &[0.5]).unwrap(), 0.0);
        assert_eq!(k.poisson_ball(1.0, &[1.5], &[2.0]).unwrap(), 0.0);
        let k3 = kernels(3, 0.3);
        let a = k3.poisson_ball(1.0, &[0.0; 3], &[2.0, 0.0, 0.0]).unwrap();
        let b = k3.poisson_ball(1.0, &[0.0; 3], &[0.0, -1.2, 1.6]).unwrap();
        assert!((a - b).abs() < 1e-15 * a);
    }

    #[test]
    fn critical_green_routes_agree() {
        let k = kernels(1, 0.5);
        let g = k.green_ball(1.0, &[0.0], &[0.5]).unwrap();
        let expected = (2.0 + 3f64.sqrt()).ln() / PI;
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 0.419_200_718_278_982_7).abs() < 1e-15);
        // κ I(ψ), κ = 1/(2π), with ψ = 3 and I(3) = 2 asinh √3
        let via_integral = 0.5 / PI * 2.0 * 3f64.sqrt().asinh();
        assert!((g - via_integral).abs() < 1e-12);
        assert!(matches!(k.green_ball(1.0, &[0.3], &[0.3]), Err(Error::DiagonalSingularity)));
        // rescaling to radius R is exact since 2s - N = 0
        let gr = k.green_ball(3.0, &[0.0], &[1.5]).unwrap();
        assert!((gr - g).abs() < 1e-15);
    }

    #[test]
    fn halfspace_closed_form() {
        let k = kernels(3, 0.5);
        let g = k.green_halfspace(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]).unwrap();
        let expected = 1.0 / (4.0 * PI * PI) * 2.0 * (0.8f64).sqrt();
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 0.045_313).abs() < 1e-6);
        assert_eq!(k.green_halfspace(&[0.0, 0.0, 0.0], &[1.0, 1.0, 0.0]).unwrap(), 0.0);
        assert!(k.green_halfspace(&[-0.1, 0.0, 0.0], &[1.0, 1.0, 0.0]).is_err());
        assert!(matches!(k.green_halfspace(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), Err(Error::DiagonalSingularity)));
        assert!(matches!(k.green_halfspace(&[1.0, 0.0], &[1.0, 0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bounded_kernel_has_finite_diagonal() {
        let k = kernels(1, 0.75);
        let on = k.green_ball(1.0, &[0.2], &[0.2]).unwrap();
        // the off-diagonal value approaches the limit like |x - y|^{2s - 1}
        let near = k.green_ball(1.0, &[0.2], &[0.2 + 1e-12]).unwrap();
        assert!((on - near).abs() < 1e-4 * on);
        let on = k.green_halfspace(&[0.7], &[0.7]).unwrap();
        let near = k.green_halfspace(&[0.7], &[0.7 + 1e-12]).unwrap();
        assert!((on - near).abs() < 1e-4 * on);
    }

    #[test]
    fn shifted_ball_routes_agree() {
        let k = kernels(2, 0.3);
        for (x, y) in [([0.5, 0.1], [1.2, -0.4]), ([1.9, 0.0], [0.3, 0.2]), ([1.0, 0.9], [1.0, -0.9])] {
            let a = k.green_shifted_ball(1.0, &x, &y).unwrap();
            let b = k.green_shifted_ball_translated(1.0, &x, &y).unwrap();
            assert!((a - b).abs() < 1e-12 * a.max(1.0), "{a} vs {b}");
        }
        assert_eq!(k.green_shifted_ball(1.0, &[0.0, 0.5], &[1.0, 0.0]).unwrap(), 0.0);
        let p = k.poisson_shifted_ball(1.0, &[1.2, 0.1], &[2.5, 0.3]).unwrap();
        let q = k.poisson_ball(1.0, &[0.2, 0.1], &[1.5, 0.3]).unwrap();
        assert!((p - q).abs() < 1e-12 * q);
        assert_eq!(k.poisson_shifted_ball(1.0, &[1.2, 0.1], &[1.5, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn h_matches_green() {
        let k = kernels(3, 0.4);
        let x = [0.7, 0.1, -0.3];
        let y = [1.3, -0.5, 0.2];
        let g = k.green_halfspace(&x, &y).unwrap();
        let h = k.h_function(dist2(&x, &y), 4.0 * x[0] * y[0]).unwrap();
        assert!((g - k.params().green_normalization() * h).abs() < 1e-12 * g);
        assert!(k.h_function(0.0, 1.0).is_err());
        assert!(k.h_function(1.0, -1.0).is_err());
    }

    #[test]
    fn h_partials_match_closed_forms() {
        for (n, s) in [(1, 0.5), (1, 0.75), (2, 0.3), (3, 0.5), (3, 0.9)] {
            let k = kernels(n, s);
            let half_n = n as f64 / 2.0;
            for &r in &[0.01, 0.3, 2.0, 90.0] {
                for &t in &[0.01, 0.5, 7.0, 100.0] {
                    let p = k.h_partials(r, t).unwrap();
                    let dt = t.powf(s - 1.0) * (r + t).powf(-half_n);
                    let drdt = -half_n * t.powf(s - 1.0) * (r + t).powf(-half_n - 1.0);
                    let i = k.integral().eval(t / r).unwrap();
                    let dr = (s - half_n) * r.powf(s - half_n - 1.0) * i - t.powf(s) / r * (r + t).powf(-half_n);
                    let err = |a: f64, b: f64| (a / b - 1.0).abs();
                    assert!(err(p.dt, dt) < 1e-5, "dt N={n} s={s} r={r} t={t}: {}", err(p.dt, dt));
                    assert!(err(p.drdt, drdt) < 1e-4, "drdt N={n} s={s} r={r} t={t}: {}", err(p.drdt, drdt));
                    assert!(err(p.dr, dr) < 1e-5, "dr N={n} s={s} r={r} t={t}: {}", err(p.dr, dr));
                }
            }
        }
    }

    #[test]
    fn riesz_signs() {
        let k = kernels(1, 0.75);
        assert!(k.riesz_potential(&[0.0], &[0.5]).unwrap() < 0.0);
        let k = kernels(1, 0.5);
        assert_eq!(k.riesz_potential(&[0.0], &[1.0]).unwrap(), 0.0);
        let k = kernels(3, 0.5);
        let v = k.riesz_potential(&[0.0; 3], &[0.0, 2.0, 0.0]).unwrap();
        // Γ(1) / (2 π^{3/2} Γ(1/2)) / 4 = 1 / (8 π²)
        assert!((v - 1.0 / (8.0 * PI * PI)).abs() < 1e-15);
        assert!(matches!(k.riesz_potential(&[0.0; 3], &[0.0; 3]), Err(Error::DiagonalSingularity)));
    }

    #[test]
    fn bump_is_normalized() {
        let est = integrate(bump, 0.5, 1.0, &[0.75], Tol::new(1e-15, 1e-13), 40);
        assert!((est.value - 1.0).abs() < 1e-12);
        assert_eq!(bump(0.5), 0.0);
        assert_eq!(bump(1.2), 0.0);
    }

    #[test]
    fn regularized_poisson_scaling_and_mass() {
        let k = kernels(1, 0.5);
        let eps = 0.3;
        let a = k.regularized_poisson(eps, &[0.4]).unwrap();
        let b = eps.powi(-1) * k.regularized_poisson(1.0, &[0.4 / eps]).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
        assert_eq!(k.regularized_poisson(1.0, &[0.4]).unwrap(), 0.0);
        // total mass: 2 ∫_{1/2}^∞ Γ̃(ρ) dρ in N = 1, tail mapped by ρ = 1/σ
        let tol = Tol::new(1e-13, 1e-10);
        let near = integrate(|r| 2.0 * k.regularized_unit(r), 0.5, 1.0, &[0.75], tol, 40).value;
        let far = integrate(
            |sigma| if sigma <= 0.0 { 0.0 } else { 2.0 * k.regularized_unit(1.0 / sigma) / (sigma * sigma) },
            0.0,
            1.0,
            &[],
            tol,
            40,
        )
        .value;
        assert!((near + far - 1.0).abs() < 1e-6, "mass {}", near + far);
    }
}
