//! Special functions: Γ and B (backed by `statrs`) and the incomplete kernel
//! integral `I_{N,s}(t) = ∫_0^t z^{s-1} (1+z)^{-N/2} dz` behind every Green
//! function in this crate.

use crate::error::{Error, Result};
use crate::params::FracParams;

/// Γ(x) for real `x` away from the poles.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// B(a, b) for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> f64 {
    if a + b < 170.0 {
        gamma(a) * gamma(b) / gamma(a + b)
    } else {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }
}

const SERIES_EPS: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 400;

/// `I_{N,s}(t) = ∫_0^t z^{s-1} (1+z)^{-N/2} dz`.
///
/// Under `w = z / (1 + z)` the integral becomes the incomplete Beta function
/// `B(w; s, N/2 - s)`. For `t <= 1` (so `w <= 1/2`) the hypergeometric series
/// of `B(w; a, b)` converges geometrically for any real `b`. For `t > 1` the
/// remaining piece `∫_1^t` is rewritten with `v = 1/z` as
/// `∫_{1/t}^1 v^{c-1} (1+v)^{-N/2} dv`, `c = N/2 - s`, and evaluated as a
/// difference of the analytically continued series, which stays finite
/// when `c <= 0` (the heavy-tailed case `N <= 2s`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelIntegral {
    s: f64,
    half_n: f64,
    /// `N/2 - s`
    c: f64,
    at_one: f64,
    total: Option<f64>,
}

impl KernelIntegral {
    pub fn new(params: &FracParams) -> Self {
        let s = params.s();
        let half_n = params.half_dim();
        let c = half_n - s;
        let at_one = lower_series(0.5, s, c);
        let total = if c > 0.0 { Some(at_one + upper_series(0.5, 0.0, c, s)) } else { None };
        KernelIntegral { s, half_n, c, at_one, total }
    }

    /// `I(t)`; `t = +∞` is accepted and yields `B(s, N/2 - s)` or `+∞`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("kernel integral needs t >= 0, got {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    /// `I(t)` for `t >= 0` without validation.
    #[inline]
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t <= 1.0 {
            lower_series(t / (1.0 + t), self.s, self.c)
        } else if t.is_infinite() {
            self.total.unwrap_or(f64::INFINITY)
        } else {
            let u = 1.0 / t;
            self.at_one + upper_series(0.5, u / (1.0 + u), self.c, self.s)
        }
    }

    /// `I(∞) = B(s, N/2 - s)` when `N > 2s`.
    pub fn total(&self) -> Option<f64> {
        self.total
    }

    /// The integrand `t^{s-1} (1+t)^{-N/2}`.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        t.powf(self.s - 1.0) * (1.0 + t).powf(-self.half_n)
    }

    /// `I(hi) - I(lo)` without cancellation when the interval is short
    /// compared to its distance from the origin.
    pub fn increment(&self, lo: f64, hi: f64) -> f64 {
        if lo > 0.0 && (hi - lo).abs() < 0.25 * lo.min(hi) && hi.is_finite() {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            GL8.iter().map(|&(x, w)| w * self.derivative(mid + half * x)).sum::<f64>() * half
        } else {
            self.eval_unchecked(hi) - self.eval_unchecked(lo)
        }
    }
}

/// `B(w; a, b) = w^a Σ_n (1-b)_n / n! · w^n / (a+n)` for `0 < w <= 1/2`.
fn lower_series(w: f64, a: f64, b: f64) -> f64 {
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 1.0 / a;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        coeff *= (nf + 1.0 - b) / (nf + 1.0);
        power *= w;
        let term = coeff * power / (a + nf + 1.0);
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            break;
        }
    }
    w.powf(a) * sum
}

/// `∫_{x_lo}^{x_hi} w^{c-1} (1-w)^{s-1} dw` for `0 <= x_lo < x_hi <= 1/2`,
/// summed termwise as `Σ_n (1-s)_n / n! · (x_hi^{c+n} - x_lo^{c+n}) / (c+n)`.
/// Every term is positive, so there is no cancellation even for `c <= 0`.
fn upper_series(x_hi: f64, x_lo: f64, c: f64, s: f64) -> f64 {
    let hi_c = x_hi.powf(c);
    let lo_c = if x_lo > 0.0 { x_lo.powf(c) } else { 0.0 };
    let mut sum = if x_lo == 0.0 {
        hi_c / c
    } else if c == 0.0 {
        (x_hi / x_lo).ln()
    } else {
        lo_c * (c * (x_hi / x_lo).ln()).exp_m1() / c
    };
    let mut coeff = 1.0;
    let mut hi_pow = hi_c;
    let mut lo_pow = lo_c;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        coeff *= (nf + 1.0 - s) / (nf + 1.0);
        hi_pow *= x_hi;
        lo_pow *= x_lo;
        let term = coeff * (hi_pow - lo_pow) / (c + nf + 1.0);
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// 8-point Gauss–Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn integral(n: usize, s: f64) -> KernelIntegral {
        KernelIntegral::new(&FracParams::new(n, s).unwrap())
    }

    #[test]
    fn gamma_recurrence_and_reflection() {
        let mut x = 0.5;
        while x < 50.0 {
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "x = {x}");
            x += 0.37;
        }
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        // Γ(x)Γ(1-x) = π / sin(πx)
        for &x in &[0.1, 0.3, 0.45] {
            let lhs = gamma(x) * gamma(1.0 - x);
            assert!((lhs * (PI * x).sin() / PI - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_matches_gamma_ratio() {
        for &(a, b) in &[(0.5, 0.5), (0.25, 2.75), (3.0, 4.5), (0.5, 1.0), (10.0, 0.1)] {
            let expected = gamma(a) * gamma(b) / gamma(a + b);
            assert!((beta(a, b) / expected - 1.0).abs() < 1e-12);
        }
        assert!((beta(0.5, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(integral(2, 0.5).eval(0.0).unwrap(), 0.0);
        // N = 2, s = 1/2: 2 arctan √t
        let i = integral(2, 0.5);
        for &t in &[0.01f64, 0.5, 1.0, 3.0, 1e4, 1e12] {
            let expected = 2.0 * t.sqrt().atan();
            assert!((i.eval(t).unwrap() / expected - 1.0).abs() < 1e-13, "t = {t}");
        }
        assert!((i.eval(1.0).unwrap() - PI / 2.0).abs() < 1e-14);
        // N = 3, s = 1/2: 2 √(t / (1+t))
        let i = integral(3, 0.5);
        assert!((i.eval(4.0).unwrap() - 2.0 * (0.8f64).sqrt()).abs() < 1e-14);
        // N = 1, s = 1/2: 2 asinh √t, the c = 0 branch
        let i = integral(1, 0.5);
        for &t in &[0.2f64, 1.0, 3.0, 1e6, 1e12] {
            let expected = 2.0 * t.sqrt().asinh();
            assert!((i.eval(t).unwrap() / expected - 1.0).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn frozen_high_precision_values() {
        // 40-digit quadrature of the defining integral after z = τ^{1/s}.
        let cases = [
            (1, 0.75, 1e12, 3996.6111476614907503),
            (1, 0.75, 0.3, 0.50995253870850411735),
            (2, 0.3, 50.0, 3.7915839169106994814),
            (5, 0.2, 1e6, 4.0292103221431109860),
            (1, 0.25, 7.5, 5.0297624728984959380),
            (6, 0.9, 2.0, 0.51049264251109622905),
            (1, 0.9, 1e8, 3959.9883751572474502),
        ];
        for (n, s, t, expected) in cases {
            let got = integral(n, s).eval(t).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-12, "N={n} s={s} t={t}: {got} vs {expected}");
        }
    }

    #[test]
    fn limit_is_beta() {
        for n in 1..=6 {
            for &s in &[0.1, 0.3, 0.45, 0.7, 0.9] {
                let p = FracParams::new(n, s).unwrap();
                let i = KernelIntegral::new(&p);
                if p.half_dim() > s {
                    let b = beta(s, p.half_dim() - s);
                    assert!((i.total().unwrap() / b - 1.0).abs() < 1e-12, "N={n} s={s}");
                    assert!((i.eval(f64::INFINITY).unwrap() / b - 1.0).abs() < 1e-12);
                } else {
                    assert!(i.total().is_none());
                }
            }
        }
    }

    #[test]
    fn rejects_negative_argument() {
        assert!(integral(2, 0.5).eval(-1e-3).is_err());
        assert!(integral(2, 0.5).eval(f64::NAN).is_err());
    }

    #[test]
    fn increment_matches_difference() {
        let i = integral(3, 0.25);
        let (lo, hi) = (2.0, 2.01);
        let direct = i.eval(hi).unwrap() - i.eval(lo).unwrap();
        assert!((i.increment(lo, hi) / direct - 1.0).abs() < 1e-11);
    }
}
