//! Dimension/order parameters and the normalization constants derived from them.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{beta, gamma};

/// Which branch of the kernel asymptotics a pair `(N, s)` falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `N > 2s`: Green functions blow up like `|x - y|^(2s - N)`.
    Transient,
    /// `N = 1 = 2s`: logarithmic diagonal singularity.
    Critical,
    /// `N = 1 < 2s`: Green functions are bounded.
    Recurrent,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::Transient => "N>2s",
            Regime::Critical => "N=1=2s",
            Regime::Recurrent => "N=1<2s",
        };
        f.write_str(name)
    }
}

/// Dimension `N >= 1` and order `s in (0, 1)` of `(-Δ)^s`, with the
/// normalization constants precomputed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FracParams {
    dim: usize,
    order: f64,
    regime: Regime,
    a: f64,
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    s: f64,
}

impl TryFrom<RawParams> for FracParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        FracParams::new(raw.n, raw.s)
    }
}

impl From<FracParams> for RawParams {
    fn from(p: FracParams) -> Self {
        RawParams { n: p.dim, s: p.order }
    }
}

impl FracParams {
    pub fn new(dim: usize, order: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if !(order > 0.0 && order < 1.0) {
            return Err(Error::InvalidParams(format!("order s = {order} must lie in (0, 1)")));
        }
        let n = dim as f64;
        let regime = if 2.0 * order < n {
            Regime::Transient
        } else if 2.0 * order == n {
            Regime::Critical
        } else {
            Regime::Recurrent
        };
        let a = order * (1.0 - order) * PI.powf(-n / 2.0) * 4f64.powf(order) * gamma(n / 2.0 + order)
            / gamma(2.0 - order);
        let k = PI.powf(-(n / 2.0 + 1.0)) * gamma(n / 2.0) * (PI * order).sin();
        let params = FracParams { dim, order, regime, a, k };
        debug_assert!(a.is_finite() && a > 0.0 && k.is_finite() && k > 0.0);
        Ok(params)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.order
    }

    /// `N / 2` as a float.
    pub fn half_dim(&self) -> f64 {
        self.dim as f64 / 2.0
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `a_{N,s}`, the constant in front of the singular integral defining `(-Δ)^s`.
    pub fn normalization_a(&self) -> f64 {
        self.a
    }

    /// `k_N^s = π^{-(N/2+1)} Γ(N/2) sin(πs)`, the constant quoted in the
    /// literature as the Green function normalization. It is the Poisson
    /// kernel constant; see [`FracParams::green_normalization`] for the factor
    /// that actually multiplies `|x - y|^{2s-N} I_{N,s}(ψ)`.
    pub fn green_constant_k(&self) -> f64 {
        self.k
    }

    /// `κ_{N,s} = Γ(N/2) / (4^s π^{N/2} Γ(s)²)`, so that
    /// `G_1(x, y) = κ |x - y|^{2s-N} I_{N,s}(ψ(x, y))` inverts `(-Δ)^s` on the
    /// unit ball. Equals `k_N^s / 2` only at `s = 1/2`.
    pub fn green_normalization(&self) -> f64 {
        let n = self.dim as f64;
        let s = self.order;
        gamma(n / 2.0) / (4f64.powf(s) * PI.powf(n / 2.0) * gamma(s).powi(2))
    }

    /// `C_{N,s}` making the Poisson kernel of a ball a probability density on
    /// the exterior. It coincides with `k_N^s`.
    pub fn poisson_constant_c(&self) -> f64 {
        self.k
    }

    /// Normalization of the fundamental solution (Riesz potential).
    ///
    /// For `N > 2s` this is `Γ(N/2 - s) / (4^s π^{N/2} Γ(s))`; for `N = 1 < 2s`
    /// it is the absolute value of the same expression (the potential carries
    /// an explicit minus sign); for `N = 1 = 2s` it is `1/π`.
    pub fn riesz_constant(&self) -> f64 {
        let n = self.dim as f64;
        let s = self.order;
        match self.regime {
            Regime::Critical => 1.0 / PI,
            _ => (gamma(n / 2.0 - s) / (4f64.powf(s) * PI.powf(n / 2.0) * gamma(s))).abs(),
        }
    }

    /// Critical exponents of the half-space and whole-space Liouville theorems.
    pub fn critical_exponents(&self) -> CriticalExponents {
        let n = self.dim as f64;
        let s = self.order;
        let halfspace_q = if n > 1.0 + 2.0 * s {
            CriticalExponent::Finite((n - 1.0 + 2.0 * s) / (n - 1.0 - 2.0 * s))
        } else {
            CriticalExponent::Unbounded
        };
        let fullspace_q = if n > 2.0 * s {
            CriticalExponent::Finite((n + 2.0 * s) / (n - 2.0 * s))
        } else {
            CriticalExponent::Unbounded
        };
        CriticalExponents { halfspace_q, fullspace_q }
    }

    /// `∫_R (1 + λ²)^{-N/2 - s} dλ = B(1/2, (N-1)/2 + s)`, the factor relating
    /// the operator in `N` and `N - 1` dimensions. Only defined for `N >= 2`.
    pub fn dimension_reduction_ratio(&self) -> Result<f64> {
        if self.dim < 2 {
            return Err(Error::Domain("dimension reduction needs N >= 2".into()));
        }
        let n = self.dim as f64;
        Ok(beta(0.5, (n - 1.0) / 2.0 + self.order))
    }

    /// Parameters one dimension down, `(N - 1, s)`.
    pub fn reduced(&self) -> Result<FracParams> {
        if self.dim < 2 {
            return Err(Error::Domain("no lower dimension for N = 1".into()));
        }
        FracParams::new(self.dim - 1, self.order)
    }
}

impl fmt::Display for FracParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} s={}", self.dim, self.order)
    }
}

/// A critical exponent, which is `+∞` in low dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CriticalExponent {
    Finite(f64),
    Unbounded,
}

impl CriticalExponent {
    /// Whether `q` lies strictly below the exponent.
    pub fn exceeds(&self, q: f64) -> bool {
        match self {
            CriticalExponent::Finite(v) => q < *v,
            CriticalExponent::Unbounded => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            CriticalExponent::Finite(v) => Some(*v),
            CriticalExponent::Unbounded => None,
        }
    }
}

impl fmt::Display for CriticalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalExponent::Finite(v) => write!(f, "{v}"),
            CriticalExponent::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub halfspace_q: CriticalExponent,
    pub fullspace_q: CriticalExponent,
}

impl CriticalExponents {
    /// Nonexistence range of the half-space problem `(-Δ)^s u = u^q`: `q > 1`
    /// and below the half-space exponent.
    pub fn halfspace_subcritical(&self, q: f64) -> bool {
        q > 1.0 && self.halfspace_q.exceeds(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        assert!(FracParams::new(0, 0.5).is_err());
        assert!(FracParams::new(2, 0.0).is_err());
        assert!(FracParams::new(2, 1.0).is_err());
        assert!(FracParams::new(2, f64::NAN).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(FracParams::new(1, 0.5).unwrap().regime(), Regime::Critical);
        assert_eq!(FracParams::new(1, 0.75).unwrap().regime(), Regime::Recurrent);
        assert_eq!(FracParams::new(1, 0.25).unwrap().regime(), Regime::Transient);
        assert_eq!(FracParams::new(2, 0.99).unwrap().regime(), Regime::Transient);
    }

    #[test]
    fn a_constant_closed_forms() {
        // Γ(1) = 1, Γ(3/2) = √π/2 give a_{1,1/2} = 1/π.
        let p = FracParams::new(1, 0.5).unwrap();
        assert!((p.normalization_a() - 1.0 / PI).abs() < 1e-15);
        // Frozen from a 50-digit evaluation of the same closed form.
        let p = FracParams::new(2, 0.75).unwrap();
        let expected = 0.17116712969055234;
        assert!((p.normalization_a() / expected - 1.0).abs() < 1e-13, "{}", p.normalization_a());
        let p = FracParams::new(3, 0.25).unwrap();
        let expected = 0.047620226950680727;
        assert!((p.normalization_a() / expected - 1.0).abs() < 1e-13, "{}", p.normalization_a());
    }

    #[test]
    fn a_vanishes_at_endpoints() {
        for n in 1..=4 {
            let lo = FracParams::new(n, 1e-9).unwrap().normalization_a();
            let hi = FracParams::new(n, 1.0 - 1e-9).unwrap().normalization_a();
            assert!(lo > 0.0 && lo < 1e-7);
            assert!(hi > 0.0 && hi < 1e-7);
        }
    }

    #[test]
    fn k_constant() {
        let p = FracParams::new(1, 0.5).unwrap();
        assert!((p.green_constant_k() - 1.0 / PI).abs() < 1e-15);
        let p = FracParams::new(3, 0.5).unwrap();
        assert!((p.green_constant_k() - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!(FracParams::new(2, 1e-10).unwrap().green_constant_k() < 1e-9);
        assert!(FracParams::new(2, 1.0 - 1e-10).unwrap().green_constant_k() < 1e-9);
    }

    #[test]
    fn green_normalization_vs_quoted_constant() {
        for n in 1..=4 {
            let p = FracParams::new(n, 0.5).unwrap();
            assert!((p.green_normalization() / (0.5 * p.green_constant_k()) - 1.0).abs() < 1e-14);
            for &s in &[0.25, 0.75] {
                let p = FracParams::new(n, s).unwrap();
                let ratio = 2.0 * PI / (4f64.powf(s) * gamma(s).powi(2) * (PI * s).sin());
                assert!((p.green_normalization() / (0.5 * p.green_constant_k()) - ratio).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn poisson_constant_from_radial_reduction() {
        // ∫_1^∞ (t²-1)^{-s} t^{-1} dt = π / (2 sin πs); with N = 1 the sphere has
        // two points, so C = sin(πs)/π.
        for &s in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let p = FracParams::new(1, s).unwrap();
            assert!((p.poisson_constant_c() - (PI * s).sin() / PI).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_continuous_in_s() {
        for n in 1..=6 {
            let mut prev: Option<(f64, f64)> = None;
            let mut s = 0.01;
            while s < 0.995 {
                let p = FracParams::new(n, s).unwrap();
                let cur = (p.normalization_a(), p.green_constant_k());
                assert!(cur.0 > 0.0 && cur.1 > 0.0);
                if let Some(prev) = prev {
                    assert!((cur.0 - prev.0).abs() < 10.0 * 0.01 * cur.0.max(prev.0).max(1.0));
                    assert!((cur.1 - prev.1).abs() < 10.0 * 0.01 * cur.1.max(prev.1).max(1.0));
                }
                prev = Some(cur);
                s += 0.01;
            }
        }
    }

    #[test]
    fn critical_exponent_values() {
        let e = FracParams::new(3, 0.5).unwrap().critical_exponents();
        assert_eq!(e.halfspace_q, CriticalExponent::Finite(3.0));
        assert_eq!(e.fullspace_q, CriticalExponent::Finite(2.0));
        for &s in &[0.2, 0.5, 0.8] {
            let e = FracParams::new(1, s).unwrap().critical_exponents();
            assert_eq!(e.halfspace_q, CriticalExponent::Unbounded);
            if 2.0 * s >= 1.0 {
                assert_eq!(e.fullspace_q, CriticalExponent::Unbounded);
            }
        }
        let e = FracParams::new(2, 0.5).unwrap().critical_exponents();
        assert_eq!(e.halfspace_q, CriticalExponent::Unbounded);
        assert!(e.halfspace_subcritical(3.0));
        assert!(!e.halfspace_subcritical(1.0));
    }

    #[test]
    fn dimension_reduction() {
        let p = FracParams::new(2, 0.5).unwrap();
        assert!((p.dimension_reduction_ratio().unwrap() - 2.0).abs() < 1e-14);
        let a1 = FracParams::new(1, 0.5).unwrap().normalization_a();
        assert!((a1 / p.normalization_a() - 2.0).abs() < 1e-13);
        assert!(FracParams::new(1, 0.5).unwrap().dimension_reduction_ratio().is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let p = FracParams::new(3, 0.25).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"n":3,"s":0.25}"#);
        let back: FracParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<FracParams>(r#"{"n":3,"s":1.5}"#).is_err());
    }
}
