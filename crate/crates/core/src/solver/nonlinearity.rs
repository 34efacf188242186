use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

const SAMPLES: usize = 2001;

/// A nonnegative, nondecreasing, Lipschitz nonlinearity `f` on `[0, M]`.
#[derive(Clone)]
pub struct Nonlinearity {
    rule: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    name: String,
    range_max: f64,
    lipschitz: f64,
    flat_at_zero: bool,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("range_max", &self.range_max)
            .field("lipschitz", &self.lipschitz)
            .field("flat_at_zero", &self.flat_at_zero)
            .finish()
    }
}

impl Nonlinearity {
    /// Validates the tags on a sample of `[0, range_max]`: `f(0) >= 0`, monotonicity,
    /// the Lipschitz constant on consecutive sample pairs and, when
    /// `flat_at_zero` is claimed, `f(0) = 0` with a vanishing slope at 0.
    pub fn new(
        name: impl Into<String>,
        rule: impl Fn(f64) -> f64 + Send + Sync + 'static,
        range_max: f64,
        lipschitz: f64,
        flat_at_zero: bool,
    ) -> Result<Self> {
        let name = name.into();
        if !(range_max > 0.0 && range_max.is_finite()) {
            return Err(Error::InvalidParams(format!("nonlinearity range must be positive, got {range_max}")));
        }
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidParams(format!("Lipschitz constant must be finite and >= 0, got {lipschitz}")));
        }
        let f0 = rule(0.0);
        if !(f0 >= 0.0) {
            return Err(Error::InvalidParams(format!("{name}: f(0) = {f0} is negative")));
        }
        let h = range_max / (SAMPLES - 1) as f64;
        let mut prev = f0;
        for i in 1..SAMPLES {
            let v = rule(i as f64 * h);
            if !v.is_finite() || v < prev {
                return Err(Error::InvalidParams(format!("{name} is not nondecreasing near t = {}", i as f64 * h)));
            }
            if v - prev > lipschitz * h * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::InvalidParams(format!("{name} exceeds Lipschitz constant {lipschitz} near t = {}", i as f64 * h)));
            }
            prev = v;
        }
        if flat_at_zero {
            let t = 1e-8 * range_max;
            if f0 != 0.0 || rule(t) / t > 1e-2 * lipschitz.max(1.0) {
                return Err(Error::InvalidParams(format!("{name} is tagged f'(0) = 0 but is not flat at 0")));
            }
        }
        Ok(Nonlinearity { rule: Arc::new(rule), name, range_max, lipschitz, flat_at_zero })
    }

    pub fn zero() -> Self {
        Nonlinearity { rule: Arc::new(|_| 0.0), name: "zero".into(), range_max: f64::INFINITY, lipschitz: 0.0, flat_at_zero: true }
    }

    /// `t ↦ t^q` on `[0, range_max]`, `q >= 1`.
    pub fn power(q: f64, range_max: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidParams(format!("power nonlinearity needs q >= 1, got {q}")));
        }
        Nonlinearity::new(format!("power({q})"), move |t: f64| t.powf(q), range_max, q * range_max.powf(q - 1.0), q > 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.rule)(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_flat_at_zero(&self) -> bool {
        self.flat_at_zero
    }
}
