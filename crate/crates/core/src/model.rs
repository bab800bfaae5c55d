//! CIR parameterization and its closed-form moments.
//!
//! The process solves `dX = (a - bX) dt + σ √X dW` with `a, b, σ > 0`. Its
//! stationary law is Gamma with shape `2a/σ²` and rate `2b/σ²`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::linalg::Sym2;

/// Stationary design matrix `[[1, -E X], [-E X, E X²]]`.
pub type DesignMatrix = Sym2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
}

impl CirParams {
    pub fn new(a: f64, b: f64, sigma: f64) -> Result<Self> {
        let p = CirParams { a, b, sigma };
        p.validate()?;
        Ok(p)
    }

    /// Checks the ergodicity constraints. Useful after deserialization.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("sigma", self.sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Long-run mean `a / b`.
    pub fn mean_level(&self) -> f64 {
        self.a / self.b
    }

    pub fn stationary_law(&self) -> StationaryLaw {
        let s2 = self.sigma_sq();
        StationaryLaw {
            shape: 2.0 * self.a / s2,
            rate: 2.0 * self.b / s2,
        }
    }
}

/// Gamma(shape, rate) law of `X_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryLaw {
    pub shape: f64,
    pub rate: f64,
}

impl StationaryLaw {
    /// `E X^order = Γ(shape + order) / (rate^order Γ(shape))`.
    ///
    /// Non-negative integer orders use the rising-factorial product so that
    /// the first moment is `shape / rate` to rounding; other orders go through
    /// log-Gamma.
    pub fn moment(&self, order: f64) -> Result<f64> {
        if !order.is_finite() {
            return Err(invalid(format!("moment order must be finite, got {order}")));
        }
        if order <= -self.shape {
            return Err(Error::MomentDomain {
                order,
                bound: -self.shape,
            });
        }
        if order >= 0.0 && order.fract() == 0.0 && order <= 64.0 {
            let k = order as u32;
            let mut m = 1.0;
            for i in 0..k {
                m *= (self.shape + f64::from(i)) / self.rate;
            }
            return Ok(m);
        }
        Ok((ln_gamma(self.shape + order) - ln_gamma(self.shape) - order * self.rate.ln()).exp())
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
}

pub fn stationary_moment(params: &CirParams, order: f64) -> Result<f64> {
    params.stationary_law().moment(order)
}

fn check_time(x0: f64, dt: f64) -> Result<()> {
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(invalid(format!("x0 must be finite and >= 0, got {x0}")));
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(invalid(format!("dt must be finite and >= 0, got {dt}")));
    }
    Ok(())
}

/// `E[X_{t+dt} | X_t = x0] = x0 e^{-b dt} + (a/b)(1 - e^{-b dt})`.
pub fn conditional_mean(params: &CirParams, x0: f64, dt: f64) -> Result<f64> {
    check_time(x0, dt)?;
    let e = (-params.b * dt).exp();
    let one_minus_e = -(-params.b * dt).exp_m1();
    Ok(x0 * e + params.mean_level() * one_minus_e)
}

/// `E[X²_{t+dt} | X_t = x0]`.
///
/// Closed form of the double integral
/// `e^{-2bt} x0² + (2a+σ²) ∫₀ᵗ (e^{-b(2t-u)} x0 + a ∫₀ᵘ e^{-b(2t-u-v)} dv) du`,
/// which reduces to
/// `e^{-2bt} x0² + (2a+σ²) (x0 e(1-e)/b + a(1-e)²/(2b²))` with `e = e^{-bt}`.
pub fn conditional_second_moment(params: &CirParams, x0: f64, dt: f64) -> Result<f64> {
    check_time(x0, dt)?;
    let CirParams { a, b, .. } = *params;
    let e = (-b * dt).exp();
    let one_minus_e = -(-b * dt).exp_m1();
    let k = 2.0 * a + params.sigma_sq();
    Ok(e * e * x0 * x0 + k * (x0 * e * one_minus_e / b + a * one_minus_e * one_minus_e / (2.0 * b * b)))
}

pub fn conditional_variance(params: &CirParams, x0: f64, dt: f64) -> Result<f64> {
    let m = conditional_mean(params, x0, dt)?;
    Ok(conditional_second_moment(params, x0, dt)? - m * m)
}

/// `[[1, -E X_∞], [-E X_∞, E X_∞²]]` for the given parameters.
pub fn stationary_design(params: &CirParams) -> DesignMatrix {
    let law = params.stationary_law();
    let m1 = law.shape / law.rate;
    let m2 = law.shape * (law.shape + 1.0) / (law.rate * law.rate);
    Sym2::new(1.0, -m1, m2)
}
