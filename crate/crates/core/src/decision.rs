//! Boundary-crossing laws of the standard Brownian bridge and the resulting
//! one- and two-sided change tests.
//!
//! * `P(sup B ≥ x) = P(inf B ≤ −x) = exp(−2x²)`
//! * `P(sup |B| ≥ x) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²x²)` (Kolmogorov)

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::testprocess::{Component, TestTrajectory};

const SERIES_TOL: f64 = 1e-12;

/// `P(sup_{0≤t≤1} B_t ≥ x)`.
pub fn one_sided_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    (-2.0 * x * x).exp()
}

/// `P(sup_{0≤t≤1} |B_t| ≥ x)`.
///
/// The alternating series converges slowly for small `x`, so below `x = 1`
/// the complementary Jacobi theta form
/// `P(K ≤ x) = √(2π)/x Σ exp(−(2k−1)²π²/(8x²))` is summed instead.
pub fn two_sided_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        return (1.0 - kolmogorov_cdf_small(x)).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100u32 {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < SERIES_TOL {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn kolmogorov_cdf_small(x: f64) -> f64 {
    let c = PI * PI / (8.0 * x * x);
    let mut sum = 0.0;
    for k in 1..=100u32 {
        let j = f64::from(2 * k - 1);
        let term = (-j * j * c).exp();
        sum += term;
        if term < SERIES_TOL * sum.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (2.0 * PI).sqrt() / x * sum
}

/// Kolmogorov distribution function `P(sup |B| ≤ x)`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    1.0 - two_sided_tail(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Large positive excursions (a downward change).
    Upper,
    /// Large negative excursions (an upward change).
    Lower,
    #[serde(rename = "two")]
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    A,
    B,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub parameter: Parameter,
    pub side: Side,
    pub alpha: f64,
}

impl TestSpec {
    pub fn new(parameter: Parameter, side: Side, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(TestSpec {
            parameter,
            side,
            alpha,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Level-`alpha` threshold for the sup (or −inf, or sup-abs) of the bridge.
pub fn critical_value(alpha: f64, side: Side) -> Result<f64> {
    check_alpha(alpha)?;
    match side {
        Side::Upper | Side::Lower => Ok((-alpha.ln() / 2.0).sqrt()),
        Side::TwoSided => {
            // tail is 1 at 0 and < 1e-80 at 10
            let (mut lo, mut hi) = (0.0f64, 10.0f64);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if two_sided_tail(mid) > alpha {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub component: Component,
    pub side: Side,
    /// Level used for this component (after any multiplicity correction).
    pub alpha: f64,
    /// `sup`, `inf` or `sup |·|` of the component, depending on `side`.
    pub statistic: f64,
    /// Signed threshold: negative for the lower-side test.
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Applies one test to one component.
pub fn test_component(traj: &TestTrajectory, component: Component, side: Side, alpha: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    let c = critical_value(alpha, side)?;
    let values = traj.component(component);
    let (statistic, critical_value, p_value, reject) = match side {
        Side::Upper => {
            let s = values.fold(f64::NEG_INFINITY, f64::max);
            (s, c, one_sided_tail(s), s > c)
        }
        Side::Lower => {
            let s = values.fold(f64::INFINITY, f64::min);
            (s, -c, one_sided_tail(-s), s < -c)
        }
        Side::TwoSided => {
            let s = values.fold(0.0f64, |m, v| m.max(v.abs()));
            (s, c, two_sided_tail(s), s > c)
        }
    };
    Ok(Decision {
        component,
        side,
        alpha,
        statistic,
        critical_value,
        p_value,
        reject,
    })
}

/// Runs the requested test. `Parameter::Both` splits `alpha` equally over the
/// two components (Bonferroni) and returns one decision per component.
pub fn run_test(traj: &TestTrajectory, test_spec: &TestSpec) -> Result<Vec<Decision>> {
    match test_spec.parameter {
        Parameter::A => Ok(vec![test_component(traj, Component::A, test_spec.side, test_spec.alpha)?]),
        Parameter::B => Ok(vec![test_component(traj, Component::B, test_spec.side, test_spec.alpha)?]),
        Parameter::Both => {
            let a = 0.5 * test_spec.alpha;
            Ok(vec![
                test_component(traj, Component::A, test_spec.side, a)?,
                test_component(traj, Component::B, test_spec.side, a)?,
            ])
        }
    }
}
