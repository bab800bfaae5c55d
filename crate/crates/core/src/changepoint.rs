//! Change-point estimation and the deterministic drift of the raw score
//! under a single change.
//!
//! Under a change from `θ′` to `θ″` at `ρT`, the full-sample estimator
//! settles at
//! `θ̃ = (ρQ′ + (1−ρ)Q″)⁻¹ (ρQ′θ′ + (1−ρ)Q″θ″)`, and the raw score grows
//! linearly up to `ρT` and decays afterwards. At the change its components
//! reach `Tψ` (first) and `Tφ` (second), with
//! `ψ = (a′ − a″) e₁ᵀ H e₁`, `φ = (b′ − b″) e₂ᵀ H e₂`,
//! `H = ((ρQ′)⁻¹ + ((1−ρ)Q″)⁻¹)⁻¹`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Sym2, Vec2};
use crate::model::{stationary_design, DesignMatrix};
use crate::sampler::ChangeScenario;
use crate::testprocess::{Component, RawScore};

/// Direction of the change in the tested parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Parameter increases; the score dips, so the argmin is used.
    Up,
    /// Parameter decreases; the score peaks, so the argmax is used.
    Down,
}

impl Direction {
    /// Direction implied by a pre/post pair, `None` if equal.
    pub fn of_change(pre: f64, post: f64) -> Option<Direction> {
        if pre > post {
            Some(Direction::Down)
        } else if pre < post {
            Some(Direction::Up)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePointEstimate {
    pub tau_hat: f64,
    /// Grid index of `tau_hat`.
    pub index: usize,
    pub achieved_value: f64,
    pub direction: Direction,
    pub component: Component,
}

/// First grid time at which the chosen component attains its max (`Down`) or
/// min (`Up`).
pub fn estimate_change_point(raw: &RawScore, component: Component, direction: Direction) -> ChangePointEstimate {
    let mut best_index = 0;
    let mut best = f64::NAN;
    for (i, v) in raw.component(component).enumerate() {
        let better = match direction {
            Direction::Down => v > best,
            Direction::Up => v < best,
        };
        if i == 0 || better {
            best = v;
            best_index = i;
        }
    }
    ChangePointEstimate {
        tau_hat: raw.times[best_index],
        index: best_index,
        achieved_value: best,
        direction,
        component,
    }
}

/// `((ρQ′)⁻¹ + ((1−ρ)Q″)⁻¹)⁻¹`.
pub fn harmonic_design(rho: f64, q_pre: &DesignMatrix, q_post: &DesignMatrix) -> Result<Sym2> {
    let singular = || Error::MatrixDomain("singular design blend".into());
    let a = q_pre.scale(rho).inverse().ok_or_else(singular)?;
    let b = q_post.scale(1.0 - rho).inverse().ok_or_else(singular)?;
    a.add(&b).inverse().ok_or_else(singular)
}

/// `(ρQ′ + (1−ρ)Q″)⁻¹ (ρQ′θ′ + (1−ρ)Q″θ″)` for explicit design matrices.
pub fn theta_tilde_from(
    rho: f64,
    q_pre: &DesignMatrix,
    q_post: &DesignMatrix,
    theta_pre: Vec2,
    theta_post: Vec2,
) -> Result<Vec2> {
    let blend = q_pre.scale(rho).add(&q_post.scale(1.0 - rho));
    let u = q_pre.mul_vec(theta_pre);
    let v = q_post.mul_vec(theta_post);
    let rhs = [rho * u[0] + (1.0 - rho) * v[0], rho * u[1] + (1.0 - rho) * v[1]];
    blend
        .solve(rhs)
        .ok_or_else(|| Error::MatrixDomain("singular design blend".into()))
}

fn designs(s: &ChangeScenario) -> Result<(DesignMatrix, DesignMatrix)> {
    s.validate()?;
    Ok((stationary_design(&s.pre()?), stationary_design(&s.post()?)))
}

/// Limit of the full-sample estimator under the change.
pub fn theta_tilde(scenario: &ChangeScenario) -> Result<Vec2> {
    let (qp, qq) = designs(scenario)?;
    theta_tilde_from(scenario.rho, &qp, &qq, scenario.theta_pre, scenario.theta_post)
}

/// Per-unit-time drift of the first raw score component, `ψ`.
pub fn drift_psi(scenario: &ChangeScenario) -> Result<f64> {
    let (qp, qq) = designs(scenario)?;
    let h = harmonic_design(scenario.rho, &qp, &qq)?;
    Ok((scenario.theta_pre[0] - scenario.theta_post[0]) * h.xx)
}

/// Per-unit-time drift of the second raw score component, `φ`.
pub fn drift_phi(scenario: &ChangeScenario) -> Result<f64> {
    let (qp, qq) = designs(scenario)?;
    let h = harmonic_design(scenario.rho, &qp, &qq)?;
    Ok((scenario.theta_pre[1] - scenario.theta_post[1]) * h.yy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAnalytics {
    pub theta_tilde: Vec2,
    pub psi: f64,
    pub phi: f64,
    pub q_pre: DesignMatrix,
    pub q_post: DesignMatrix,
}

pub fn analyze(scenario: &ChangeScenario) -> Result<ScenarioAnalytics> {
    let (q_pre, q_post) = designs(scenario)?;
    Ok(ScenarioAnalytics {
        theta_tilde: theta_tilde(scenario)?,
        psi: drift_psi(scenario)?,
        phi: drift_phi(scenario)?,
        q_pre,
        q_post,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(values: &[f64]) -> RawScore {
        RawScore {
            times: (0..values.len()).map(|i| i as f64).collect(),
            values: values.iter().map(|&v| [v, -v]).collect(),
        }
    }

    #[test]
    fn argmax_and_ties() {
        let r = raw(&[0.0, 1.0, 3.0, 2.0, 0.0]);
        let e = estimate_change_point(&r, Component::A, Direction::Down);
        assert_eq!((e.tau_hat, e.achieved_value), (2.0, 3.0));

        let r = raw(&[0.0, 3.0, 3.0, 0.0]);
        assert_eq!(estimate_change_point(&r, Component::A, Direction::Down).tau_hat, 1.0);
        // second component is the negation, so its argmin is the same point
        let e = estimate_change_point(&r, Component::B, Direction::Up);
        assert_eq!((e.tau_hat, e.achieved_value), (1.0, -3.0));
    }

    #[test]
    fn tilde_fixed_point_and_midpoint() {
        let s = ChangeScenario::new([1.5, 0.8], [1.5, 0.8], 0.4, 0.3, 100.0).unwrap();
        let t = theta_tilde(&s).unwrap();
        assert!((t[0] - 1.5).abs() < 1e-12 && (t[1] - 0.8).abs() < 1e-12);
        assert_eq!(drift_psi(&s).unwrap(), 0.0);
        assert_eq!(drift_phi(&s).unwrap(), 0.0);

        let q = Sym2::new(1.0, -1.2, 2.0);
        let t = theta_tilde_from(0.5, &q, &q, [2.0, 1.0], [1.0, 3.0]).unwrap();
        assert!((t[0] - 1.5).abs() < 1e-12 && (t[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tilde_matches_dense_solve() {
        let s = ChangeScenario::new([2.0, 1.0], [1.0, 1.0], 0.5, 0.5, 100.0).unwrap();
        // Q′ = [[1,-2],[-2,4.25]], Q″ = [[1,-1],[-1,1.125]];
        // blend = [[1,-1.5],[-1.5,2.6875]], rhs = [0, 0.1875], solution (9/14, 3/7)
        let m: [[f64; 2]; 2] = [[1.0, -1.5], [-1.5, 2.6875]];
        let rhs: [f64; 2] = [0.5 * (2.0 - 2.0) + 0.5 * (1.0 - 1.0), 0.5 * (-4.0 + 4.25) + 0.5 * (-1.0 + 1.125)];
        // Gaussian elimination with partial pivoting
        let (mut a, mut r) = (m, rhs);
        if a[1][0].abs() > a[0][0].abs() {
            a.swap(0, 1);
            r.swap(0, 1);
        }
        let f = a[1][0] / a[0][0];
        let a11 = a[1][1] - f * a[0][1];
        let r1 = r[1] - f * r[0];
        let y = r1 / a11;
        let x = (r[0] - a[0][1] * y) / a[0][0];
        let t = theta_tilde(&s).unwrap();
        assert!((t[0] - x).abs() < 1e-12 && (t[1] - y).abs() < 1e-12, "{t:?} vs {x},{y}");
        assert!((t[0] - 9.0 / 14.0).abs() < 1e-12 && (t[1] - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn psi_equal_designs_quarter() {
        let q = Sym2::new(1.0, -0.7, 1.9);
        let h = harmonic_design(0.5, &q, &q).unwrap();
        assert!(h.max_abs_diff(&q.scale(0.25)) < 1e-12);
        assert!(((2.0 - 1.0) * h.xx - 0.25).abs() < 1e-12);
    }

    #[test]
    fn psi_known_value() {
        // H = [[24,-32],[-32,52]] / 224 for this scenario
        let s = ChangeScenario::new([2.0, 1.0], [1.0, 1.0], 0.5, 0.5, 100.0).unwrap();
        assert!((drift_psi(&s).unwrap() - 24.0 / 224.0).abs() < 1e-12);
    }

    fn scenario() -> impl Strategy<Value = ChangeScenario> {
        (
            (0.1f64..4.0, 0.1f64..4.0),
            (0.1f64..4.0, 0.1f64..4.0),
            0.1f64..2.0,
            0.05f64..0.95,
        )
            .prop_map(|((a1, b1), (a2, b2), s, rho)| {
                ChangeScenario::new([a1, b1], [a2, b2], s, rho, 100.0).unwrap()
            })
    }

    proptest! {
        #[test]
        fn drift_signs_follow_change(s in scenario()) {
            let psi = drift_psi(&s).unwrap();
            let phi = drift_phi(&s).unwrap();
            let da = s.theta_pre[0] - s.theta_post[0];
            let db = s.theta_pre[1] - s.theta_post[1];
            prop_assert_eq!(psi.signum() * da.abs().signum(), da.signum());
            prop_assert_eq!(phi.signum() * db.abs().signum(), db.signum());
        }

        #[test]
        fn decomposition_identities(s in scenario()) {
            // only the a-change part enters ψ, so hold b fixed
            let s = ChangeScenario { theta_post: [s.theta_post[0], s.theta_pre[1]], ..s };
            let psi = drift_psi(&s).unwrap();
            let t = theta_tilde(&s).unwrap();
            let m_pre = s.pre().unwrap().mean_level();
            let m_post = s.post().unwrap().mean_level();
            let lhs_pre = (s.theta_pre[0] - t[0]) - (s.theta_pre[1] - t[1]) * m_pre;
            let lhs_post = (s.theta_post[0] - t[0]) - (s.theta_post[1] - t[1]) * m_post;
            let scale = 1.0 + psi.abs() / s.rho.min(1.0 - s.rho);
            prop_assert!((lhs_pre - psi / s.rho).abs() < 1e-10 * scale);
            prop_assert!((lhs_post + psi / (1.0 - s.rho)).abs() < 1e-10 * scale);
        }

        #[test]
        fn argmax_contract(vals in proptest::collection::vec(-5.0f64..5.0, 1..60)) {
            let r = raw(&vals);
            let e = estimate_change_point(&r, Component::A, Direction::Down);
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(e.achieved_value, max);
            prop_assert_eq!(vals.iter().position(|&v| v == max).unwrap(), e.index);
            let e = estimate_change_point(&r, Component::A, Direction::Up);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(vals.iter().position(|&v| v == min).unwrap(), e.index);
        }
    }
}
