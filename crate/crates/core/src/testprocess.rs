//! The estimated efficient score process and its normalized version.
//!
//! The raw score at elapsed time `s` is
//! `∫₀ˢ [1, −X_u]ᵀ dM̂_u = d_s − Q_s θ̂`, with `dM̂ = dX − (â − b̂X) du`. The
//! test trajectory rescales it by `I_T^{-1/2}` and reads it on `t = s/T`.
//! Because `Q_s θ̂_s = d_s`, the same quantity equals the CUSUM contrast
//! `Q_s (θ̂_s − θ̂_T)`; [`cusum_trajectory`] evaluates that form separately.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimator::{lse_at, lse_full, ThetaHat};
use crate::linalg::{sub2, Sym2, Vec2};
use crate::pathfun::{InfoMatrix, PathFunctionals};

/// Unnormalized cumulative score on the path grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScore {
    /// Elapsed time `s ∈ [0, T]` per grid point.
    pub times: Vec<f64>,
    /// `[∫₀ˢ dM̂, −∫₀ˢ X dM̂]`.
    pub values: Vec<Vec2>,
}

impl RawScore {
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn component(&self, c: Component) -> impl Iterator<Item = f64> + '_ {
        let k = c.index();
        self.values.iter().map(move |v| v[k])
    }
}

/// Which score component: 1 tracks `a`, 2 tracks `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "1")]
    A,
    #[serde(rename = "2")]
    B,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::A => 0,
            Component::B => 1,
        }
    }
}

/// `M̂_t^{(T)}` on `t ∈ {0, 1/m, …, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestTrajectory {
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec2>,
    /// Path grid index behind each `t`.
    pub indices: Vec<usize>,
    /// `I_T` used for normalization.
    pub info_t: InfoMatrix,
}

impl TestTrajectory {
    pub fn component(&self, c: Component) -> impl Iterator<Item = f64> + '_ {
        let k = c.index();
        self.values.iter().map(move |v| v[k])
    }

    /// Builds a trajectory from externally supplied values on a uniform grid
    /// (synthetic inputs for the decision rules).
    pub fn from_values(values: Vec<Vec2>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("trajectory needs at least 2 points"));
        }
        let m = values.len() - 1;
        Ok(TestTrajectory {
            t_grid: (0..=m).map(|k| k as f64 / m as f64).collect(),
            indices: (0..=m).collect(),
            values,
            info_t: Sym2::IDENTITY,
        })
    }
}

/// `d_s − Q_s θ̂` at every grid point.
pub fn raw_score(fun: &PathFunctionals, theta: &ThetaHat) -> RawScore {
    let th = theta.as_vec();
    let n = fun.len();
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        times.push(fun.elapsed(i));
        values.push(sub2(fun.d_at(i), fun.q_at(i).mul_vec(th)));
    }
    RawScore { times, values }
}

/// Path indices `round(k n / m)` for `k = 0..=m`.
fn grid_indices(steps: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > steps {
        return Err(invalid(format!("grid size must be in 1..={steps}, got {m}")));
    }
    Ok((0..=m)
        .map(|k| ((k as u128 * steps as u128 + m as u128 / 2) / m as u128) as usize)
        .collect())
}

/// Normalized test trajectory from the score-integral definition.
///
/// `grid_size = None` uses one point per path step.
pub fn test_trajectory(fun: &PathFunctionals, grid_size: Option<usize>) -> Result<TestTrajectory> {
    let theta = lse_full(fun)?;
    let info_t = fun.info_at(fun.last());
    let norm = info_t.inv_sqrt()?;
    let steps = fun.last();
    let indices = grid_indices(steps, grid_size.unwrap_or(steps))?;
    let th = theta.as_vec();
    let horizon = fun.horizon();
    let mut t_grid = Vec::with_capacity(indices.len());
    let mut values = Vec::with_capacity(indices.len());
    for &i in &indices {
        t_grid.push(fun.elapsed(i) / horizon);
        values.push(norm.mul_vec(sub2(fun.d_at(i), fun.q_at(i).mul_vec(th))));
    }
    Ok(TestTrajectory {
        t_grid,
        values,
        indices,
        info_t,
    })
}

/// `I_T^{-1/2} Q_{tT} (θ̂_{tT} − θ̂_T)` at the same grid as
/// [`test_trajectory`]; `None` where `Q_{tT}` is numerically singular.
pub fn cusum_trajectory(fun: &PathFunctionals, grid_size: Option<usize>) -> Result<Vec<Option<Vec2>>> {
    let theta_t = lse_full(fun)?.as_vec();
    let norm = fun.info_at(fun.last()).inv_sqrt()?;
    let steps = fun.last();
    let indices = grid_indices(steps, grid_size.unwrap_or(steps))?;
    Ok(indices
        .into_iter()
        .map(|i| {
            if i == 0 {
                return None;
            }
            lse_at(fun, i).ok().map(|window| {
                let diff = sub2(window.as_vec(), theta_t);
                norm.mul_vec(fun.q_at(i).mul_vec(diff))
            })
        })
        .collect())
}
