//! Exact path simulation.
//!
//! Given `X_t = x`, `X_{t+dt} / c` is noncentral chi-squared with
//! `c = σ²(1 - e^{-b dt}) / (4b)`, `ν = 4a/σ²` degrees of freedom and
//! noncentrality `x e^{-b dt} / c`. Paths are chained exact transitions; the
//! Euler scheme is only kept as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::CirParams;
use crate::rng::RandomSource;

/// Uniformly sampled nonnegative trajectory on `[t0, t0 + n dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !t0.is_finite() {
            return Err(invalid(format!("t0 must be finite, got {t0}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("dt must be finite and > 0, got {dt}")));
        }
        if values.len() < 2 {
            return Err(invalid(format!(
                "path needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(invalid(format!("path value {i} is {v}, must be finite and >= 0")));
        }
        Ok(SamplePath { t0, dt, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of steps `n` (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Total observed time `n dt`.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Every `lag`-th point, which is an exact sample on the coarser grid.
    pub fn subsample(&self, lag: usize) -> Result<SamplePath> {
        if lag == 0 {
            return Err(invalid("subsample lag must be >= 1"));
        }
        let values: Vec<f64> = self.values.iter().step_by(lag).copied().collect();
        SamplePath::new(self.t0, self.dt * lag as f64, values)
    }
}

/// Initial value of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// `X_0 = x`.
    Fixed(f64),
    /// `X_0` drawn from the stationary Gamma law.
    Stationary,
}

impl Start {
    fn draw(&self, params: &CirParams, rng: &mut RandomSource) -> Result<f64> {
        match *self {
            Start::Fixed(x) if x.is_finite() && x >= 0.0 => Ok(x),
            Start::Fixed(x) => Err(invalid(format!("x0 must be finite and >= 0, got {x}"))),
            Start::Stationary => {
                let law = params.stationary_law();
                Ok(rng.gamma(law.shape, law.rate))
            }
        }
    }
}

/// Precomputed exact transition for fixed `(params, dt)`.
#[derive(Debug, Clone, Copy)]
pub struct TransitionKernel {
    decay: f64,
    scale: f64,
    df: f64,
}

impl TransitionKernel {
    pub fn new(params: &CirParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("dt must be finite and > 0, got {dt}")));
        }
        let s2 = params.sigma_sq();
        Ok(TransitionKernel {
            decay: (-params.b * dt).exp(),
            scale: -s2 * (-params.b * dt).exp_m1() / (4.0 * params.b),
            df: 4.0 * params.a / s2,
        })
    }

    #[inline]
    pub fn sample(&self, x: f64, rng: &mut RandomSource) -> f64 {
        let nc = x * self.decay / self.scale;
        self.scale * rng.noncentral_chi_squared(self.df, nc)
    }
}

/// One exact draw of `X_{t+dt}` given `X_t = x`.
pub fn sample_transition(params: &CirParams, x: f64, dt: f64, rng: &mut RandomSource) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(invalid(format!("state must be finite and >= 0, got {x}")));
    }
    Ok(TransitionKernel::new(params, dt)?.sample(x, rng))
}

fn grid_steps(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("dt must be finite and > 0, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(invalid(format!("t_end = {t_end} must be >= dt = {dt}")));
    }
    // guard against t_end/dt landing a hair below an integer
    Ok((t_end / dt * (1.0 + 1e-12)).floor() as usize)
}

/// Path of `floor(t_end/dt) + 1` points built from exact transitions.
pub fn simulate_path(
    params: &CirParams,
    start: Start,
    t_end: f64,
    dt: f64,
    rng: &mut RandomSource,
) -> Result<SamplePath> {
    let n = grid_steps(t_end, dt)?;
    let kernel = TransitionKernel::new(params, dt)?;
    let mut values = Vec::with_capacity(n + 1);
    let mut x = start.draw(params, rng)?;
    values.push(x);
    for _ in 0..n {
        x = kernel.sample(x, rng);
        values.push(x);
    }
    SamplePath::new(0.0, dt, values)
}

/// Single change in the drift parameters at `τ = ρT`; σ is shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeScenario {
    /// `(a′, b′)` before the change.
    pub theta_pre: [f64; 2],
    /// `(a″, b″)` after the change.
    pub theta_post: [f64; 2],
    pub sigma: f64,
    pub rho: f64,
    pub horizon: f64,
}

impl ChangeScenario {
    pub fn new(
        theta_pre: [f64; 2],
        theta_post: [f64; 2],
        sigma: f64,
        rho: f64,
        horizon: f64,
    ) -> Result<Self> {
        let s = ChangeScenario {
            theta_pre,
            theta_post,
            sigma,
            rho,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario with no change at all.
    pub fn null(params: &CirParams, horizon: f64) -> Result<Self> {
        ChangeScenario::new(
            [params.a, params.b],
            [params.a, params.b],
            params.sigma,
            0.5,
            horizon,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.pre()?;
        self.post()?;
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(invalid(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(invalid(format!("horizon must be > 0, got {}", self.horizon)));
        }
        Ok(())
    }

    pub fn pre(&self) -> Result<CirParams> {
        CirParams::new(self.theta_pre[0], self.theta_pre[1], self.sigma)
    }

    pub fn post(&self) -> Result<CirParams> {
        CirParams::new(self.theta_post[0], self.theta_post[1], self.sigma)
    }

    /// Change time `ρT`.
    pub fn tau(&self) -> f64 {
        self.rho * self.horizon
    }

    pub fn is_null(&self) -> bool {
        self.theta_pre == self.theta_post
    }
}

/// Simulated path under a change, with the realized change location.
#[derive(Debug, Clone)]
pub struct ChangePath {
    pub path: SamplePath,
    /// Grid index at which the post-change parameters take over.
    pub change_index: usize,
    /// Exact change time `ρT`.
    pub tau: f64,
    /// Grid time of the change, `change_index · dt`.
    pub tau_grid: f64,
}

/// Transitions out of grid points `i < round(ρT/dt)` use the pre-change
/// parameters, the rest use the post-change ones.
pub fn simulate_change_path(
    scenario: &ChangeScenario,
    start: Start,
    dt: f64,
    rng: &mut RandomSource,
) -> Result<ChangePath> {
    scenario.validate()?;
    let n = grid_steps(scenario.horizon, dt)?;
    let pre = scenario.pre()?;
    let post = scenario.post()?;
    let change_index = ((scenario.tau() / dt).round() as usize).min(n);
    let k_pre = TransitionKernel::new(&pre, dt)?;
    let k_post = TransitionKernel::new(&post, dt)?;

    let mut values = Vec::with_capacity(n + 1);
    let mut x = start.draw(&pre, rng)?;
    values.push(x);
    for i in 0..n {
        let k = if i < change_index { &k_pre } else { &k_post };
        x = k.sample(x, rng);
        values.push(x);
    }
    Ok(ChangePath {
        path: SamplePath::new(0.0, dt, values)?,
        change_index,
        tau: scenario.tau(),
        tau_grid: change_index as f64 * dt,
    })
}

/// Full-truncation Euler-Maruyama step,
/// `max(0, x + (a - bx) dt + σ √x √dt Z)`. Diagnostic only.
pub fn euler_step(params: &CirParams, x: f64, dt: f64, rng: &mut RandomSource) -> f64 {
    let z = rng.normal();
    euler_step_with(params, x, dt, z)
}

/// Euler step driven by a supplied standard normal `z`.
pub fn euler_step_with(params: &CirParams, x: f64, dt: f64, z: f64) -> f64 {
    let x = x.max(0.0);
    (x + (params.a - params.b * x) * dt + params.sigma * x.sqrt() * dt.sqrt() * z).max(0.0)
}

/// Euler path with the same grid conventions as [`simulate_path`].
pub fn simulate_euler_path(
    params: &CirParams,
    start: Start,
    t_end: f64,
    dt: f64,
    rng: &mut RandomSource,
) -> Result<SamplePath> {
    let n = grid_steps(t_end, dt)?;
    let mut values = Vec::with_capacity(n + 1);
    let mut x = start.draw(params, rng)?;
    values.push(x);
    for _ in 0..n {
        x = euler_step(params, x, dt, rng);
        values.push(x);
    }
    SamplePath::new(0.0, dt, values)
}
