//! Path functionals: cumulative integrals of `X`, `X²`, `X³`, the observable
//! Itô integral `∫X dX`, and the `Q_s`, `d_s`, `I_s` objects built from them.
//!
//! Riemann integrals use the composite trapezoid rule on the sampling grid.
//! `∫₀ˢ X dX` is never formed as a Stieltjes sum; it comes from Itô's
//! formula, `∫₀ˢ X dX = ½ (X_s² − X_0² − σ² ∫₀ˢ X du)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{Sym2, Vec2};
use crate::sampler::SamplePath;

/// `[[s, −∫X], [−∫X, ∫X²]]` over a window of length `s`.
pub type QMatrix = Sym2;
/// `σ² [[∫X, −∫X²], [−∫X², ∫X³]]`.
pub type InfoMatrix = Sym2;
/// `[X_s − X_0, −∫X dX]`.
pub type ScoreVector = Vec2;

/// `det Q_s` below `SINGULAR_RTOL · s · ∫X²` counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Source of the diffusion coefficient σ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSq {
    /// Realized quadratic variation over `∫X dt`.
    #[default]
    Auto,
    Known(f64),
}

/// Running integrals of a path, indexed by grid point.
#[derive(Debug, Clone)]
pub struct PathFunctionals {
    t0: f64,
    dt: f64,
    x: Vec<f64>,
    cum_x: Vec<f64>,
    cum_x2: Vec<f64>,
    cum_x3: Vec<f64>,
    cum_ito: Vec<f64>,
    sigma_sq: f64,
}

fn cumulative_trapezoid(x: &[f64], dt: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    let mut prev = f(x[0]);
    out.push(0.0);
    for &xi in &x[1..] {
        let cur = f(xi);
        acc += 0.5 * dt * (prev + cur);
        out.push(acc);
        prev = cur;
    }
    out
}

fn trapezoid_total(x: &[f64], dt: f64) -> f64 {
    let n = x.len();
    let interior: f64 = x[1..n - 1].iter().sum();
    dt * (0.5 * (x[0] + x[n - 1]) + interior)
}

/// `Σ (X_{i+1} − X_i)² / ∫₀ᵀ X dt`.
pub fn estimate_sigma_sq(path: &SamplePath) -> Result<f64> {
    let x = path.values();
    let integral = trapezoid_total(x, path.dt());
    if integral <= 0.0 {
        return Err(Error::DegeneratePath(
            "∫X dt = 0; quadratic variation ratio undefined".into(),
        ));
    }
    let qv: f64 = x.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    Ok(qv / integral)
}

/// Cumulative `∫₀ˢ X dX` at every grid point.
pub fn ito_integral(path: &SamplePath, sigma_sq: f64) -> Result<Vec<f64>> {
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return Err(invalid(format!("sigma_sq must be finite and >= 0, got {sigma_sq}")));
    }
    let x = path.values();
    let cum_x = cumulative_trapezoid(x, path.dt(), |v| v);
    Ok(ito_from(x, &cum_x, sigma_sq))
}

fn ito_from(x: &[f64], cum_x: &[f64], sigma_sq: f64) -> Vec<f64> {
    let x0sq = x[0] * x[0];
    x.iter()
        .zip(cum_x)
        .map(|(&xs, &ix)| 0.5 * (xs * xs - x0sq - sigma_sq * ix))
        .collect()
}

/// All running functionals in one pass over the path.
pub fn compute_functionals(path: &SamplePath, sigma_sq: SigmaSq) -> Result<PathFunctionals> {
    let sigma_sq = match sigma_sq {
        SigmaSq::Auto => estimate_sigma_sq(path)?,
        SigmaSq::Known(s) if s.is_finite() && s >= 0.0 => s,
        SigmaSq::Known(s) => {
            return Err(invalid(format!("sigma_sq must be finite and >= 0, got {s}")))
        }
    };
    let x = path.values();
    let dt = path.dt();
    let n = x.len();
    let mut cum_x = Vec::with_capacity(n);
    let mut cum_x2 = Vec::with_capacity(n);
    let mut cum_x3 = Vec::with_capacity(n);
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    cum_x.push(0.0);
    cum_x2.push(0.0);
    cum_x3.push(0.0);
    let h = 0.5 * dt;
    for w in x.windows(2) {
        let (p, c) = (w[0], w[1]);
        s1 += h * (p + c);
        s2 += h * (p * p + c * c);
        s3 += h * (p * p * p + c * c * c);
        cum_x.push(s1);
        cum_x2.push(s2);
        cum_x3.push(s3);
    }
    let cum_ito = ito_from(x, &cum_x, sigma_sq);
    Ok(PathFunctionals {
        t0: path.t0(),
        dt,
        x: x.to_vec(),
        cum_x,
        cum_x2,
        cum_x3,
        cum_ito,
        sigma_sq,
    })
}

impl PathFunctionals {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the final grid point.
    pub fn last(&self) -> usize {
        self.x.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn cum_x(&self) -> &[f64] {
        &self.cum_x
    }

    pub fn cum_x2(&self) -> &[f64] {
        &self.cum_x2
    }

    pub fn cum_x3(&self) -> &[f64] {
        &self.cum_x3
    }

    pub fn cum_ito(&self) -> &[f64] {
        &self.cum_ito
    }

    /// Elapsed time since the path start at grid index `i`.
    pub fn elapsed(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Absolute grid time.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.elapsed(i)
    }

    pub fn horizon(&self) -> f64 {
        self.elapsed(self.last())
    }

    pub fn q_at(&self, i: usize) -> QMatrix {
        self.q_between(0, i)
    }

    pub fn d_at(&self, i: usize) -> ScoreVector {
        self.d_between(0, i)
    }

    pub fn info_at(&self, i: usize) -> InfoMatrix {
        self.info_between(0, i)
    }

    /// `Q` over the window between grid points `u <= s`.
    pub fn q_between(&self, u: usize, s: usize) -> QMatrix {
        let ix = self.cum_x[s] - self.cum_x[u];
        Sym2::new(self.elapsed(s) - self.elapsed(u), -ix, self.cum_x2[s] - self.cum_x2[u])
    }

    pub fn d_between(&self, u: usize, s: usize) -> ScoreVector {
        [self.x[s] - self.x[u], -(self.cum_ito[s] - self.cum_ito[u])]
    }

    pub fn info_between(&self, u: usize, s: usize) -> InfoMatrix {
        let ix = self.cum_x[s] - self.cum_x[u];
        let ix2 = self.cum_x2[s] - self.cum_x2[u];
        let ix3 = self.cum_x3[s] - self.cum_x3[u];
        Sym2::new(ix, -ix2, ix3).scale(self.sigma_sq)
    }

    /// Whether `Q_s` at grid index `i` fails the relative singularity test.
    pub fn is_singular(&self, i: usize) -> bool {
        let q = self.q_at(i);
        !(q.det() >= SINGULAR_RTOL * q.xx * q.yy && q.det() > 0.0)
    }

    /// First grid index whose `Q_s` clears the singularity tolerance.
    pub fn first_regular_index(&self) -> Option<usize> {
        (1..self.len()).find(|&i| !self.is_singular(i))
    }
}
