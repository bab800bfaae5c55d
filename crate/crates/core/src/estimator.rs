//! Least-squares drift estimators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Sym2;
use crate::pathfun::PathFunctionals;

/// Continuous-record estimate `θ̂_s = Q_s⁻¹ d_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaHat {
    pub a_hat: f64,
    pub b_hat: f64,
    /// Elapsed time `s` of the window end.
    pub window_end: f64,
    /// `det Q_s`, kept as a conditioning diagnostic.
    pub det_q: f64,
}

impl ThetaHat {
    pub fn as_vec(&self) -> [f64; 2] {
        [self.a_hat, self.b_hat]
    }
}

/// Estimator over `[0, s]` where `s` is the grid index `index`.
pub fn lse_at(fun: &PathFunctionals, index: usize) -> Result<ThetaHat> {
    if index == 0 || index >= fun.len() {
        return Err(invalid(format!(
            "window end index {index} outside 1..{}",
            fun.len()
        )));
    }
    let q = fun.q_at(index);
    let det_q = q.det();
    let window_end = fun.elapsed(index);
    if fun.is_singular(index) {
        return Err(Error::SingularWindow { window_end, det_q });
    }
    let theta = q
        .solve(fun.d_at(index))
        .ok_or(Error::SingularWindow { window_end, det_q })?;
    if !(theta[0].is_finite() && theta[1].is_finite()) {
        return Err(Error::SingularWindow { window_end, det_q });
    }
    Ok(ThetaHat {
        a_hat: theta[0],
        b_hat: theta[1],
        window_end,
        det_q,
    })
}

/// Full-sample estimator `θ̂_T`.
pub fn lse_full(fun: &PathFunctionals) -> Result<ThetaHat> {
    lse_at(fun, fun.last())
}

/// Unit-lag discrete least squares,
/// `argmin Σ (X_i − X_{i−1} − (a − b X_{i−1}))²`.
pub fn lse_discrete(observations: &[f64]) -> Result<(f64, f64)> {
    if observations.len() < 3 {
        // n = len − 1 transitions; n >= 2 is needed for a 2-parameter fit
        return Err(invalid(format!(
            "need at least 3 observations, got {}",
            observations.len()
        )));
    }
    let n = (observations.len() - 1) as f64;
    let (mut sx, mut sxx, mut sdx, mut sxdx) = (0.0, 0.0, 0.0, 0.0);
    for w in observations.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        let dx = cur - prev;
        sx += prev;
        sxx += prev * prev;
        sdx += dx;
        sxdx += dx * prev;
    }
    let design = Sym2::new(n, -sx, sxx);
    let det = design.det();
    if det <= 1e-12 * n * sxx {
        return Err(Error::SingularDesign { det });
    }
    let theta = design
        .solve([sdx, -sxdx])
        .ok_or(Error::SingularDesign { det })?;
    Ok((theta[0], theta[1]))
}
