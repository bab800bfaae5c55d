//! Closed-form 2x2 linear algebra.
//!
//! Every matrix in the test construction is a symmetric 2x2 (Q_s, I_s, the
//! stationary design matrices), so a dedicated type with explicit adjugate
//! formulas is enough.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Sym2::new(x, 0.0, y)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn scale(&self, k: f64) -> Sym2 {
        Sym2::new(k * self.xx, k * self.xy, k * self.yy)
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    pub fn sub(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    /// Plain matrix product. The result is symmetric only when the factors
    /// commute, so it is returned as a full row-major array.
    pub fn mul(&self, o: &Sym2) -> [[f64; 2]; 2] {
        [
            [
                self.xx * o.xx + self.xy * o.xy,
                self.xx * o.xy + self.xy * o.yy,
            ],
            [
                self.xy * o.xx + self.yy * o.xy,
                self.xy * o.xy + self.yy * o.yy,
            ],
        ]
    }

    /// Quadratic form `uᵀ M v`.
    pub fn form(&self, u: Vec2, v: Vec2) -> f64 {
        let mv = self.mul_vec(v);
        u[0] * mv[0] + u[1] * mv[1]
    }

    /// Inverse via the adjugate. `None` when the determinant is exactly zero
    /// or not finite.
    pub fn inverse(&self) -> Option<Sym2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Sym2::new(self.yy / d, -self.xy / d, self.xx / d))
    }

    /// Solves `M x = rhs` by Cramer's rule.
    pub fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some([
            (self.yy * rhs[0] - self.xy * rhs[1]) / d,
            (self.xx * rhs[1] - self.xy * rhs[0]) / d,
        ])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.xx + self.yy);
        let rad = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mid - rad, mid + rad)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.yy > 0.0 && self.det() > 0.0 && self.eigenvalues().0 > 0.0
    }

    /// Principal inverse square root of a symmetric positive definite matrix.
    ///
    /// Uses the 2x2 Cayley-Hamilton identity `sqrt(M) = (M + sI) / t` with
    /// `s = sqrt(det M)` and `t = sqrt(tr M + 2s)`; since `det sqrt(M) = s`,
    /// the inverse is `adj(M + sI) / (s t)`.
    pub fn inv_sqrt(&self) -> Result<Sym2> {
        if !(self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()) {
            return Err(Error::MatrixDomain("non-finite entries".into()));
        }
        if !self.is_positive_definite() {
            return Err(Error::MatrixDomain(format!(
                "[[{}, {}], [{}, {}]] has a non-positive eigenvalue",
                self.xx, self.xy, self.xy, self.yy
            )));
        }
        let s = self.det().sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        let k = 1.0 / (s * t);
        Ok(Sym2::new(k * (self.yy + s), -k * self.xy, k * (self.xx + s)))
    }

    pub fn max_abs_diff(&self, o: &Sym2) -> f64 {
        (self.xx - o.xx)
            .abs()
            .max((self.xy - o.xy).abs())
            .max((self.yy - o.yy).abs())
    }
}

pub(crate) fn sub2(u: Vec2, v: Vec2) -> Vec2 {
    [u[0] - v[0], u[1] - v[1]]
}
