//! The modified Hessian `A = [[M_xx + M_y/y, M_xy], [M_xy, M_yy]]` of
//! `M(x, y) = log x + Phi(y/x)` for a profile `Phi`.
//!
//! With `t = y/x`:
//!
//! ```text
//! a11 = x^-2 (-1 + 2t Phi' + t^2 Phi'' + Phi'/t)
//! a12 = -x^-2 (Phi' + t Phi'')
//! a22 = x^-2 Phi''
//! ```
//!
//! For `Phi = F` the entries reach `e^5000` at `t = 100`, so the matrix is
//! carried as `exp(log_scale) * B` with `B` of moderate size.

use crate::error::{Error, Result};
use crate::special::functions::f_derivatives;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanMatrix {
    pub x: f64,
    pub y: f64,
    /// Unscaled entries; may be infinite when `log_scale > 709`.
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub det: f64,
    pub min_eigenvalue: f64,
    pub log_scale: f64,
    /// `A / exp(log_scale)` as `[b11, b12, b22]`.
    pub scaled: [f64; 3],
}

/// Eigenvalues `(min, max)` of `[[a, b], [b, c]]`.
pub fn sym_eigen(a: f64, b: f64, c: f64) -> (f64, f64) {
    let half_tr = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(b);
    let hi = half_tr + r;
    let lo = if hi > 0.0 {
        // avoids cancellation in half_tr - r when the matrix is near rank one
        (a * c - b * b) / hi
    } else {
        half_tr - r
    };
    (lo, hi)
}

impl BellmanMatrix {
    fn from_scaled(x: f64, y: f64, log_scale: f64, b: [f64; 3]) -> Self {
        let s = log_scale.exp();
        let (a11, a12, a22) = (s * b[0], s * b[1], s * b[2]);
        let det = a11 * a22 - a12 * a12;
        let (lo, _) = sym_eigen(a11, a12, a22);
        Self {
            x,
            y,
            a11,
            a12,
            a22,
            det,
            min_eigenvalue: lo,
            log_scale,
            scaled: b,
        }
    }

    /// Spectral norm of the scaled matrix.
    pub fn scaled_norm(&self) -> f64 {
        let [a, b, c] = self.scaled;
        let (lo, hi) = sym_eigen(a, b, c);
        lo.abs().max(hi.abs())
    }

    /// `det(A) / ||A||^2`, independent of the scaling.
    pub fn relative_det(&self) -> f64 {
        let [a, b, c] = self.scaled;
        let n = self.scaled_norm();
        (a * c - b * b) / (n * n)
    }

    /// `lambda_min(A) / ||A||`.
    pub fn relative_min_eigenvalue(&self) -> f64 {
        let [a, b, c] = self.scaled;
        sym_eigen(a, b, c).0 / self.scaled_norm()
    }
}

fn check_xy(func: &'static str, x: f64, y: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { func, value: x, reason: "x must be positive" });
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain { func, value: y, reason: "y must be nonnegative" });
    }
    Ok(())
}

/// Entries for a profile given `log Phi'` (or the log of its magnitude),
/// the sign of `Phi'`, and `Phi''/Phi'`.
fn assemble(x: f64, y: f64, t: f64, log_d1: f64, sign_d1: f64, d2_over_d1: f64) -> BellmanMatrix {
    let shift = log_d1.max(0.0);
    let d1 = sign_d1 * (log_d1 - shift).exp();
    let d2 = d1 * d2_over_d1;
    let b11 = -(-shift).exp() + 2.0 * t * d1 + t * t * d2 + d1 / t;
    let b12 = -(d1 + t * d2);
    let b22 = d2;
    BellmanMatrix::from_scaled(x, y, shift - 2.0 * x.ln(), [b11, b12, b22])
}

/// The matrix for `M = log x + F(y/x)`. At `y = 0` the entry `M_y / y` is
/// replaced by its limit `x^-2 F''(0) = x^-2`. Only `F'` and `F''` enter,
/// and both come from the kernel, so `y/x` is not limited to the F table.
pub fn bellman_matrix(x: f64, y: f64) -> Result<BellmanMatrix> {
    check_xy("bellman_matrix", x, y)?;
    let t = y / x;
    if t == 0.0 {
        return Ok(BellmanMatrix::from_scaled(x, y, -2.0 * x.ln(), [0.0, 0.0, 1.0]));
    }
    let d = f_derivatives(t)?;
    Ok(assemble(x, y, t, d.log_f1, 1.0, d.f2_over_f1))
}

/// The matrix for the rejected candidate `M = log x + C e^{t^2/2} / (1 + t)`.
///
/// `Q' = e^{t^2/2} (t^2 + t - 1) / (1+t)^2`,
/// `Q'' = e^{t^2/2} [(t^2+1)/(1+t) - 2t/(1+t)^2 + 2/(1+t)^3]`.
/// Since `Q'(0) = -1` the `Q'/t` term drives `a11` to `-inf` as `y -> 0`.
pub fn candidate_matrix(c: f64, x: f64, y: f64) -> Result<BellmanMatrix> {
    check_xy("candidate_matrix", x, y)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain {
            func: "candidate_matrix",
            value: c,
            reason: "C must be positive",
        });
    }
    if y == 0.0 {
        return Err(Error::Domain {
            func: "candidate_matrix",
            value: y,
            reason: "M_y / y is unbounded at y = 0 for this candidate",
        });
    }
    let t = y / x;
    let u = 1.0 / (1.0 + t);
    let q1 = (t * t + t - 1.0) * u * u;
    let q2 = (t * t + 1.0) * u - 2.0 * t * u * u + 2.0 * u * u * u;
    let log_d1 = c.ln() + 0.5 * t * t + q1.abs().ln();
    if q1 == 0.0 {
        // t at the golden-ratio root: Phi' vanishes, only Phi'' survives
        let log_c = c.ln() + 0.5 * t * t;
        let shift = log_c.max(0.0);
        let d2 = (log_c - shift).exp() * q2;
        let b = [-(-shift).exp() + t * t * d2, -t * d2, d2];
        return Ok(BellmanMatrix::from_scaled(x, y, shift - 2.0 * x.ln(), b));
    }
    Ok(assemble(x, y, t, log_d1, q1.signum(), q2 / q1))
}
