//! Standard normal density, distribution function and Mills ratios.
//!
//! `mills_ratio(y) = (1 - Phi(y)) / phi(y)`. For `y >= SCALED_SWITCH` the
//! Laplace continued fraction
//!
//! ```text
//! R(y) = 1 / (y + K1),   K_n = n / (y + K_{n+1})
//! ```
//!
//! is evaluated by backward recurrence; the tails `K1`, `K2` are exposed
//! because `k'` and `k''` are cancellation-free in terms of them.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// sqrt(2 pi)
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
/// log sqrt(2 pi)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Continued-fraction tails are used for arguments at or beyond this value.
pub const SCALED_SWITCH: f64 = 8.0;

const CF_DEPTH: usize = 48;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Continued-fraction tails `(K1(y), K2(y))` for `y >= SCALED_SWITCH`.
pub fn mills_tails(y: f64) -> (f64, f64) {
    debug_assert!(y >= SCALED_SWITCH * 0.5);
    let mut k = 0.0;
    for n in (2..=CF_DEPTH).rev() {
        k = n as f64 / (y + k);
    }
    let k2 = k;
    let k1 = 1.0 / (y + k2);
    (k1, k2)
}

/// Mills ratio `(1 - Phi(y)) / phi(y)`.
pub fn mills_ratio(y: f64) -> f64 {
    if y >= SCALED_SWITCH {
        let (k1, _) = mills_tails(y);
        1.0 / (y + k1)
    } else {
        // erfc(y/sqrt2) * exp(y^2/2) * sqrt(pi/2)
        libm::erfc(y * FRAC_1_SQRT_2) * (0.5 * y * y).exp() * (0.5 * PI).sqrt()
    }
}

/// `J(s) = exp(s^2/2) * int_s^inf u^-2 exp(-u^2/2) du = 1/s - R(s)`, s > 0.
pub fn mills_defect(s: f64) -> f64 {
    if s >= SCALED_SWITCH {
        let (k1, _) = mills_tails(s);
        k1 / (s * (s + k1))
    } else {
        1.0 / s - mills_ratio(s)
    }
}
