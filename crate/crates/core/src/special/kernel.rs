//! The kernel `k(x) = -log (log Phi)'(x) = x^2/2 + log(sqrt(2 pi) Phi(x))`
//! and its first two derivatives.
//!
//! `exp(-k) = phi / Phi` is the inverse Mills ratio, `k' = x + exp(-k)` and
//! `k'' = 1 - k' exp(-k)`. Below `-SCALED_SWITCH` both derivative formulas
//! cancel catastrophically, so there they are evaluated from the continued
//! fraction tails of the Mills ratio at `y = -x`:
//! `k' = K1`, `k'' = K1 (K2 - K1)`, `exp(-k) = y + K1`.

use super::normal::{self, LN_SQRT_2PI, SCALED_SWITCH};
use crate::error::{require_finite, Error, Result};

/// Bundled values of the kernel at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub x: f64,
    pub k: f64,
    pub k_prime: f64,
    pub k_double_prime: f64,
    /// `exp(-k(x)) = phi(x) / Phi(x)`
    pub inv_mills: f64,
}

impl KernelEval {
    /// `exp(k(x)) = Phi(x) / phi(x)`.
    pub fn exp_k(&self) -> f64 {
        self.k.exp()
    }
}

/// `phi(x) / Phi(x)`.
pub fn inv_mills(x: f64) -> Result<f64> {
    require_finite("inv_mills", x)?;
    Ok(inv_mills_unchecked(x))
}

pub(crate) fn inv_mills_unchecked(x: f64) -> f64 {
    if x < -SCALED_SWITCH {
        let (k1, _) = normal::mills_tails(-x);
        -x + k1
    } else {
        normal::pdf(x) / normal::cdf(x)
    }
}

pub fn kernel_eval(x: f64) -> Result<KernelEval> {
    require_finite("kernel_eval", x)?;
    Ok(kernel_eval_unchecked(x))
}

pub(crate) fn kernel_eval_unchecked(x: f64) -> KernelEval {
    if x < -SCALED_SWITCH {
        let y = -x;
        let (k1, k2) = normal::mills_tails(y);
        let inv = y + k1;
        KernelEval {
            x,
            k: -inv.ln(),
            k_prime: k1,
            k_double_prime: k1 * (k2 - k1),
            inv_mills: inv,
        }
    } else {
        let inv = normal::pdf(x) / normal::cdf(x);
        let k = if x >= 0.0 {
            0.5 * x * x + LN_SQRT_2PI + (-normal::sf(x)).ln_1p()
        } else {
            0.5 * x * x + LN_SQRT_2PI + normal::cdf(x).ln()
        };
        let k_prime = x + inv;
        KernelEval {
            x,
            k,
            k_prime,
            k_double_prime: 1.0 - k_prime * inv,
            inv_mills: inv,
        }
    }
}

/// The two positivity auxiliaries, with `h = exp(-x^2/2)` and
/// `H(x) = int_{-inf}^x h`, divided by their natural scale so they stay
/// representable on the far left:
/// `u / H^2 = (H^2 - x h H - h^2) / H^2 = k''` and `v / H = 1 + x (h/H) / (1 + x^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Auxiliaries {
    pub u_scaled: f64,
    pub v_scaled: f64,
}

pub fn auxiliaries(x: f64) -> Result<Auxiliaries> {
    require_finite("auxiliaries", x)?;
    let ke = kernel_eval_unchecked(x);
    let v_scaled = if x < -SCALED_SWITCH {
        // 1 - y (y + K1) / (1 + y^2) with the y^2 terms cancelled by hand
        let y = -x;
        (1.0 - y * ke.k_prime) / (1.0 + y * y)
    } else {
        1.0 + x * ke.inv_mills / (1.0 + x * x)
    };
    Ok(Auxiliaries { u_scaled: ke.k_double_prime, v_scaled })
}

/// `k'` alone; the hot path of the inverse.
#[inline]
pub(crate) fn k_prime_unchecked(x: f64) -> f64 {
    if x < -SCALED_SWITCH {
        normal::mills_tails(-x).0
    } else {
        x + normal::pdf(x) / normal::cdf(x)
    }
}

/// Inverse of `k' : R -> (0, inf)`.
///
/// Bracketing uses `k'(t) < -1/t` for `t < 0` and `t <= k'(t) < t + 0.8`
/// for `t >= 0`, bisects to a relative width of 1e-13 and finishes with one
/// Newton step.
pub fn inv_k_prime(u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain {
            func: "inv_k_prime",
            value: u,
            reason: "k' maps onto (0, inf); argument must be positive and finite",
        });
    }
    Ok(inv_k_prime_unchecked(u))
}

pub(crate) fn inv_k_prime_unchecked(u: f64) -> f64 {
    let mut lo = (-1.0 / u).min(u - 1.0);
    let mut hi = u;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * mid.abs().max(1.0) {
            break;
        }
        if k_prime_unchecked(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let ke = kernel_eval_unchecked(t);
    let polished = t - (ke.k_prime - u) / ke.k_double_prime;
    let slack = (hi - lo).max(f64::EPSILON * t.abs());
    if polished.is_finite() && polished >= lo - slack && polished <= hi + slack {
        polished
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_mills_at_zero() {
        let v = inv_mills(0.0).unwrap();
        assert!((v - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inv_mills_rejects_non_finite() {
        assert!(matches!(inv_mills(f64::NAN), Err(Error::Domain { .. })));
        assert!(kernel_eval(f64::INFINITY).is_err());
    }

    #[test]
    fn inv_mills_far_right_is_density() {
        let x = 40.0;
        assert_eq!(inv_mills(x).unwrap(), normal::pdf(x));
        let x = 30.0;
        let r = inv_mills(x).unwrap() / normal::pdf(x);
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inv_mills_left_tail_matches_asymptotic_series() {
        // -x - 1/x + 2/x^3 + O(x^-5)
        let x: f64 = -10.0;
        let series = -x - 1.0 / x + 2.0 / x.powi(3);
        let v = inv_mills(x).unwrap();
        assert!((v - 10.0980).abs() < 1e-4);
        assert!((v - series).abs() < 20.0 / x.abs().powi(5));
    }

    #[test]
    fn branches_agree_at_switch() {
        let x = -SCALED_SWITCH;
        let direct = normal::pdf(x) / normal::cdf(x);
        let (k1, k2) = normal::mills_tails(-x);
        let scaled = -x + k1;
        assert!(((direct - scaled) / scaled).abs() < 1e-13);
        let kp_direct = x + direct;
        assert!(((kp_direct - k1) / k1).abs() < 1e-12);
        let kpp_direct = 1.0 - kp_direct * direct;
        let kpp_scaled = k1 * (k2 - k1);
        // the direct k'' loses ~11 digits to cancellation here already
        assert!(((kpp_direct - kpp_scaled) / kpp_scaled).abs() < 1e-10);
        assert!((kpp_scaled / 1.432_488_344_334_091e-2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_at_zero() {
        let ke = kernel_eval(0.0).unwrap();
        assert!((ke.k - 0.225_791_352_644_727_4).abs() < 1e-15);
        assert!((ke.k_double_prime - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-15);
        assert!((ke.k_prime - ke.inv_mills).abs() < 1e-16);
    }

    #[test]
    fn second_derivative_left_asymptotics() {
        // x^-2 - 6 x^-4 + O(x^-6); the leading term alone is 1.5% off at -20
        let ke = kernel_eval(-20.0).unwrap();
        assert!((ke.k_double_prime * 400.0 - 1.0).abs() < 0.02);
        assert!((ke.k_double_prime / 2.463_261_615_052_163_6e-3 - 1.0).abs() < 1e-13);
        let x: f64 = -20.0;
        assert!((ke.k_double_prime - (x.powi(-2) - 6.0 * x.powi(-4))).abs() < 50.0 * x.powi(-6));
    }

    #[test]
    fn derivative_identities_hold_to_rounding() {
        for i in 0..=200 {
            let x = -40.0 + 0.4 * i as f64;
            let ke = kernel_eval(x).unwrap();
            let scale = x.abs().max(1.0);
            assert!((ke.k_prime - (x + ke.inv_mills)).abs() <= 8.0 * f64::EPSILON * scale);
            assert!((ke.k_double_prime - (1.0 - ke.k_prime * ke.inv_mills)).abs() <= 16.0 * f64::EPSILON);
        }
    }

    #[test]
    fn inverse_examples() {
        let u0 = kernel_eval(0.0).unwrap().k_prime;
        assert!(inv_k_prime(u0).unwrap().abs() <= 1e-10);
        let t = inv_k_prime(0.001).unwrap();
        assert!(((t + 1000.0) / 1000.0).abs() < 5e-3);
        let t = inv_k_prime(100.0).unwrap();
        assert!(((t - 100.0) / 100.0).abs() < 1e-3);
        assert!(matches!(inv_k_prime(0.0), Err(Error::Domain { .. })));
        assert!(inv_k_prime(-1.0).is_err());
    }

    #[test]
    fn inverse_round_trip_log_grid() {
        for i in 0..=90 {
            let u = 10f64.powf(-6.0 + i as f64 / 10.0);
            let t = inv_k_prime(u).unwrap();
            let back = kernel_eval(t).unwrap().k_prime;
            assert!((back - u).abs() <= 1e-12 * u.max(1.0), "u={u} t={t} back={back}");
        }
    }

    #[test]
    fn auxiliaries_match_unscaled_form() {
        for x in [-6.0f64, -2.0, 0.0, 0.7, 3.0] {
            let h = (-0.5 * x * x).exp();
            let big_h = normal::SQRT_2PI * normal::cdf(x);
            let a = auxiliaries(x).unwrap();
            let u = big_h * big_h - x * h * big_h - h * h;
            let v = big_h + h * x / (1.0 + x * x);
            assert!((a.u_scaled * big_h * big_h / u - 1.0).abs() < 1e-9, "{x}");
            assert!((a.v_scaled * big_h / v - 1.0).abs() < 1e-12, "{x}");
        }
        // both branches of v agree at the switch
        let y: f64 = SCALED_SWITCH;
        let inside = 1.0 - y * inv_mills(-y).unwrap() / (1.0 + y * y);
        let a = auxiliaries(-y - 1e-12).unwrap();
        assert!((a.v_scaled / inside - 1.0).abs() < 1e-7);
        // v / H ~ 2 / x^4 on the far left
        let a = auxiliaries(-30.0).unwrap();
        assert!((a.v_scaled * 30f64.powi(4) / 2.0 - 1.0).abs() < 0.01);
    }
}
