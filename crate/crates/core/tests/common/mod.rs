//! Independent reference computations used by the integration tests.
//!
//! Nothing here goes through the production tables: F is integrated in the
//! x variable with a bisection root solve at every node, G straight from its
//! double-integral definition.

#![allow(dead_code)]

use expint_core::special::kernel_eval;

pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = z;
        ws[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (xs, ws)
}

/// Composite Gauss-Legendre over consecutive breakpoints.
pub fn panels<F: FnMut(f64) -> f64>(breaks: &[f64], mut f: F) -> f64 {
    let (xs, ws) = gauss_legendre(20);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        total += h * xs.iter().zip(&ws).map(|(x, wt)| wt * f(c + h * x)).sum::<f64>();
    }
    total
}

pub fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
        .collect()
}

pub fn linear(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// `(k')^{-1}(u)` by plain bisection.
pub fn kappa(u: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0 / u - 1.0, u + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if kernel_eval(mid).unwrap().k_prime < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `F(x) = int_0^x exp(k(kappa(u))) du`.
pub fn f_oracle(x: f64) -> f64 {
    let mut breaks = vec![0.0];
    breaks.extend(geometric(x * 1e-6, x, 60));
    panels(&breaks, |u| kernel_eval(kappa(u)).unwrap().k.exp())
}

/// `G(t) = int_t^inf int_s^inf r^-2 exp((s^2 - r^2)/2) dr ds`, with the
/// inner variable shifted to `r = s + v`.
pub fn g_oracle(t: f64) -> f64 {
    let inner = |s: f64| {
        let scale = (1.0 / s).min(1.0);
        let mut breaks = vec![0.0];
        breaks.extend(geometric(scale * 1e-8, scale * 40.0, 80));
        panels(&breaks, |v| (-s * v - 0.5 * v * v).exp() / ((s + v) * (s + v)))
    };
    let top: f64 = 1e4;
    // s = exp(z)
    let body = panels(&linear(t.ln(), top.ln(), 400), |z| {
        let s = z.exp();
        s * inner(s)
    });
    let tail = 0.5 / (top * top) - 0.75 / top.powi(4);
    body + tail
}

pub fn golden(text: &str) -> Vec<(String, f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split('\t');
            let name = it.next().unwrap().to_string();
            let v = it.next().unwrap().parse().unwrap();
            let tol = it.next().unwrap().parse().unwrap();
            (name, v, tol)
        })
        .collect()
}
