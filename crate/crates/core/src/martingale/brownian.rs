use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::functions::n_eval_unchecked;
use crate::verify::VerificationReport;

/// Lattice steps from the origin to either exit point; the walk step is `a / LATTICE`.
pub const LATTICE: u64 = 1000;
const PATH_CHUNK: u64 = 1024;

#[derive(Default, Clone, Copy)]
struct Sums {
    n: f64,
    tau: f64,
    tau2: f64,
    up: f64,
    gain: f64,
    gain2: f64,
}

/// Exit of a `+-1` walk from `(-LATTICE, LATTICE)`: returns `(steps, exited_up)`.
///
/// From distance `d` to the nearer edge the walk cannot leave within `d`
/// steps, so those `d` steps are drawn at once as a binomial sum.
fn exit_walk(rng: &mut ChaCha8Rng) -> (u64, bool) {
    let m = LATTICE as i64;
    let (mut x, mut steps) = (0i64, 0u64);
    loop {
        let d = m - x.abs();
        if d == 0 {
            return (steps, x > 0);
        }
        let up = Binomial::new(d as u64, 0.5).expect("valid binomial").sample(rng) as i64;
        x += 2 * up - d;
        steps += d as u64;
    }
}

/// Random-walk stand-in for Brownian motion stopped on leaving `(-a, a)`,
/// started from the point `(p, t)` of the Bellman domain.
///
/// Reports, each in units of standard errors against `sigmas`:
/// `E tau` against `a^2`, the frequency of the upper exit against 1/2, and
/// `E N(p + B_tau, t + tau) - N(p, t)` against 0 from below. All three are
/// informational.
pub fn brownian_crosscheck(p: f64, a: f64, t: f64, paths: u64, seed: u64, sigmas: f64) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    if !(a > 0.0) || !(a < p) || !p.is_finite() {
        return Err(Error::Domain { func: "brownian_crosscheck", value: a, reason: "need 0 < a < p" });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain { func: "brownian_crosscheck", value: t, reason: "t must be nonnegative" });
    }
    if paths < 2 {
        return Err(Error::Config("need at least two paths".into()));
    }
    let h = a / LATTICE as f64;
    let delta = h * h;
    let base = n_eval_unchecked(p, t);
    let chunks = paths.div_ceil(PATH_CHUNK);
    let parts: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut s = Sums::default();
            for _ in 0..PATH_CHUNK.min(paths - c * PATH_CHUNK) {
                let (steps, up) = exit_walk(&mut rng);
                let tau = steps as f64 * delta;
                let b = if up { a } else { -a };
                let gain = n_eval_unchecked(p + b, t + tau) - base;
                s.n += 1.0;
                s.tau += tau;
                s.tau2 += tau * tau;
                s.up += f64::from(u8::from(up));
                s.gain += gain;
                s.gain2 += gain * gain;
            }
            s
        })
        .collect();
    let mut s = Sums::default();
    for q in parts {
        s.n += q.n;
        s.tau += q.tau;
        s.tau2 += q.tau2;
        s.up += q.up;
        s.gain += q.gain;
        s.gain2 += q.gain2;
    }
    let n = s.n;
    let se = |sum: f64, sum2: f64| {
        let m = sum / n;
        (((sum2 / n - m * m) * n / (n - 1.0)).max(0.0) / n).sqrt()
    };
    let z = |diff: f64, se: f64| if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };

    let domain = format!("p = {p}, a = {a}, t = {t}, {paths} paths, step {h:e}");
    let mk = |name: &str| VerificationReport::new(name, sigmas).informational().with_domain(domain.clone()).with_seed(seed);
    let witness = [p, a, t];

    let mean_tau = s.tau / n;
    let se_tau = se(s.tau, s.tau2);
    let mut r_tau = mk("brownian_exit_time");
    r_tau.observe(-z((mean_tau - a * a).abs(), se_tau), &witness);
    r_tau.metric("mean_tau", mean_tau);
    r_tau.metric("a_squared", a * a);
    r_tau.metric("standard_error", se_tau);

    let freq = s.up / n;
    let se_up = (freq * (1.0 - freq) / n).sqrt();
    let mut r_up = mk("brownian_exit_symmetry");
    r_up.observe(-z((freq - 0.5).abs(), se_up), &witness);
    r_up.metric("upper_exit_frequency", freq);
    r_up.metric("standard_error", se_up);

    let mean_gain = s.gain / n;
    let se_gain = se(s.gain, s.gain2);
    let mut r_gain = mk("brownian_bellman_gain");
    r_gain.observe(z(mean_gain, se_gain), &witness);
    r_gain.metric("mean_gain", mean_gain);
    r_gain.metric("n_start", base);
    r_gain.metric("standard_error", se_gain);

    let e = start.elapsed();
    Ok([r_tau, r_up, r_gain]
        .into_iter()
        .map(|mut r| {
            r.samples = paths;
            r.note("margins in standard errors");
            r.finish(e)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crosscheck_reference_point() {
        let reps = brownian_crosscheck(1.0, 0.5, 0.2, 100_000, 42, 3.0).unwrap();
        for r in &reps {
            assert!(r.passed, "{}", r.to_human());
            assert!(!r.gating);
        }
        let tau = reps[0].get_metric("mean_tau").unwrap();
        assert!((tau - 0.25).abs() < 0.01);
    }

    #[test]
    fn crosscheck_is_deterministic() {
        let a = brownian_crosscheck(2.0, 1.0, 0.0, 3000, 7, 3.0).unwrap();
        let b = brownian_crosscheck(2.0, 1.0, 0.0, 3000, 7, 3.0).unwrap();
        assert_eq!(a[0].to_json(false), b[0].to_json(false));
        assert_eq!(a[2].to_json(false), b[2].to_json(false));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(brownian_crosscheck(1.0, 1.0, 0.0, 10, 1, 3.0).is_err());
        assert!(brownian_crosscheck(1.0, 0.5, -1.0, 10, 1, 3.0).is_err());
        assert!(brownian_crosscheck(1.0, 0.5, 0.0, 1, 1, 3.0).is_err());
    }
}
