use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::function::{cutoff, TestFunction};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureConfig, Rule};
use crate::special::functions::{f_eval, log_bound_rhs};
use crate::special::normal::{sf, SQRT_2PI};
use crate::verify::VerificationReport;

fn log_sum_exp_weighted(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let terms: Vec<(f64, f64)> = terms.collect();
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|(w, v)| w * (v - m).exp()).sum::<f64>().ln()
}

/// `log E e^{f-Ef} <= E F(|f'|/sqrt R) <= 10 E e^{|f'|^2/2R} (1+|f'|/sqrt R)^-1`
/// for `X ~ N(0, 1/R)`, a 1-D `f`, by Gauss-Hermite quadrature.
///
/// The three quantities are evaluated in log space where they can overflow.
pub fn check_endpoint_inequality(f: &TestFunction, r: f64, nodes: usize, tol: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    if f.dimension() != 1 {
        return Err(Error::Config("quadrature endpoint check is one-dimensional".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain { func: "check_endpoint_inequality", value: r, reason: "R must be positive" });
    }
    let rule = Rule::gauss_hermite_normal(nodes);
    let scale = 1.0 / r.sqrt();
    let mut ef = 0.0;
    let mut mid = 0.0;
    let mut vals = Vec::with_capacity(nodes);
    let mut rhs_logs = Vec::with_capacity(nodes);
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let x = scale * z;
        let v = f.value_1d(x);
        if !v.is_finite() {
            return Err(Error::Overflow { func: "check_endpoint_inequality", value: x, hint: "f is not finite here" });
        }
        let grad = f.deriv_1d(x).abs();
        ef += w * v;
        mid += w * f_eval(grad * scale)?;
        vals.push((*w, v));
        rhs_logs.push((*w, log_bound_rhs(grad, r, 10.0)?));
    }
    let lhs = log_sum_exp_weighted(vals.into_iter()) - ef;
    let log_rhs = log_sum_exp_weighted(rhs_logs.into_iter());
    let rhs = log_rhs.exp();
    let mut rep = VerificationReport::new("endpoint_chain", tol)
        .with_domain(format!("R = {r}, {nodes} Hermite nodes"));
    rep.observe((mid - lhs).min(rhs - mid), &[r]);
    rep.metric("lhs", lhs);
    rep.metric("mid", mid);
    rep.metric("rhs", rhs);
    rep.note("margin is min(mid - lhs, rhs - mid)");
    Ok(rep.finish(start.elapsed()))
}

const MC_CHUNK: u64 = 8192;

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    e: f64,
    e2: f64,
    f: f64,
    f2: f64,
    ef: f64,
    h: f64,
    h2: f64,
    mid: f64,
}

/// Monte Carlo check of `log E e^{f-Ef} <= 10 E e^{|grad f|^2/2}(1+|grad f|)^-1`
/// for `X ~ N(0, I_n)`, `n = f.dimension() >= 2`.
///
/// Margin is `(RHS - LHS)` in units of the combined standard error; the
/// tolerance is a number of standard errors.
pub fn mc_endpoint_nd(f: &TestFunction, samples: u64, seed: u64, sigmas: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let n = f.dimension();
    if n < 2 {
        return Err(Error::Config("Monte Carlo endpoint check needs dimension >= 2".into()));
    }
    if samples < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    if let Some(l) = f.gradient_bound() {
        if l > crate::special::F_DOMAIN_MAX {
            return Err(Error::Range { func: "mc_endpoint_nd", value: l, lo: 0.0, hi: crate::special::F_DOMAIN_MAX });
        }
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut m = Moments::default();
            let mut x = vec![0.0; n];
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            for _ in 0..count {
                for v in x.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                let v = f.eval(&x);
                let g = f.gradient_norm(&x);
                let e = v.exp();
                let h = 10.0 * (0.5 * g * g).exp() / (1.0 + g);
                m.n += 1.0;
                m.e += e;
                m.e2 += e * e;
                m.f += v;
                m.f2 += v * v;
                m.ef += e * v;
                m.h += h;
                m.h2 += h * h;
                m.mid += f_eval(g)?;
            }
            Ok(m)
        })
        .collect();
    let mut t = Moments::default();
    for p in parts {
        let p = p?;
        t.n += p.n;
        t.e += p.e;
        t.e2 += p.e2;
        t.f += p.f;
        t.f2 += p.f2;
        t.ef += p.ef;
        t.h += p.h;
        t.h2 += p.h2;
        t.mid += p.mid;
    }
    let nn = t.n;
    let (me, mf, mh) = (t.e / nn, t.f / nn, t.h / nn);
    let var = |s2: f64, m: f64| ((s2 / nn - m * m) * nn / (nn - 1.0)).max(0.0);
    let cov_ef = (t.ef / nn - me * mf) * nn / (nn - 1.0);
    let lhs = me.ln() - mf;
    // delta method on log(mean e) - mean f
    let var_lhs = (var(t.e2, me) / (me * me) - 2.0 * cov_ef / me + var(t.f2, mf)) / nn;
    let var_rhs = var(t.h2, mh) / nn;
    let se = (var_lhs.max(0.0) + var_rhs).sqrt();
    let diff = mh - lhs;
    let margin = if se > 0.0 {
        diff / se
    } else if diff >= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    let mut r = VerificationReport::new(format!("endpoint_mc_{n}d"), sigmas)
        .with_domain(format!("X ~ N(0, I_{n}), {samples} samples"))
        .with_seed(seed);
    r.observe(margin, &[n as f64]);
    r.samples = samples;
    r.metric("lhs", lhs);
    r.metric("rhs", mh);
    r.metric("mid", t.mid / nn);
    r.metric("standard_error", se);
    r.note("margin is (rhs - lhs) / standard error");
    Ok(r.finish(start.elapsed()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessRow {
    pub radius: f64,
    /// `log E e^{f_R}`
    pub lhs: f64,
    /// `E e^{f_R'^2/2} (1 + |f_R'|)^{-c}`
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessTable {
    pub c: f64,
    pub rows: Vec<SharpnessRow>,
    /// `E e^{X^2/2} (1+|X|)^{-c} = 2 / (sqrt(2 pi) (c - 1))`, the uncut value.
    pub rhs_uncut: f64,
    /// The same, by quadrature of the uncut integrand.
    pub rhs_uncut_quadrature: f64,
}

impl SharpnessTable {
    pub fn to_text(&self) -> String {
        let mut out = format!("# c={}\n# R\tlhs\trhs\n", self.c);
        for row in &self.rows {
            let _ = writeln!(out, "{}\t{:.17e}\t{:.17e}", row.radius, row.lhs, row.rhs);
        }
        out
    }
}

/// `f_R` with `f_R' = x chi_R(|x|)` equals `x^2/2` on `[-R, R]` and is flat
/// beyond `R + 1`. Both expectations are split at `R` and `R + 1`.
fn sharpness_row(c: f64, r: f64) -> Result<SharpnessRow> {
    let f = TestFunction::clipped_quadratic(r)?;
    let cfg = QuadratureConfig::default();
    let inner = r / SQRT_2PI;
    let ramp_lhs = integrate(|u| (f.value_1d(u) - 0.5 * u * u).exp() / SQRT_2PI, r, r + 1.0, &cfg).value;
    let flat = f.value_1d(r + 1.0);
    let lhs = (2.0 * (inner + ramp_lhs + (flat + sf(r + 1.0).ln()).exp())).ln();

    let body = integrate(|u| (1.0 + u).powf(-c) / SQRT_2PI, 0.0, r, &cfg).value;
    let ramp_rhs = integrate(
        |u| {
            let g = u * cutoff(r, u);
            (0.5 * (g * g - u * u)).exp() * (1.0 + g).powf(-c) / SQRT_2PI
        },
        r,
        r + 1.0,
        &cfg,
    )
    .value;
    let rhs = 2.0 * (body + ramp_rhs + sf(r + 1.0));
    Ok(SharpnessRow { radius: r, lhs, rhs })
}

/// Truncations of `x^2/2`: `log E e^{f_R}` grows with `R` while the
/// `(1+|f'|)^{-c}` weighted gradient term converges for `c > 1`.
///
/// Reports: `lhs` strictly increasing, and relative change of `rhs` over
/// the last step within the `sharpness` tolerance.
pub fn sharpness_demo(c: f64, radii: &[f64], tol: f64) -> Result<(SharpnessTable, Vec<VerificationReport>)> {
    let start = Instant::now();
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::Domain { func: "sharpness_demo", value: c, reason: "exponent c must exceed 1" });
    }
    if radii.len() < 2 {
        return Err(Error::Config("sharpness demo needs at least two cutoffs".into()));
    }
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain { func: "sharpness_demo", value: r, reason: "cutoff radius must be positive" });
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("cutoff radii must be increasing".into()));
    }
    let rows = radii
        .par_iter()
        .map(|&r| sharpness_row(c, r))
        .collect::<Result<Vec<_>>>()?;
    let cfg = QuadratureConfig::default();
    let rhs_uncut_quadrature = 2.0 * integrate_to_infinity(|u| (1.0 + u).powf(-c) / SQRT_2PI, 0.0, &cfg).value;
    let table = SharpnessTable { c, rows, rhs_uncut: 2.0 / (SQRT_2PI * (c - 1.0)), rhs_uncut_quadrature };
    let domain = format!("c = {c}, R in {radii:?}");

    let mut lhs = VerificationReport::new("sharpness_lhs_increasing", 0.0).with_domain(domain.clone());
    for w in table.rows.windows(2) {
        lhs.observe(w[1].lhs - w[0].lhs, &[w[0].radius, w[1].radius]);
    }
    lhs.note("margin is the smallest lhs increment; equality fails strict growth only at exactly 0");

    let n = table.rows.len();
    let (prev, last) = (table.rows[n - 2], table.rows[n - 1]);
    let change = ((last.rhs - prev.rhs) / last.rhs).abs();
    let mut rhs = VerificationReport::new("sharpness_rhs_plateau", tol).with_domain(domain);
    rhs.observe(-change, &[prev.radius, last.radius]);
    rhs.metric("rhs_last", last.rhs);
    rhs.metric("rhs_uncut", table.rhs_uncut);
    rhs.metric("relative_change_last_step", change);
    rhs.note("margin is -|rhs(R_n) - rhs(R_n-1)| / rhs(R_n)");
    let e = start.elapsed();
    Ok((table, vec![lhs.finish(e), rhs.finish(e)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_chain() {
        let f = TestFunction::constant(0.0).unwrap();
        let r = check_endpoint_inequality(&f, 1.0, 64, 1e-9).unwrap();
        assert_eq!(r.get_metric("lhs"), Some(0.0));
        assert_eq!(r.get_metric("mid"), Some(0.0));
        assert!((r.get_metric("rhs").unwrap() - 10.0).abs() < 1e-12);
        assert!(r.passed);
    }

    #[test]
    fn linear_function_lhs_is_half_square() {
        for a in [0.5, 1.0, 2.0] {
            let f = TestFunction::affine(0.3, &[a]).unwrap();
            let r = check_endpoint_inequality(&f, 1.0, 128, 1e-9).unwrap();
            assert!((r.get_metric("lhs").unwrap() - 0.5 * a * a).abs() < 1e-12);
            assert!((r.get_metric("mid").unwrap() - f_eval(a).unwrap()).abs() < 1e-12);
            assert!(r.passed, "{}", r.to_human());
        }
    }

    #[test]
    fn rescaled_chain_holds() {
        let f = TestFunction::random_trig_poly(7);
        for r in [0.5, 2.0, 5.0] {
            assert!(check_endpoint_inequality(&f, r, 128, 1e-9).unwrap().passed);
        }
    }

    #[test]
    fn mc_zero_function() {
        let f = TestFunction::affine(0.0, &[0.0, 0.0]).unwrap();
        let r = mc_endpoint_nd(&f, 1000, 1, 3.0).unwrap();
        assert_eq!(r.get_metric("lhs"), Some(0.0));
        assert_eq!(r.get_metric("rhs"), Some(10.0));
        assert!(r.passed);
    }

    #[test]
    fn mc_is_reproducible() {
        let f = TestFunction::trig_product(0.5, &[1.0, 1.0], &[0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        let a = mc_endpoint_nd(&f, 20_000, 9, 3.0).unwrap();
        let b = mc_endpoint_nd(&f, 20_000, 9, 3.0).unwrap();
        assert_eq!(a.min_margin, b.min_margin);
        assert!(a.passed);
        assert!(mc_endpoint_nd(&TestFunction::constant(0.0).unwrap(), 100, 1, 3.0).is_err());
    }

    #[test]
    fn sharpness_errors() {
        assert!(matches!(sharpness_demo(1.0, &[2.0, 4.0], 1e-3), Err(Error::Domain { .. })));
        assert!(matches!(sharpness_demo(1.5, &[2.0], 1e-3), Err(Error::Config(_))));
    }

    #[test]
    fn sharpness_lhs_grows() {
        let (table, reports) = sharpness_demo(1.5, &[2.0, 4.0, 6.0, 8.0, 10.0], 1e-3).unwrap();
        assert!(reports[0].passed);
        // inside [-R, R] the integrand of E e^{f_R} is flat at 1/sqrt(2 pi)
        for row in &table.rows {
            assert!(row.lhs > (2.0 * row.radius / SQRT_2PI).ln());
        }
    }

    #[test]
    fn uncut_limit_for_c_two() {
        let (table, _) = sharpness_demo(2.0, &[2.0, 4.0], 1e-3).unwrap();
        assert!((table.rhs_uncut_quadrature / table.rhs_uncut - 1.0).abs() < 0.02);
        assert!((table.rhs_uncut - 2.0 / SQRT_2PI).abs() < 1e-15);
    }
}
