//! Grid and random-scan checks of the static inequalities.
//!
//! Second derivatives by central differences use `h = eps^(1/4) * |coord|`:
//! the `eps^(1/3)` rule balances truncation against rounding for first
//! derivatives and leaves ~1e-5 relative noise in second differences.

use std::time::Instant;

use super::bellman::{bellman_matrix, candidate_matrix};
use super::domain::{scan, Axis, ScanDomain, ScanResult};
use super::report::VerificationReport;
use super::tolerances::Tolerances;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::special::functions::{
    f_eval_unchecked, g_eval_unchecked, log_f_eval, n_eval_unchecked, n_sup_unchecked,
};
use crate::special::normal::{mills_defect, SQRT_2PI};

const FD_STEP: f64 = 1.220_703_125e-4; // eps^(1/4)

/// Which dual Bellman function a four-point check runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellmanFunction {
    /// `log p + G(p / sqrt t)`
    N,
    /// `log(p^2 + t) / 2`
    NSup,
}

impl BellmanFunction {
    pub fn eval(self, p: f64, t: f64) -> f64 {
        match self {
            Self::N => n_eval_unchecked(p, t),
            Self::NSup => n_sup_unchecked(p, t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::N => "N",
            Self::NSup => "N_sup",
        }
    }
}

/// `B(p+a, t+a^2) + B(p-a, t+a^2) - 2 B(p, t)` for `0 <= a < p`, `t >= 0`.
/// The `log p` parts are combined into `log(1 - a^2/p^2)` before summing.
pub fn four_point_margin(which: BellmanFunction, p: f64, a: f64, t: f64) -> f64 {
    let t1 = t + a * a;
    match which {
        BellmanFunction::N => {
            let r = a / p;
            let g = |p: f64, t: f64| {
                if t == 0.0 {
                    0.0
                } else {
                    g_eval_unchecked(p / t.sqrt())
                }
            };
            (-r * r).ln_1p() + g(p + a, t1) + g(p - a, t1) - 2.0 * g(p, t)
        }
        BellmanFunction::NSup => {
            let q = p * p + t;
            // ((p+a)^2 + t1)((p-a)^2 + t1) = q^2 + 4 a^2 t + 4 a^4
            0.5 * ((4.0 * a * a * (t + a * a)) / (q * q)).ln_1p()
        }
    }
}

fn from_scan(name: &str, tol: f64, domain: &ScanDomain, res: &ScanResult, k: usize) -> VerificationReport {
    let mut r = VerificationReport::new(name, tol).with_domain(domain.describe());
    if domain.is_random() {
        r = r.with_seed(domain.seed);
    }
    r.samples = res.evaluated;
    r.min_margin = res.worst[k].value;
    r.worst_witness = res.worst[k].point.clone();
    if res.excluded > 0 {
        r.note(format!("{} points excluded", res.excluded));
    }
    r
}

fn require_axes(domain: &ScanDomain, n: usize, what: &str) -> Result<()> {
    domain.validate()?;
    if domain.axes.len() != n {
        return Err(Error::Config(format!("{what} expects {n} axes, got {}", domain.axes.len())));
    }
    Ok(())
}

fn require_positive_axis(domain: &ScanDomain, i: usize, func: &'static str) -> Result<()> {
    let a = &domain.axes[i];
    if !(a.lo > 0.0) {
        return Err(Error::Domain { func, value: a.lo, reason: "coordinate must be positive" });
    }
    Ok(())
}

fn require_nonnegative_axis(domain: &ScanDomain, i: usize, func: &'static str) -> Result<()> {
    let a = &domain.axes[i];
    if !(a.lo >= 0.0) {
        return Err(Error::Domain { func, value: a.lo, reason: "coordinate must be nonnegative" });
    }
    Ok(())
}

/// Determinant and PSD scan of the Bellman matrix over `(x, y)`.
///
/// Margins are scale-free: `-|det A| / ||A||^2` and `lambda_min / ||A||`.
pub fn check_det_and_psd(domain: &ScanDomain, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 2, "check_det_and_psd")?;
    require_positive_axis(domain, 0, "check_det_and_psd")?;
    require_nonnegative_axis(domain, 1, "check_det_and_psd")?;
    let res = scan::<3, _>(domain, |p| {
        let a = bellman_matrix(p[0], p[1]).ok()?;
        Some([-a.relative_det().abs(), a.relative_min_eigenvalue(), a.scaled[2] / a.scaled_norm()])
    })?;
    let mut det = from_scan("bellman_det", tol.get("det"), domain, &res, 0);
    det.note("margin is -|det A| / ||A||^2 (spectral norm)");
    let mut psd = from_scan("bellman_psd", tol.get("psd"), domain, &res, 1);
    psd.note("margin is lambda_min(A) / ||A||");
    psd.metric("min_relative_a22", res.worst[2].value);
    let e = start.elapsed();
    Ok(vec![det.finish(e), psd.finish(e)])
}

/// `int_0^x e^{u^2/2} du * e^{-x^2/2}`.
fn scaled_erfi_integral(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let cfg = QuadratureConfig::default();
    integrate(|u| (0.5 * (u - x) * (u + x)).exp(), 0.0, x, &cfg).value
}

/// `log F(x) <= log c + x^2/2 - log(1+x)` for `c = 10` and `c = 3 sqrt(2 pi)`,
/// plus the intermediate chain
/// `int_0^x e^{u^2/2} <= 2x/(1+x^2) e^{x^2/2} <= 3/(1+x) e^{x^2/2}` for `x <= 10`.
pub fn check_f_bound(domain: &ScanDomain, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 1, "check_f_bound")?;
    let ax = &domain.axes[0];
    if ax.lo < 0.0 {
        return Err(Error::Domain { func: "check_f_bound", value: ax.lo, reason: "x must be nonnegative" });
    }
    log_f_eval(ax.hi)?;
    let sharp = (3.0 * SQRT_2PI).ln();
    let res = scan::<3, _>(domain, |p| {
        let x = p[0];
        let lf = log_f_eval(x).ok()?;
        let base = 0.5 * x * x - x.ln_1p();
        let chain = if x <= 10.0 {
            let i = scaled_erfi_integral(x);
            let mid = 2.0 * x / (1.0 + x * x);
            (mid - i).min(3.0 / (1.0 + x) - mid)
        } else {
            f64::INFINITY
        };
        Some([10f64.ln() + base - lf, sharp + base - lf, chain])
    })?;
    let e = start.elapsed();
    let mut r10 = from_scan("F_bound_10", tol.get("f_bound"), domain, &res, 0);
    r10.note("log-space margin log(10 e^{x^2/2}/(1+x)) - log F(x)");
    let mut rs = from_scan("F_bound_3sqrt2pi", tol.get("f_bound"), domain, &res, 1);
    rs.note("log-space margin with constant 3 sqrt(2 pi)");
    let mut chain = from_scan("F_bound_chain", tol.get("f_bound"), domain, &res, 2);
    chain.note("scaled by e^{-x^2/2}; points above x = 10 count as vacuous");
    Ok(vec![r10.finish(e), rs.finish(e), chain.finish(e)])
}

/// `log(1+s^-2)/3 <= G(s) <= log(1+s^-2)`, absolute margins.
pub fn check_g_sandwich(domain: &ScanDomain, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 1, "check_g_sandwich")?;
    require_positive_axis(domain, 0, "check_g_sandwich")?;
    let res = scan::<2, _>(domain, |p| {
        let s = p[0];
        let l = (1.0 / (s * s)).ln_1p();
        let g = g_eval_unchecked(s);
        Some([l - g, g - l / 3.0])
    })?;
    let e = start.elapsed();
    Ok(vec![
        from_scan("G_sandwich_upper", tol.get("g_sandwich"), domain, &res, 0).finish(e),
        from_scan("G_sandwich_lower", tol.get("g_sandwich"), domain, &res, 1).finish(e),
    ])
}

/// Central-difference derivatives `(B_pp, B_t, B_tt)` at `(p, t)`, `t > 0`.
fn fd_derivatives(b: impl Fn(f64, f64) -> f64, p: f64, t: f64) -> (f64, f64, f64) {
    let hp = FD_STEP * p;
    let ht = FD_STEP * t;
    let c = b(p, t);
    let pp = (b(p + hp, t) - 2.0 * c + b(p - hp, t)) / (hp * hp);
    let (tp, tm) = (b(p, t + ht), b(p, t - ht));
    let dt = (tp - tm) / (2.0 * ht);
    let tt = (tp - 2.0 * c + tm) / (ht * ht);
    (pp, dt, tt)
}

/// Finite-difference residual `N_pp/2 + N_t` over `(p, t)`.
///
/// The residual is normalized by `max(|N_pp|, |2 N_t|, 1/p^2)`: for small
/// `s = p/sqrt t` the `log p` and `G` contributions to `N_pp`, each of size
/// `1/p^2`, nearly cancel and `|N_pp|` alone is not a usable scale.
pub fn check_backward_heat(domain: &ScanDomain, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 2, "check_backward_heat")?;
    require_positive_axis(domain, 0, "check_backward_heat")?;
    require_nonnegative_axis(domain, 1, "check_backward_heat")?;
    let res = scan::<1, _>(domain, |x| {
        let (p, t) = (x[0], x[1]);
        if t == 0.0 {
            return None;
        }
        let (pp, dt, _) = fd_derivatives(n_eval_unchecked, p, t);
        let scale = pp.abs().max((2.0 * dt).abs()).max(1.0 / (p * p));
        Some([-(0.5 * pp + dt).abs() / scale])
    })?;
    let mut r = from_scan("backward_heat_fd", tol.get("heat_residual"), domain, &res, 0);
    if res.excluded > 0 {
        r.note("t = 0 boundary points excluded: N(p,0) = log p has no one-sided t-derivative there");
    }
    r.note("h = eps^(1/4) * coordinate");
    Ok(vec![r.finish(start.elapsed())])
}

/// `-1 + s^2 G''(s) - s^3 G'(s) = 0` from the closed forms of `G'`, `G''`.
pub fn check_backward_heat_closed_form(domain: &ScanDomain, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 1, "check_backward_heat_closed_form")?;
    require_positive_axis(domain, 0, "check_backward_heat_closed_form")?;
    let res = scan::<1, _>(domain, |x| {
        let s = x[0];
        let j = mills_defect(s);
        let g1 = -j;
        let g2 = 1.0 / (s * s) - s * j;
        Some([-(-1.0 + s * s * g2 - s * s * s * g1).abs()])
    })?;
    Ok(vec![from_scan("backward_heat_closed_form", tol.get("heat_closed_form"), domain, &res, 0)
        .finish(start.elapsed())])
}

/// `phi(s) = e^{-s^2/2} (1/(s^3+3s) - J(s))`, nonpositive with `phi(inf) = 0`.
pub fn phi(s: f64) -> f64 {
    (-0.5 * s * s).exp() * (1.0 / (s * (s * s + 3.0)) - mills_defect(s))
}

/// `N_tt = (1 - (s^3 + 3s) J(s)) / (4 t^2)` with `s = p / sqrt t`.
pub fn n_tt_closed(p: f64, t: f64) -> f64 {
    let s = p / t.sqrt();
    (1.0 - s * (s * s + 3.0) * mills_defect(s)) / (4.0 * t * t)
}

/// Sign of `1 + (s^3+3s) G'(s)` over `s`, plus a direct second difference of
/// `N` in `t` at each `(p, t)` of `points`.
pub fn check_n_t_concavity(
    domain: &ScanDomain,
    points: &[(f64, f64)],
    tol: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 1, "check_N_t_concavity")?;
    require_positive_axis(domain, 0, "check_N_t_concavity")?;
    let res = scan::<1, _>(domain, |x| {
        let s = x[0];
        Some([-(1.0 - s * (s * s + 3.0) * mills_defect(s))])
    })?;
    let mut sign = from_scan("N_t_concavity_sign", tol.get("concavity"), domain, &res, 0);
    let s_max = domain.axes[0].hi;
    sign.metric("phi_at_s_max", phi(s_max));
    sign.metric("phi_at_s_min", phi(domain.axes[0].lo));
    let mut fd = VerificationReport::new("N_t_concavity_fd", tol.get("fd_slack"));
    for &(p, t) in points {
        if !(p > 0.0 && t > 0.0) {
            return Err(Error::Domain { func: "check_N_t_concavity", value: p.min(t), reason: "need p, t > 0" });
        }
        let (_, _, tt) = fd_derivatives(n_eval_unchecked, p, t);
        fd.observe(-tt * t * t, &[p, t]);
        fd.metric(format!("N_tt({p},{t}) fd"), tt);
        fd.metric(format!("N_tt({p},{t}) closed"), n_tt_closed(p, t));
    }
    fd.note("margin is -t^2 times the second difference in t");
    let e = start.elapsed();
    Ok(vec![sign.finish(e), fd.finish(e)])
}

/// Random sample space for four-point scans: `p`, `r = a/p`, `t`, and a
/// selector that puts a tenth of the samples on the `t = 0` boundary.
pub fn four_point_domain(count: u64, seed: u64) -> ScanDomain {
    ScanDomain::random(
        vec![
            Axis::mixed("p", 1e-3, 1e3),
            Axis::mixed("a/p", 0.0, 1.0 - 1e-9),
            Axis::mixed("t", 0.0, 1e3),
            Axis::linear("boundary", 0.0, 1.0),
        ],
        count,
        seed,
    )
}

fn four_point_point(x: &[f64]) -> (f64, f64, f64) {
    let t = if x[3] < 0.1 { 0.0 } else { x[2] };
    (x[0], x[1] * x[0], t)
}

fn four_point_report(
    which: BellmanFunction,
    name: &str,
    count: u64,
    seed: u64,
    tolerance: f64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let domain = four_point_domain(count, seed);
    let res = scan::<1, _>(&domain, |x| {
        let (p, a, t) = four_point_point(x);
        Some([four_point_margin(which, p, a, t)])
    })?;
    let mut r = from_scan(name, tolerance, &domain, &res, 0);
    if !r.worst_witness.is_empty() {
        let (p, a, t) = four_point_point(&r.worst_witness);
        r.worst_witness = vec![p, a, t];
    }
    r.note("witness is (p, a, t)");
    Ok(r.finish(start.elapsed()))
}

/// `N(p+a, t+a^2) + N(p-a, t+a^2) - 2 N(p, t) >= 0` on random samples.
pub fn check_four_point_n(count: u64, seed: u64, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    Ok(vec![four_point_report(BellmanFunction::N, "four_point_N", count, seed, tol.get("four_point"))?])
}

/// Richardson extrapolation of `D(a)/a^4` as `a -> 0`, compared with
/// `-(2/3) N_tt(p, t)`.
pub fn check_taylor_limit(p: f64, t: f64, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    if !(p > 0.0 && p.is_finite()) || !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain { func: "check_taylor_limit", value: p.min(t), reason: "need p, t > 0" });
    }
    let scale = p.min(t.sqrt());
    let floor = 1e-4 * scale;
    let levels = 6;
    let a: Vec<f64> = (0..levels).map(|j| 0.2 * scale / f64::from(1u32 << j)).collect();
    let q: Vec<f64> = a
        .iter()
        .map(|&a| four_point_margin(BellmanFunction::N, p, a, t) / a.powi(4))
        .collect();
    // D(a)/a^4 is even in a: eliminate a^2 then a^4
    let r1: Vec<f64> = q.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    let r2: Vec<f64> = r1.windows(2).map(|w| (16.0 * w[1] - w[0]) / 15.0).collect();
    let limit = *r2.last().expect("levels >= 3");
    let expected = -2.0 / 3.0 * n_tt_closed(p, t);
    let n = q.len();
    let order = ((q[n - 3] - q[n - 2]) / (q[n - 2] - q[n - 1])).abs().log2();
    let mut r = VerificationReport::new("taylor_limit", tol.get("taylor"));
    r.observe(-((limit - expected) / expected).abs(), &[p, t]);
    r.metric("extrapolated", limit);
    r.metric("expected", expected);
    r.metric("raw_smallest_a", q[n - 1]);
    r.metric("observed_order_in_a", order);
    r.metric("richardson_residual_first", (r1[r1.len() - 1] - limit).abs());
    r.metric("richardson_residual_second", (r2[r2.len() - 2] - limit).abs());
    r.note(format!(
        "a window [{:e}, {:e}]; a below {:e} excluded (roundoff dominates a^4)",
        a[levels - 1],
        a[0],
        floor
    ));
    r.note("margin is -|extrapolated/expected - 1|");
    Ok(vec![r.finish(start.elapsed())])
}

/// Boundary value, forward residual, concavity in `t` and the four-point
/// inequality for `N_sup = log(p^2+t)/2`.
pub fn check_supersolution(
    domain: &ScanDomain,
    random_count: u64,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    require_axes(domain, 2, "check_supersolution")?;
    require_positive_axis(domain, 0, "check_supersolution")?;
    require_nonnegative_axis(domain, 1, "check_supersolution")?;
    let res = scan::<4, _>(domain, |x| {
        let (p, t) = (x[0], x[1]);
        let boundary = -(n_sup_unchecked(p, 0.0) - p.ln()).abs();
        if t == 0.0 {
            return Some([boundary, f64::INFINITY, f64::INFINITY, f64::INFINITY]);
        }
        let q = p * p + t;
        let (pp, dt, _) = fd_derivatives(n_sup_unchecked, p, t);
        let scale = pp.abs().max((2.0 * dt).abs());
        let residual = (0.5 * pp + dt) / scale;
        let closed_residual = t / (q * q);
        let closed_tt = -0.5 / (q * q);
        Some([
            boundary,
            residual,
            -closed_tt * q * q,
            -((0.5 * pp + dt) - closed_residual).abs() / scale,
        ])
    })?;
    let e = start.elapsed();
    let mut boundary = from_scan("supersolution_boundary", 0.0, domain, &res, 0);
    boundary.note("N_sup(p, 0) compared with log p for equality");
    let mut residual = from_scan("supersolution_residual", tol.get("fd_slack"), domain, &res, 1);
    residual.note("finite-difference N_pp/2 + N_t normalized by max(|N_pp|, |2 N_t|); closed form t/(p^2+t)^2");
    residual.metric("max_fd_deviation_from_closed_form", -res.worst[3].value);
    residual.metric("closed_residual(1,1)", 0.25);
    residual.note("direct differentiation gives t/(p^2+t)^2; the variant (t+t^2)/(2(p^2+t)^2) is also nonnegative and agrees at (1,1)");
    let mut concave = from_scan("supersolution_concavity", tol.get("supersolution"), domain, &res, 2);
    concave.note("closed form N_tt = -1/(2 (p^2+t)^2), margin scaled by (p^2+t)^2");
    concave.metric("N_tt(1,1)", -0.125);
    let four = four_point_report(
        BellmanFunction::NSup,
        "supersolution_four_point",
        random_count,
        seed,
        tol.get("four_point"),
    )?;
    Ok(vec![boundary.finish(e), residual.finish(e), concave.finish(e), four])
}

/// For each `C`, search `domain` for a point where the modified Hessian of
/// `log x + C e^{t^2/2}/(1+t)` has a negative eigenvalue.
///
/// Margin per `C` is `-lambda_min/||A||` at the best witness minus a floor
/// of 1e-9, so a pass means every `C` has a clearly negative direction.
pub fn scan_counterexample_m_sup(
    c_grid: &[f64],
    domain: &ScanDomain,
    tol: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    if c_grid.is_empty() {
        return Err(Error::Config("empty C grid".into()));
    }
    if let Some(&c) = c_grid.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(Error::Domain { func: "scan_counterexample_M_sup", value: c, reason: "C must be positive" });
    }
    require_axes(domain, 2, "scan_counterexample_M_sup")?;
    require_positive_axis(domain, 0, "scan_counterexample_M_sup")?;
    require_positive_axis(domain, 1, "scan_counterexample_M_sup")?;
    const FLOOR: f64 = 1e-9;
    let mut r = VerificationReport::new("counterexample_M_sup", tol.get("counterexample")).with_domain(domain.describe());
    for &c in c_grid {
        let res = scan::<1, _>(domain, |x| {
            let a = candidate_matrix(c, x[0], x[1]).ok()?;
            Some([a.relative_min_eigenvalue()])
        })?;
        let w = &res.worst[0];
        let margin = -w.value - FLOOR;
        let mut witness = vec![c];
        witness.extend_from_slice(&w.point);
        witness.push(w.value);
        r.observe(margin, &witness);
        r.metric(format!("C={c:e} lambda_min/||A||"), w.value);
        r.samples += res.evaluated - 1;
    }
    r.note("witness is (C, x, y, lambda_min/||A||)");
    Ok(vec![r.finish(start.elapsed())])
}

/// Exploratory scan of `2M(x,y) <= M(x+a, sqrt(a^2+(y+b)^2)) + M(x-a, sqrt(a^2+(y-b)^2))`.
///
/// Never gating. Samples whose F argument leaves `[0, 30]` are excluded;
/// margins are divided by `max(1, |2M(x,y)|)`.
pub fn scan_four_point_m(count: u64, seed: u64, b_zero: bool) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    const ARG_CAP: f64 = 30.0;
    let domain = ScanDomain::random(
        vec![
            Axis::mixed("x", 1e-2, 1e2),
            Axis::mixed("a/x", 0.0, 1.0 - 1e-9),
            Axis::mixed("y/x", 0.0, 10.0),
            Axis::linear("b/x", -10.0, 10.0),
        ],
        count,
        seed,
    );
    let res = scan::<1, _>(&domain, |v| {
        let x = v[0];
        let a = v[1] * x;
        let y = v[2] * x;
        let b = if b_zero { 0.0 } else { v[3] * x };
        let m = |x: f64, y: f64| {
            let t = y / x;
            (t <= ARG_CAP).then(|| x.ln() + f_eval_unchecked(t))
        };
        let lhs = 2.0 * m(x, y)?;
        let r1 = m(x + a, a.hypot(y + b))?;
        let r2 = m(x - a, a.hypot(y - b))?;
        Some([(r1 + r2 - lhs) / lhs.abs().max(1.0)])
    })?;
    let name = if b_zero { "four_point_M_b0" } else { "four_point_M" };
    let mut r = from_scan(name, 0.0, &domain, &res, 0).informational();
    if !r.worst_witness.is_empty() {
        let w = &r.worst_witness;
        let b = if b_zero { 0.0 } else { w[3] * w[0] };
        r.worst_witness = vec![w[0], w[2] * w[0], w[1] * w[0], b];
    }
    r.note("exploratory: the inequality is open; witness is (x, y, a, b)");
    Ok(vec![r.finish(start.elapsed())])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn det_psd_single_point() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 1.0, 1.0), Axis::linear("y", 0.0, 0.0)], 1);
        let r = check_det_and_psd(&d, &tol()).unwrap();
        assert!(r.iter().all(|r| r.passed));
        assert!(r[1].min_margin >= 0.0);
    }

    #[test]
    fn det_psd_small_grid() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.1, 10.0), Axis::linear("y", 0.0, 10.0)], 25);
        for r in check_det_and_psd(&d, &tol()).unwrap() {
            assert!(r.passed, "{}", r.to_human());
        }
    }

    #[test]
    fn empty_domain_is_an_error() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.1, 10.0), Axis::linear("y", 0.0, 10.0)], 0);
        assert!(check_det_and_psd(&d, &tol()).is_err());
    }

    #[test]
    fn f_bound_at_zero_and_cap() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.0, 40.0)], 2);
        let r = check_f_bound(&d, &tol()).unwrap();
        assert!(r.iter().all(|r| r.passed));
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.0, 0.0)], 1);
        let r = check_f_bound(&d, &tol()).unwrap();
        assert_eq!(r[0].min_margin, f64::INFINITY);
        assert!(r[0].passed);
    }

    #[test]
    fn g_sandwich_at_one_strict() {
        let d = ScanDomain::grid(vec![Axis::linear("s", 1.0, 1.0)], 1);
        let r = check_g_sandwich(&d, &tol()).unwrap();
        assert!(r.iter().all(|r| r.min_margin > 0.0));
        let bad = ScanDomain::grid(vec![Axis::linear("s", 0.0, 1.0)], 3);
        assert!(matches!(check_g_sandwich(&bad, &tol()), Err(Error::Domain { .. })));
    }

    #[test]
    fn closed_form_residual_at_one() {
        let d = ScanDomain::grid(vec![Axis::linear("s", 1.0, 1.0)], 1);
        let r = check_backward_heat_closed_form(&d, &tol()).unwrap();
        assert!(r[0].min_margin.abs() <= 1e-9);
    }

    #[test]
    fn heat_fd_excludes_boundary() {
        let d = ScanDomain::grid(vec![Axis::linear("p", 0.5, 2.0), Axis::linear("t", 0.0, 1.0)], 4);
        let r = &check_backward_heat(&d, &tol()).unwrap()[0];
        assert!(r.passed, "{}", r.to_human());
        assert_eq!(r.samples, 12);
        assert!(r.notes.iter().any(|n| n.contains("t = 0")));
    }

    #[test]
    fn four_point_degenerate_cases() {
        for (p, t) in [(1.0, 0.0), (0.3, 2.0), (50.0, 1e-3)] {
            assert_eq!(four_point_margin(BellmanFunction::N, p, 0.0, t), 0.0);
            assert_eq!(four_point_margin(BellmanFunction::NSup, p, 0.0, t), 0.0);
        }
        let direct = n_eval_unchecked(1.5, 0.25) + n_eval_unchecked(0.5, 0.25);
        let m = four_point_margin(BellmanFunction::N, 1.0, 0.5, 0.0);
        assert!(m >= 0.0);
        assert!((m - direct).abs() < 1e-15);
    }

    #[test]
    fn four_point_margin_matches_direct_sum() {
        for &(p, a, t) in &[(1.0, 0.3, 0.7), (5.0, 4.0, 20.0), (0.01, 0.005, 1e-5)] {
            for w in [BellmanFunction::N, BellmanFunction::NSup] {
                let direct = w.eval(p + a, t + a * a) + w.eval(p - a, t + a * a) - 2.0 * w.eval(p, t);
                assert!((four_point_margin(w, p, a, t) - direct).abs() < 1e-12, "{w:?} {p} {a} {t}");
            }
        }
    }

    #[test]
    fn taylor_limit_matches() {
        for (p, t) in [(1.0, 1.0), (2.0, 0.5)] {
            let r = &check_taylor_limit(p, t, &tol()).unwrap()[0];
            assert!(r.passed, "{}", r.to_human());
        }
    }

    #[test]
    fn concavity_examples() {
        let d = ScanDomain::grid(vec![Axis::log("s", 1e-2, 50.0)], 200);
        let r = check_n_t_concavity(&d, &[(1.0, 1.0)], &tol()).unwrap();
        assert!(r.iter().all(|r| r.passed), "{}", r[1].to_human());
        assert!(phi(50.0).abs() < 1e-300 && phi(5.0) < 0.0);
    }

    #[test]
    fn supersolution_small() {
        let d = ScanDomain::grid(vec![Axis::log("p", 0.2, 20.0), Axis::linear("t", 0.0, 100.0)], 12);
        for r in check_supersolution(&d, 1000, 3, &tol()).unwrap() {
            assert!(r.passed, "{}", r.to_human());
        }
    }

    #[test]
    fn counterexample_single_c() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.1, 10.0), Axis::log("y", 1e-3, 10.0)], 20);
        let r = &scan_counterexample_m_sup(&[1.0], &d, &tol()).unwrap()[0];
        assert!(r.passed);
        assert!(r.worst_witness[3] < 0.0);
        assert!(scan_counterexample_m_sup(&[], &d, &tol()).is_err());
    }

    #[test]
    fn four_point_m_is_informational() {
        let r = &scan_four_point_m(2000, 1, false).unwrap()[0];
        assert!(!r.gating);
    }
}
