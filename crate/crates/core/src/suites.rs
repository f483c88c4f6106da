//! Named check suites shared by the command line and the acceptance tests.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heat::{self, PositiveFunction, TestFunction};
use crate::martingale::{brownian_crosscheck, random_batch, run_batch, MartingaleSpec};
use crate::special::functions::F_LOG_SWITCH;
use crate::special::{self, auxiliaries, f_derivatives, kernel_eval, tables};
use crate::verify::{self, Axis, ScanDomain, Tolerances, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernel,
    Verify,
    Flow,
    Martingale,
    Scan,
    All,
}

impl Suite {
    pub const GATING: [Suite; 4] = [Suite::Kernel, Suite::Verify, Suite::Flow, Suite::Martingale];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Verify => "verify",
            Suite::Flow => "flow",
            Suite::Martingale => "martingale",
            Suite::Scan => "scan",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Suite::Kernel, Suite::Verify, Suite::Flow, Suite::Martingale, Suite::Scan, Suite::All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the main random sample count of a suite.
    pub samples: Option<u64>,
    pub nodes: usize,
    pub depth: usize,
    pub tolerances: Tolerances,
    /// Explicit martingale batch; replaces the random batch when set.
    pub manifest: Option<Vec<MartingaleSpec>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: None,
            nodes: heat::flow::DEFAULT_NODES,
            depth: 10,
            tolerances: Tolerances::default(),
            manifest: None,
        }
    }
}

impl SuiteConfig {
    fn samples_or(&self, default: u64) -> u64 {
        self.samples.unwrap_or(default)
    }
}

/// Reports plus plot-ready tables (`name`, tab-separated text).
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub reports: Vec<VerificationReport>,
    pub tables: Vec<(String, String)>,
}

impl SuiteOutput {
    pub fn passed(&self) -> bool {
        verify::all_gating_passed(&self.reports)
    }

    fn extend(&mut self, other: SuiteOutput) {
        self.reports.extend(other.reports);
        self.tables.extend(other.tables);
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteOutput> {
    match suite {
        Suite::Kernel => kernel_suite(cfg),
        Suite::Verify => verify_suite(cfg),
        Suite::Flow => flow_suite(cfg),
        Suite::Martingale => martingale_suite(cfg),
        Suite::Scan => scan_suite(cfg),
        Suite::All => {
            let mut out = SuiteOutput::default();
            for s in Suite::GATING.into_iter().chain([Suite::Scan]) {
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Folds `(margin, point)` pairs into a report.
fn grid_report(name: &str, tol: f64, domain: &str, rows: impl Iterator<Item = (f64, f64)>) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new(name, tol).with_domain(domain);
    for (m, x) in rows {
        r.observe(m, &[x]);
    }
    r.finish(start.elapsed())
}

const POSITIVITY_GRID: usize = 10_000;

/// `k'`, `k''` and both scaled auxiliaries on the positivity grid; the
/// margin is the smallest value seen and must be strictly positive.
pub fn kernel_positivity() -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    let grid = linspace(-30.0, 30.0, POSITIVITY_GRID);
    let vals: Vec<[f64; 4]> = grid
        .iter()
        .map(|&x| {
            let k = kernel_eval(x)?;
            let a = auxiliaries(x)?;
            Ok([k.k_prime, k.k_double_prime, a.u_scaled, a.v_scaled])
        })
        .collect::<Result<_>>()?;
    let names = ["kernel_k_prime_positive", "kernel_k_double_prime_positive", "aux_u_positive", "aux_v_positive"];
    let e = start.elapsed();
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut r = VerificationReport::new(*name, 0.0).with_domain(format!("x in [-30, 30], {POSITIVITY_GRID} points"));
            for (x, v) in grid.iter().zip(&vals) {
                r.observe(v[j], &[*x]);
            }
            if j >= 2 {
                r.note(if j == 2 { "u / H^2 = k''" } else { "v / H" });
            }
            let strict = r.min_margin > 0.0;
            let mut r = r.finish(e);
            if !strict {
                r.passed = false;
                r.note("strict positivity required");
            }
            r
        })
        .collect())
}

/// `F(0)`, and one-sided second-order differences for `F'(0)`, `F''(0)`
/// (F is only defined on `x >= 0`).
pub fn f_boundary() -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    let f = special::f_eval;
    let f0 = f(0.0)?;
    let h1 = 1e-4;
    let d1 = (4.0 * f(h1)? - f(2.0 * h1)? - 3.0 * f0) / (2.0 * h1);
    let h2 = 1e-4;
    let d2 = (2.0 * f0 - 5.0 * f(h2)? + 4.0 * f(2.0 * h2)? - f(3.0 * h2)?) / (h2 * h2);
    let e = start.elapsed();
    let mk = |name: &str, err: f64, tol: f64, value: f64, note: &str| {
        let mut r = VerificationReport::new(name, tol).with_domain("x = 0");
        r.observe(-err, &[0.0]);
        r.metric("value", value);
        r.note(note);
        r.finish(e)
    };
    Ok(vec![
        mk("F_zero", f0.abs(), 1e-12, f0, "margin is -|F(0)|"),
        mk("F_prime_zero", d1.abs(), 1e-6, d1, "one-sided 3-point difference, h = 1e-4"),
        mk("F_second_zero", (d2 - 1.0).abs(), 1e-4, d2, "one-sided 4-point difference, h = 1e-4"),
    ])
}

fn kernel_suite(_cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut reports = kernel_positivity()?;
    reports.extend(f_boundary()?);

    let us = logspace(1e-6, 1e3, 400);
    reports.push(grid_report(
        "inv_k_prime_round_trip",
        1e-11,
        "u log-spaced in [1e-6, 1e3], 400 points",
        us.iter().map(|&u| {
            let t = special::inv_k_prime(u).unwrap_or(f64::NAN);
            let back = kernel_eval(t).map(|k| k.k_prime).unwrap_or(f64::NAN);
            (-(back - u).abs() / u.max(1.0), u)
        }),
    ));

    let ts = linspace(-8.0, 8.0, 401);
    let mut ident = VerificationReport::new("F_derivative_identities", 1e-8).with_domain("t in [-8, 8], 401 points");
    let start = Instant::now();
    for &t in &ts {
        let k = kernel_eval(t)?;
        let d = f_derivatives(k.k_prime)?;
        let e1 = (d.log_f1 - k.k).abs();
        let f2 = k.k_prime * k.k.exp() / k.k_double_prime;
        let e2 = (d.f2_over_f1 * d.f1() / f2 - 1.0).abs();
        ident.observe(-e1.max(e2), &[t]);
    }
    ident.note("relative error of F'(k'(t)) = e^k and F''(k'(t)) = k' e^k / k''");
    reports.push(ident.finish(start.elapsed()));

    let xs = linspace(0.01, 10.0, 400);
    reports.push(grid_report(
        "F_prime_central_difference",
        1e-6,
        "x in [0.01, 10], 400 points",
        xs.iter().map(|&x| {
            let h = 1e-5 * x.max(1.0);
            let fd = (special::f_eval(x + h).unwrap() - special::f_eval(x - h).unwrap()) / (2.0 * h);
            let d = f_derivatives(x).unwrap();
            (-(fd / d.f1() - 1.0).abs(), x)
        }),
    ));

    let ss = logspace(0.05, 20.0, 400);
    reports.push(grid_report(
        "G_prime_central_difference",
        1e-7,
        "s log-spaced in [0.05, 20], 400 points",
        ss.iter().map(|&s| {
            let h = 1e-4 * s;
            let fd = (special::g_eval(s + h).unwrap() - special::g_eval(s - h).unwrap()) / (2.0 * h);
            let g1 = special::g_prime(s).unwrap();
            (-(fd / g1 - 1.0).abs(), s)
        }),
    ));

    let fx = linspace(0.0, 40.0, 4001);
    reports.push(grid_report(
        "F_increasing",
        0.0,
        "x in [0, 40], 4001 points",
        fx.windows(2).map(|w| (special::log_f_eval(w[1]).unwrap() - special::log_f_eval(w[0]).unwrap(), w[1])),
    ));
    let gs = logspace(1e-3, 1e3, 4001);
    reports.push(grid_report(
        "G_decreasing",
        0.0,
        "s log-spaced in [1e-3, 1e3], 4001 points",
        gs.windows(2).map(|w| (special::g_eval(w[0]).unwrap() - special::g_eval(w[1]).unwrap(), w[1])),
    ));
    for r in reports.iter_mut().rev().take(2) {
        if r.min_margin <= 0.0 {
            r.passed = false;
            r.note("strict monotonicity required");
        }
    }
    Ok(SuiteOutput { reports, tables: Vec::new() })
}

pub const TAYLOR_POINTS: [(f64, f64); 5] = [(1.0, 1.0), (2.0, 0.5), (0.5, 2.0), (3.0, 0.25), (1.0, 10.0)];

pub fn counterexample_c_grid() -> Vec<f64> {
    logspace(1e-3, 1e3, 50)
}

pub fn counterexample_domain() -> ScanDomain {
    ScanDomain::grid(vec![Axis::log("x", 1e-2, 1e2), Axis::log("y", 1e-3, 1e3)], 120)
}

fn verify_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let tol = &cfg.tolerances;
    let mut reports = Vec::new();
    let det = ScanDomain::grid(vec![Axis::linear("x", 0.1, 10.0), Axis::linear("y", 0.0, 10.0)], 300);
    reports.extend(verify::check_det_and_psd(&det, tol)?);
    reports.extend(verify::check_f_bound(&ScanDomain::grid(vec![Axis::linear("x", 0.0, 40.0)], 10_000), tol)?);
    reports.extend(verify::check_g_sandwich(&ScanDomain::grid(vec![Axis::log("s", 1e-3, 1e3)], 10_000), tol)?);
    let heat = ScanDomain::grid(vec![Axis::log("p", 0.2, 20.0), Axis::log("t", 0.01, 100.0)], 100);
    reports.extend(verify::check_backward_heat(&heat, tol)?);
    let s_grid = ScanDomain::grid(vec![Axis::log("s", 1e-2, 50.0)], 2000);
    reports.extend(verify::check_backward_heat_closed_form(&s_grid, tol)?);
    reports.extend(verify::check_n_t_concavity(&s_grid, &[(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)], tol)?);
    reports.extend(verify::check_four_point_n(cfg.samples_or(1_000_000), cfg.seed, tol)?);
    for (p, t) in TAYLOR_POINTS {
        reports.extend(verify::check_taylor_limit(p, t, tol)?);
    }
    let sup = ScanDomain::grid(vec![Axis::log("p", 0.01, 100.0), Axis::linear("t", 0.0, 100.0)], 200);
    reports.extend(verify::check_supersolution(&sup, 100_000, cfg.seed, tol)?);
    reports.extend(verify::scan_counterexample_m_sup(&counterexample_c_grid(), &counterexample_domain(), tol)?);
    Ok(SuiteOutput { reports, tables: Vec::new() })
}

pub const FLOW_FUNCTIONS: u64 = 20;
pub const FLOW_S_POINTS: usize = 21;
pub const SHARPNESS_C: f64 = 1.5;
pub const SHARPNESS_RADII: [f64; 9] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];

/// The seeded 1-D test functions of the flow suite.
pub fn flow_functions(seed: u64) -> Vec<TestFunction> {
    (0..FLOW_FUNCTIONS).map(|i| TestFunction::random_trig_poly(seed.wrapping_add(i))).collect()
}

/// Monotonicity of the flow for each function, aggregated into one report.
pub fn flow_monotone_batch(fs: &[TestFunction], nodes: usize, tol: f64) -> Result<SuiteOutput> {
    let start = Instant::now();
    let traces = fs
        .par_iter()
        .map(|f| heat::check_flow_monotone(&PositiveFunction::exp_of(f.clone())?, FLOW_S_POINTS, nodes, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut r = VerificationReport::new("flow_monotone", tol)
        .with_domain(format!("{} functions, {FLOW_S_POINTS} s points, {nodes} nodes", fs.len()));
    let mut out = SuiteOutput::default();
    let mut min_gap = f64::INFINITY;
    for (i, (trace, rep)) in traces.into_iter().enumerate() {
        let mut w = vec![i as f64];
        w.extend_from_slice(&rep.worst_witness);
        r.observe(rep.min_margin, &w);
        r.samples += rep.samples - 1;
        min_gap = min_gap.min(rep.get_metric("A(1)-A(0)").unwrap_or(f64::NAN));
        out.tables.push((format!("flow_trace_{i:02}"), trace.to_text()));
    }
    r.metric("min_endpoint_gap", min_gap);
    r.note("witness is (function index, s_i, s_i+1)");
    out.reports.push(r.finish(start.elapsed()));
    Ok(out)
}

/// The endpoint chain at `R = 1` for each function, aggregated.
pub fn endpoint_batch(fs: &[TestFunction], nodes: usize, tol: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let reps = fs
        .par_iter()
        .map(|f| heat::check_endpoint_inequality(f, 1.0, nodes, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut r = VerificationReport::new("endpoint_chain", tol).with_domain(format!("{} functions, R = 1", fs.len()));
    for (i, rep) in reps.iter().enumerate() {
        r.observe(rep.min_margin, &[i as f64]);
    }
    r.note("margin is min(mid - lhs, rhs - mid); witness is the function index");
    Ok(r.finish(start.elapsed()))
}

/// Monte Carlo test functions in dimensions 2 and 3.
pub fn mc_functions() -> Result<Vec<TestFunction>> {
    Ok(vec![
        TestFunction::trig_product(0.5, &[1.0, 1.0], &[0.0, FRAC_PI_2])?,
        TestFunction::gaussian_bump(1.0, 1.0, &[0.0, 0.0, 0.0])?,
    ])
}

fn flow_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let tol = &cfg.tolerances;
    let fs = flow_functions(cfg.seed);
    let mut out = flow_monotone_batch(&fs, cfg.nodes, tol.get("flow"))?;
    out.reports.push(endpoint_batch(&fs, cfg.nodes, tol.get("endpoint"))?);
    for (j, f) in mc_functions()?.iter().enumerate() {
        out.reports.push(heat::mc_endpoint_nd(f, cfg.samples_or(1_000_000), cfg.seed.wrapping_add(j as u64), tol.get("mc_sigmas"))?);
    }
    let (table, reps) = heat::sharpness_demo(SHARPNESS_C, &SHARPNESS_RADII, tol.get("sharpness"))?;
    out.reports.extend(reps);
    out.tables.push(("sharpness".into(), table.to_text()));
    Ok(out)
}

pub const BROWNIAN_PATHS: u64 = 20_000;

fn martingale_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let specs = match &cfg.manifest {
        Some(m) => m.clone(),
        None => random_batch(cfg.samples_or(10_000) as usize, cfg.depth, cfg.seed),
    };
    let mut reports = run_batch(&specs, &cfg.tolerances)?;
    reports.extend(brownian_crosscheck(
        1.0,
        0.5,
        0.2,
        BROWNIAN_PATHS,
        cfg.seed,
        cfg.tolerances.get("brownian_sigmas"),
    )?);
    Ok(SuiteOutput { reports, tables: Vec::new() })
}

fn scan_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let n = cfg.samples_or(1_000_000);
    let mut reports = verify::scan_four_point_m(n, cfg.seed, false)?;
    reports.extend(verify::scan_four_point_m((n / 10).max(1), cfg.seed, true)?);
    Ok(SuiteOutput { reports, tables: Vec::new() })
}

/// A named special function evaluated at `args`, with an error bound where
/// one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedValue {
    pub name: String,
    pub args: Vec<f64>,
    pub value: f64,
    pub error_bound: Option<f64>,
}

pub const EVAL_NAMES: &[&str] = &[
    "k", "k_prime", "k_double_prime", "inv_mills", "inv_k_prime", "F", "log_F", "G", "M", "N", "N_sup", "bound_rhs",
];

pub fn eval_named(name: &str, args: &[f64]) -> Result<NamedValue> {
    let arity = match name {
        "M" | "N" | "N_sup" | "bound_rhs" => 2,
        n if EVAL_NAMES.contains(&n) => 1,
        _ => return Err(Error::Config(format!("unknown function '{name}'; known: {}", EVAL_NAMES.join(", ")))),
    };
    if args.len() != arity {
        return Err(Error::Config(format!("{name} takes {arity} argument(s), got {}", args.len())));
    }
    let x = args[0];
    let t = tables();
    let f_err = |x: f64, v: f64| t.f_error_bound(x, v);
    let g_err = |s: f64| t.g_error_bound(s);
    let (value, error_bound) = match name {
        "k" => (kernel_eval(x)?.k, None),
        "k_prime" => (kernel_eval(x)?.k_prime, None),
        "k_double_prime" => (kernel_eval(x)?.k_double_prime, None),
        "inv_mills" => (special::inv_mills(x)?, None),
        "inv_k_prime" => (special::inv_k_prime(x)?, None),
        "F" => {
            let v = special::f_eval(x)?;
            (v, Some(f_err(x, v)))
        }
        "log_F" => {
            let v = special::log_f_eval(x)?;
            let e = if x <= F_LOG_SWITCH { f_err(x, special::f_eval(x)?) / special::f_eval(x)? } else { t.f_log.max_abs_error() };
            (v, Some(e))
        }
        "G" => (special::g_eval(x)?, g_err(x)),
        "M" => {
            let v = special::m_eval(x, args[1])?;
            let arg = args[1] / x;
            (v, Some(f_err(arg, special::f_eval(arg)?)))
        }
        "N" => {
            let v = special::n_eval(x, args[1])?;
            let e = if args[1] == 0.0 { Some(0.0) } else { g_err(x / args[1].sqrt()) };
            (v, e)
        }
        "N_sup" => (special::n_sup_eval(x, args[1])?, None),
        "bound_rhs" => (special::bound_rhs(x, args[1])?, None),
        _ => unreachable!(),
    };
    Ok(NamedValue { name: name.to_string(), args: args.to_vec(), value, error_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Kernel, Suite::Verify, Suite::Flow, Suite::Martingale, Suite::Scan, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn kernel_suite_passes() {
        let out = run_suite(Suite::Kernel, &SuiteConfig::default()).unwrap();
        for r in &out.reports {
            assert!(r.passed, "{}", r.to_human());
        }
    }

    #[test]
    fn named_evaluation() {
        let v = eval_named("F", &[2.0]).unwrap();
        assert!(v.value > 0.0 && v.error_bound.unwrap() < 1e-9);
        assert_eq!(eval_named("N_sup", &[3.0, 16.0]).unwrap().value, 5f64.ln());
        assert!(eval_named("F", &[1.0, 2.0]).is_err());
        assert!(eval_named("nope", &[1.0]).is_err());
        assert!(eval_named("G", &[-1.0]).is_err());
    }

    #[test]
    fn counterexample_grid_shape() {
        let c = counterexample_c_grid();
        assert_eq!(c.len(), 50);
        assert!((c[0] - 1e-3).abs() < 1e-18 && (c[49] / 1e3 - 1.0).abs() < 1e-12);
    }
}
