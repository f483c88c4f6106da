//! F, M, G, N, N^sup and the pointwise bound, backed by tables built once.
//!
//! F is integrated in the parameter `t = (k')^{-1}(x)`:
//! `F(k'(t)) = int_{-inf}^t k''(s) e^{k(s)} ds`, so the integrand needs no
//! root finding; only the node positions do. Beyond `F_LOG_SWITCH` the table
//! stores `log F`.
//!
//! G is integrated from its closed-form derivative `G'(s) = -J(s)` with
//! `J(s) = 1/s - R(s)`, tabulated in `z = ln s`, with the asymptotic series
//! `G(s) = 1/(2s^2) - 3/(4s^4) + ...` above `G_TABLE_HI` and
//! `G(s) = G(s0) + ln(s0/s) - int_s^s0 R` below `G_TABLE_LO`.

use std::sync::OnceLock;

use super::kernel::{inv_k_prime_unchecked, kernel_eval_unchecked};
use super::normal::{mills_defect, mills_ratio};
use super::table::SpecialFunctionTable;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig, Rule};

/// Upper end of the F table.
pub const F_DOMAIN_MAX: f64 = 40.0;
/// F is stored directly below this point and as log F above it.
pub const F_LOG_SWITCH: f64 = 6.0;
const F_LINEAR_STEP: f64 = 0.01;
const F_LOG_STEP: f64 = 0.02;

pub const G_TABLE_LO: f64 = 1e-4;
pub const G_TABLE_HI: f64 = 64.0;
const G_LOG_STEP: f64 = 0.01;

/// Immutable tables shared by every evaluator.
#[derive(Debug, Clone)]
pub struct SpecialTables {
    pub f_linear: SpecialFunctionTable,
    pub f_log: SpecialFunctionTable,
    pub g_log: SpecialFunctionTable,
    /// Midpoint-certified `(floor, rel)` with `|error| <= floor + rel * F`
    /// on `f_linear`; absent on import.
    pub f_linear_mixed_error: Option<(f64, f64)>,
}

static TABLES: OnceLock<SpecialTables> = OnceLock::new();

/// The process-wide tables, built on first use.
pub fn tables() -> &'static SpecialTables {
    TABLES.get_or_init(|| SpecialTables::build().expect("special function tables"))
}

fn tight_quadrature() -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-14,
        max_subdivisions: 64,
        hermite_nodes: 64,
    }
}

/// `int_{t0}^{t1} k''(s) exp(k(s) - shift) ds`.
fn f_segment(t0: f64, t1: f64, shift: f64) -> f64 {
    let cfg = tight_quadrature();
    if t0 == f64::NEG_INFINITY {
        // s = t1 / w maps (0, 1] onto (-inf, t1]; needs t1 < 0
        debug_assert!(t1 < 0.0);
        integrate(
            |w| {
                let s = t1 / w;
                let ke = kernel_eval_unchecked(s);
                let v = ke.k_double_prime * (ke.k - shift).exp() * (-t1) / (w * w);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            &cfg,
        )
        .value
    } else {
        integrate(
            |s| {
                let ke = kernel_eval_unchecked(s);
                ke.k_double_prime * (ke.k - shift).exp()
            },
            t0,
            t1,
            &cfg,
        )
        .value
    }
}

struct FNode {
    x: f64,
    t: f64,
    k: f64,
    k_prime: f64,
    k_double_prime: f64,
    log_f: f64,
}

fn f_node(x: f64) -> (f64, f64, f64, f64) {
    if x == 0.0 {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0, 0.0);
    }
    let t = inv_k_prime_unchecked(x);
    let ke = kernel_eval_unchecked(t);
    (t, ke.k, ke.k_prime, ke.k_double_prime)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn build_f_nodes(xs: &[f64]) -> Vec<FNode> {
    let mut out: Vec<FNode> = Vec::with_capacity(xs.len());
    let mut log_f = f64::NEG_INFINITY;
    let mut prev_t = f64::NEG_INFINITY;
    for &x in xs {
        let (t, k, kp, kpp) = f_node(x);
        if x > 0.0 {
            let seg = f_segment(prev_t, t, k);
            log_f = log_add_exp(log_f, k + seg.ln());
        }
        out.push(FNode {
            x,
            t,
            k,
            k_prime: kp,
            k_double_prime: kpp,
            log_f,
        });
        prev_t = t;
    }
    out
}

/// Exact log F at `x`, integrating from the node `from`.
fn log_f_from(from: &FNode, x: f64) -> f64 {
    let (t, k, _, _) = f_node(x);
    let seg = f_segment(from.t, t, k);
    log_add_exp(from.log_f, k + seg.ln())
}

fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

/// Second derivative of F at a node from kernel values: `k' e^k / k''`.
fn f_second(node: &FNode) -> f64 {
    if node.x == 0.0 {
        1.0
    } else {
        node.k_prime * node.k.exp() / node.k_double_prime
    }
}

/// Second derivative of log F: `L' (k'/k'' - L')` with `L' = e^{k - log F}`.
fn log_f_second(node: &FNode) -> f64 {
    let l1 = (node.k - node.log_f).exp();
    l1 * (node.k_prime / node.k_double_prime - l1)
}

/// `g(z) = G(e^z)`, `g' = -s J(s)`, `g'' = 1 - s J (1 + s^2)`.
fn g_log_derivatives(z: f64) -> (f64, f64) {
    let s = z.exp();
    let j = mills_defect(s);
    (-s * j, 1.0 - s * j * (1.0 + s * s))
}

/// Asymptotic tail of G; relative error below 1e-15 for s >= 64.
fn g_asymptotic(s: f64) -> f64 {
    // G(s) = sum_{k>=1} (-1)^{k+1} (2k-1)!! / (2k) s^{-2k}
    let w = 1.0 / (s * s);
    let c = [
        1.0 / 2.0,
        -3.0 / 4.0,
        15.0 / 6.0,
        -105.0 / 8.0,
        945.0 / 10.0,
        -10395.0 / 12.0,
    ];
    let mut acc = 0.0;
    for ci in c.iter().rev() {
        acc = acc * w + ci;
    }
    acc * w
}

impl SpecialTables {
    pub fn build() -> Result<Self> {
        let (f_linear, f_log, rel) = build_f_tables()?;
        let g_log = build_g_table()?;
        Ok(Self {
            f_linear,
            f_log,
            g_log,
            f_linear_mixed_error: Some(rel),
        })
    }

    /// Reassemble tables from their text exports, recomputing second
    /// derivatives from closed forms.
    pub fn from_texts(f_linear: &str, f_log: &str, g_log: &str) -> Result<Self> {
        let f_linear = SpecialFunctionTable::from_text(f_linear, |x, _, _| {
            let (t, k, kp, kpp) = f_node(x);
            let node = FNode {
                x,
                t,
                k,
                k_prime: kp,
                k_double_prime: kpp,
                log_f: 0.0,
            };
            f_second(&node)
        })?;
        let f_log = SpecialFunctionTable::from_text(f_log, |x, v, _| {
            let (t, k, kp, kpp) = f_node(x);
            let node = FNode {
                x,
                t,
                k,
                k_prime: kp,
                k_double_prime: kpp,
                log_f: v,
            };
            log_f_second(&node)
        })?;
        let g_log = SpecialFunctionTable::from_text(g_log, |z, _, _| g_log_derivatives(z).1)?;
        Ok(Self {
            f_linear,
            f_log,
            g_log,
            f_linear_mixed_error: None,
        })
    }

    /// Error bound of `F(x)` as served by these tables.
    pub fn f_error_bound(&self, x: f64, fx: f64) -> f64 {
        if x <= F_LOG_SWITCH {
            let abs = self.f_linear.max_abs_error();
            self.f_linear_mixed_error.map_or(abs, |(a, r)| abs.min(a + r * fx))
        } else {
            fx * self.f_log.max_abs_error().exp_m1()
        }
    }

    /// Error bound of `G(s)` inside the table, `None` on the series branches.
    pub fn g_error_bound(&self, s: f64) -> Option<f64> {
        (G_TABLE_LO..=G_TABLE_HI).contains(&s).then(|| self.g_log.max_abs_error())
    }
}

fn build_f_tables() -> Result<(SpecialFunctionTable, SpecialFunctionTable, (f64, f64))> {
    let lin_x = uniform_grid(0.0, F_LOG_SWITCH, F_LINEAR_STEP);
    let log_x = uniform_grid(F_LOG_SWITCH, F_DOMAIN_MAX, F_LOG_STEP);
    let mut xs = lin_x.clone();
    xs.extend_from_slice(&log_x[1..]);
    let nodes = build_f_nodes(&xs);
    let n_lin = lin_x.len();

    let lin = &nodes[..n_lin];
    let mut table_lin = SpecialFunctionTable::new(
        "F",
        lin.iter().map(|n| n.x).collect(),
        lin.iter().map(|n| n.log_f.exp()).collect(),
        lin.iter().map(|n| n.k.exp()).collect(),
        lin.iter().map(f_second).collect(),
        f64::MIN_POSITIVE,
    )?;
    let logs = &nodes[n_lin - 1..];
    let mut table_log = SpecialFunctionTable::new(
        "logF",
        logs.iter().map(|n| n.x).collect(),
        logs.iter().map(|n| n.log_f).collect(),
        logs.iter().map(|n| (n.k - n.log_f).exp()).collect(),
        logs.iter().map(log_f_second).collect(),
        f64::MIN_POSITIVE,
    )?;

    // a-posteriori bound: compare against direct integration at midpoints
    let mut err_lin: f64 = 0.0;
    let (mut floor_lin, mut rel_lin): (f64, f64) = (0.0, 0.0);
    for w in lin.windows(2) {
        let xm = 0.5 * (w[0].x + w[1].x);
        let exact = log_f_from(&w[0], xm).exp();
        let approx = table_lin.eval_in_domain(xm);
        err_lin = err_lin.max((exact - approx).abs());
        if exact < 1.0 {
            floor_lin = floor_lin.max((exact - approx).abs());
        } else {
            rel_lin = rel_lin.max((exact - approx).abs() / exact);
        }
    }
    let mut err_log: f64 = 0.0;
    for w in logs.windows(2) {
        let xm = 0.5 * (w[0].x + w[1].x);
        let exact = log_f_from(&w[0], xm);
        err_log = err_log.max((exact - table_log.eval_in_domain(xm)).abs());
    }
    table_lin = SpecialFunctionTable::new(
        "F",
        table_lin.grid().to_vec(),
        table_lin.values().to_vec(),
        table_lin.derivative_values().to_vec(),
        lin.iter().map(f_second).collect(),
        2.0 * err_lin + 1e-16,
    )?;
    table_log = SpecialFunctionTable::new(
        "logF",
        table_log.grid().to_vec(),
        table_log.values().to_vec(),
        table_log.derivative_values().to_vec(),
        logs.iter().map(log_f_second).collect(),
        2.0 * err_log + 1e-16,
    )?;
    Ok((table_lin, table_log, (2.0 * floor_lin + 1e-16, 2.0 * rel_lin + 1e-16)))
}

fn build_g_table() -> Result<SpecialFunctionTable> {
    let zs = uniform_grid(G_TABLE_LO.ln(), G_TABLE_HI.ln(), G_LOG_STEP);
    let cfg = tight_quadrature();
    let n = zs.len();
    let mut values = vec![0.0; n];
    values[n - 1] = g_asymptotic(G_TABLE_HI);
    for i in (0..n - 1).rev() {
        let (a, b) = (zs[i].exp(), zs[i + 1].exp());
        values[i] = values[i + 1] + integrate(mills_defect, a, b, &cfg).value;
    }
    let (d1, d2): (Vec<f64>, Vec<f64>) = zs.iter().map(|&z| g_log_derivatives(z)).unzip();
    let mut table = SpecialFunctionTable::new("G", zs.clone(), values.clone(), d1.clone(), d2.clone(), f64::MIN_POSITIVE)?;
    let mut err: f64 = 0.0;
    for i in 0..n - 1 {
        let zm = 0.5 * (zs[i] + zs[i + 1]);
        let exact = values[i + 1] + integrate(mills_defect, zm.exp(), zs[i + 1].exp(), &cfg).value;
        err = err.max((exact - table.eval_in_domain(zm)).abs());
    }
    table = SpecialFunctionTable::new("G", zs, values, d1, d2, 2.0 * err + 1e-16)?;
    Ok(table)
}

/// F(x) for 0 <= x <= 40. Overflows (as an error) above roughly x = 37.7;
/// use [`log_f_eval`] there.
pub fn f_eval(x: f64) -> Result<f64> {
    check_f_arg("F_eval", x)?;
    let v = f_eval_unchecked(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            func: "F_eval",
            value: x,
            hint: "F exceeds the double range; use log_f_eval",
        })
    }
}

/// log F(x); `-inf` at 0.
pub fn log_f_eval(x: f64) -> Result<f64> {
    check_f_arg("log_F_eval", x)?;
    let t = tables();
    Ok(if x <= F_LOG_SWITCH {
        t.f_linear.eval_in_domain(x).ln()
    } else {
        t.f_log.eval_in_domain(x)
    })
}

fn check_f_arg(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            func,
            value: x,
            reason: "F is defined on [0, inf)",
        });
    }
    if x > F_DOMAIN_MAX {
        return Err(Error::Range {
            func,
            value: x,
            lo: 0.0,
            hi: F_DOMAIN_MAX,
        });
    }
    Ok(())
}

pub(crate) fn f_eval_unchecked(x: f64) -> f64 {
    let t = tables();
    if x <= F_LOG_SWITCH {
        t.f_linear.eval_in_domain(x)
    } else {
        t.f_log.eval_in_domain(x).exp()
    }
}

/// Kernel data at `tau = (k')^{-1}(x)`, from which `F'(x) = e^{k(tau)}` and
/// `F''(x) = k'(tau) e^{k(tau)} / k''(tau)`. Uses root finding per call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDerivatives {
    pub tau: f64,
    /// log F'(x) = k(tau)
    pub log_f1: f64,
    /// F''(x) / F'(x) = k'(tau) / k''(tau)
    pub f2_over_f1: f64,
}

impl FDerivatives {
    pub fn f1(&self) -> f64 {
        self.log_f1.exp()
    }
    pub fn f2(&self) -> f64 {
        self.f2_over_f1 * self.log_f1.exp()
    }
}

pub fn f_derivatives(x: f64) -> Result<FDerivatives> {
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(Error::Domain {
            func: "F derivatives",
            value: x,
            reason: "argument must be finite and nonnegative",
        });
    }
    if x == 0.0 {
        return Ok(FDerivatives {
            tau: f64::NEG_INFINITY,
            log_f1: f64::NEG_INFINITY,
            f2_over_f1: f64::INFINITY,
        });
    }
    let tau = inv_k_prime_unchecked(x);
    let ke = kernel_eval_unchecked(tau);
    Ok(FDerivatives {
        tau,
        log_f1: ke.k,
        f2_over_f1: ke.k_prime / ke.k_double_prime,
    })
}

/// M(x, y) = log x + F(y / x).
pub fn m_eval(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "M_eval",
            value: x,
            reason: "x must be positive",
        });
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain {
            func: "M_eval",
            value: y,
            reason: "y must be nonnegative",
        });
    }
    Ok(x.ln() + f_eval(y / x)?)
}

/// G(s) for s > 0.
pub fn g_eval(s: f64) -> Result<f64> {
    if !(s > 0.0) || s.is_nan() {
        return Err(Error::Domain {
            func: "G_eval",
            value: s,
            reason: "G diverges at 0; argument must be positive",
        });
    }
    Ok(g_eval_unchecked(s))
}

/// G on (0, inf], with G(inf) = 0.
pub(crate) fn g_eval_unchecked(s: f64) -> f64 {
    if s >= G_TABLE_HI {
        if s.is_infinite() {
            0.0
        } else {
            g_asymptotic(s)
        }
    } else if s >= G_TABLE_LO {
        tables().g_log.eval_in_domain(s.ln())
    } else {
        let g0 = tables().g_log.values()[0];
        let gl = Rule::gauss_legendre(8);
        g0 + (G_TABLE_LO / s).ln() - gl.integrate(s, G_TABLE_LO, mills_ratio)
    }
}

/// G'(s) = -J(s) (closed form).
pub fn g_prime(s: f64) -> Result<f64> {
    g_eval(s).map(|_| -mills_defect(s))
}

/// G''(s) = s^-2 - s J(s) (closed form).
pub fn g_second(s: f64) -> Result<f64> {
    g_eval(s).map(|_| 1.0 / (s * s) - s * mills_defect(s))
}

/// N(p, t) = log p + G(p / sqrt t), with N(p, 0) = log p.
pub fn n_eval(p: f64, t: f64) -> Result<f64> {
    check_pt("N_eval", p, t)?;
    Ok(n_eval_unchecked(p, t))
}

pub(crate) fn n_eval_unchecked(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        p.ln()
    } else {
        p.ln() + g_eval_unchecked(p / t.sqrt())
    }
}

/// N^sup(p, t) = log(p^2 + t) / 2.
pub fn n_sup_eval(p: f64, t: f64) -> Result<f64> {
    check_pt("N_sup_eval", p, t)?;
    Ok(n_sup_unchecked(p, t))
}

pub(crate) fn n_sup_unchecked(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        p.ln()
    } else {
        0.5 * p.mul_add(p, t).ln()
    }
}

fn check_pt(func: &'static str, p: f64, t: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain {
            func,
            value: p,
            reason: "p must be positive",
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            func,
            value: t,
            reason: "t must be nonnegative",
        });
    }
    Ok(())
}

/// `10 e^{x^2/(2R)} (1 + x/sqrt R)^{-1}`.
pub fn bound_rhs(x: f64, r: f64) -> Result<f64> {
    log_bound_rhs(x, r, 10.0).map(f64::exp)
}

/// `log(c) + x^2/(2R) - log(1 + x/sqrt R)`.
pub fn log_bound_rhs(x: f64, r: f64, c: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain {
            func: "bound_rhs",
            value: r,
            reason: "R must be positive",
        });
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "bound_rhs",
            value: x,
            reason: "x must be nonnegative",
        });
    }
    Ok(c.ln() + x * x / (2.0 * r) - (x / r.sqrt()).ln_1p())
}
