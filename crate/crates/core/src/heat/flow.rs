//! The heat semigroup `U_s g(y) = E g(y + sqrt(s) Z)` by Gauss-Hermite
//! quadrature, and the flow quantity
//!
//! ```text
//! A(s) = U_s[ log U_{1-s} g + F( sqrt(s) |(U_{1-s} g)'| / U_{1-s} g ) ](0)
//! ```
//!
//! evaluated with nested rules. `(U_t g)' = U_t(g')`, so no derivative of
//! the semigroup is taken numerically.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::function::TestFunction;
use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::special::functions::f_eval;
use crate::verify::VerificationReport;

/// Largest F argument the flow may request.
pub const FLOW_F_ARG_CAP: f64 = 20.0;
pub const DEFAULT_NODES: usize = 128;

fn check_nodes(nodes: usize) -> Result<()> {
    if nodes < 8 {
        return Err(Error::Config(format!("need at least 8 Hermite nodes, got {nodes}")));
    }
    Ok(())
}

/// `E g(y + sqrt(s) Z)` for any closure.
pub fn heat_apply_fn<G: Fn(f64) -> f64>(g: G, s: f64, y: f64, rule: &Rule) -> f64 {
    if s == 0.0 {
        return g(y);
    }
    let r = s.sqrt();
    rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * g(y + r * z)).sum()
}

/// `U_s g(y)` for a one-dimensional test function.
pub fn heat_apply_1d(g: &TestFunction, s: f64, y: f64, nodes: usize) -> Result<f64> {
    if g.dimension() != 1 {
        return Err(Error::Config(format!(
            "heat_apply_1d needs a 1-D function, got dimension {}",
            g.dimension()
        )));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain { func: "heat_apply_1d", value: s, reason: "time must be nonnegative" });
    }
    check_nodes(nodes)?;
    Ok(heat_apply_fn(|x| g.value_1d(x), s, y, &Rule::gauss_hermite_normal(nodes)))
}

/// A strictly positive 1-D function `g` given either as `exp(f)` or directly.
#[derive(Debug, Clone, PartialEq)]
pub enum PositiveFunction {
    Exp(TestFunction),
    Direct(TestFunction),
}

impl PositiveFunction {
    pub fn exp_of(f: TestFunction) -> Result<Self> {
        if f.dimension() != 1 {
            return Err(Error::Config("flow functions are one-dimensional".into()));
        }
        Ok(Self::Exp(f))
    }

    /// Requires a positive certified lower bound.
    pub fn direct(g: TestFunction) -> Result<Self> {
        if g.dimension() != 1 {
            return Err(Error::Config("flow functions are one-dimensional".into()));
        }
        match g.lower_bound() {
            Some(lb) if lb > 0.0 => Ok(Self::Direct(g)),
            lb => Err(Error::Domain {
                func: "flow_value",
                value: lb.unwrap_or(f64::NAN),
                reason: "g must have a positive lower bound",
            }),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Exp(f) => f.value_1d(x).exp(),
            Self::Direct(g) => g.value_1d(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Self::Exp(f) => f.deriv_1d(x) * f.value_1d(x).exp(),
            Self::Direct(g) => g.deriv_1d(x),
        }
    }

    /// `log g(x)` and `|g'(x)| / g(x)`.
    pub fn log_and_ratio(&self, x: f64) -> (f64, f64) {
        match self {
            Self::Exp(f) => (f.value_1d(x), f.deriv_1d(x).abs()),
            Self::Direct(g) => {
                let v = g.value_1d(x);
                (v.ln(), g.deriv_1d(x).abs() / v)
            }
        }
    }
}

fn f_capped(arg: f64) -> Result<f64> {
    if arg > FLOW_F_ARG_CAP {
        return Err(Error::Range { func: "flow_value", value: arg, lo: 0.0, hi: FLOW_F_ARG_CAP });
    }
    f_eval(arg)
}

fn flow_with_rule(g: &PositiveFunction, s: f64, rule: &Rule) -> Result<f64> {
    let outer = s.sqrt();
    let inner = (1.0 - s).sqrt();
    let mut acc = 0.0;
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let y = outer * z;
        let integrand = if s == 1.0 {
            let (lg, ratio) = g.log_and_ratio(y);
            lg + f_capped(ratio)?
        } else {
            let mut u = 0.0;
            let mut du = 0.0;
            for (zz, ww) in rule.nodes.iter().zip(&rule.weights) {
                let x = y + inner * zz;
                u += ww * g.value(x);
                du += ww * g.deriv(x);
            }
            u.ln() + f_capped(outer * du.abs() / u)?
        };
        if s == 0.0 {
            return Ok(integrand);
        }
        acc += w * integrand;
    }
    Ok(acc)
}

/// `(A(s), error)` with the error taken as the change from a rule of half
/// the nodes.
pub fn flow_value(g: &PositiveFunction, s: f64, nodes: usize) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain { func: "flow_value", value: s, reason: "s must lie in [0, 1]" });
    }
    check_nodes(nodes)?;
    let fine = flow_with_rule(g, s, &Rule::gauss_hermite_normal(nodes))?;
    let coarse = flow_with_rule(g, s, &Rule::gauss_hermite_normal((nodes / 2).max(8)))?;
    Ok((fine, (fine - coarse).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    Quadrature1d,
    MonteCarloNd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub error_bars: Vec<f64>,
    pub method: FlowMethod,
}

impl FlowTrace {
    /// `s<TAB>A(s)<TAB>err` rows.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# s\tA(s)\terr\n");
        for ((s, a), e) in self.s_grid.iter().zip(&self.values).zip(&self.error_bars) {
            let _ = writeln!(out, "{s:.17e}\t{a:.17e}\t{e:.17e}");
        }
        out
    }
}

/// A on a uniform grid of `s_points` values; consecutive differences must
/// exceed `-(err_i + err_{i+1} + tol)`.
pub fn check_flow_monotone(
    g: &PositiveFunction,
    s_points: usize,
    nodes: usize,
    tol: f64,
) -> Result<(FlowTrace, VerificationReport)> {
    let start = Instant::now();
    if s_points < 2 {
        return Err(Error::Config("need at least two s points".into()));
    }
    let s_grid: Vec<f64> = (0..s_points)
        .map(|i| if i == s_points - 1 { 1.0 } else { i as f64 / (s_points - 1) as f64 })
        .collect();
    let values: Vec<(f64, f64)> = s_grid
        .par_iter()
        .map(|&s| flow_value(g, s, nodes))
        .collect::<Result<_>>()?;
    let trace = FlowTrace {
        s_grid: s_grid.clone(),
        values: values.iter().map(|v| v.0).collect(),
        error_bars: values.iter().map(|v| v.1).collect(),
        method: FlowMethod::Quadrature1d,
    };
    let mut r = VerificationReport::new("flow_monotone", tol).with_domain(format!(
        "s uniform on [0,1], {s_points} points, {nodes} Hermite nodes"
    ));
    for i in 0..s_points - 1 {
        let slack = trace.error_bars[i] + trace.error_bars[i + 1];
        r.observe(trace.values[i + 1] - trace.values[i] + slack, &[s_grid[i], s_grid[i + 1]]);
    }
    let a0 = trace.values[0];
    let a1 = trace.values[s_points - 1];
    r.metric("A(0)", a0);
    r.metric("A(1)", a1);
    r.metric("A(1)-A(0)", a1 - a0);
    r.metric("max_error_bar", trace.error_bars.iter().copied().fold(0.0, f64::max));
    r.note("margin is A(s_i+1) - A(s_i) + err_i + err_i+1");
    Ok((trace, r.finish(start.elapsed())))
}

/// `(log E g, E log g, E F(|g'|/g))` under the standard normal law.
pub fn endpoint_terms(g: &PositiveFunction, nodes: usize) -> Result<(f64, f64, f64)> {
    check_nodes(nodes)?;
    let rule = Rule::gauss_hermite_normal(nodes);
    let mut eg = 0.0;
    let mut elog = 0.0;
    let mut ef = 0.0;
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let (lg, ratio) = g.log_and_ratio(*z);
        eg += w * g.value(*z);
        elog += w * lg;
        ef += w * f_capped(ratio)?;
    }
    Ok((eg.ln(), elog, ef))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gh(n: usize) -> Rule {
        Rule::gauss_hermite_normal(n)
    }

    #[test]
    fn semigroup_on_constants_and_moments() {
        let c = TestFunction::constant(2.5).unwrap();
        for (s, y) in [(0.0, 1.0), (0.3, -2.0), (4.0, 0.5)] {
            assert!((heat_apply_1d(&c, s, y, 64).unwrap() - 2.5).abs() < 1e-13);
            let sq = heat_apply_fn(|x| x * x, s, y, &gh(8));
            assert!((sq - (y * y + s)).abs() < 1e-10);
        }
        for s in [0.1, 1.0, 2.0] {
            let m = heat_apply_fn(f64::exp, s, 0.0, &gh(64));
            assert!((m - (s / 2.0).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_time_is_exact() {
        let f = TestFunction::random_trig_poly(3);
        assert_eq!(heat_apply_1d(&f, 0.0, 0.7, 64).unwrap(), f.value_1d(0.7));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = TestFunction::gaussian_bump(1.0, 1.0, &[0.0, 0.0]).unwrap();
        assert!(heat_apply_1d(&f, 1.0, 0.0, 64).is_err());
    }

    #[test]
    fn semigroup_property() {
        let f = TestFunction::random_trig_poly(11);
        let rule = gh(64);
        let (s1, s2, y) = (0.3, 0.45, 0.2);
        let composed = heat_apply_fn(|x| heat_apply_fn(|u| f.value_1d(u), s1, x, &rule), s2, y, &rule);
        let direct = heat_apply_fn(|u| f.value_1d(u), s1 + s2, y, &rule);
        assert!((composed - direct).abs() < 1e-12);
    }

    #[test]
    fn gradient_commutes_with_semigroup() {
        let f = TestFunction::random_trig_poly(5);
        let rule = gh(64);
        let (s, y, h) = (0.6, 0.3, 1e-5);
        let fd = (heat_apply_fn(|u| f.value_1d(u), s, y + h, &rule)
            - heat_apply_fn(|u| f.value_1d(u), s, y - h, &rule))
            / (2.0 * h);
        let exact = heat_apply_fn(|u| f.deriv_1d(u), s, y, &rule);
        assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn flow_endpoints() {
        let g = PositiveFunction::exp_of(TestFunction::trig_poly(0.0, &[0.5], &[0.0]).unwrap()).unwrap();
        let (log_eg, elog, ef) = endpoint_terms(&g, 128).unwrap();
        let (a0, e0) = flow_value(&g, 0.0, 128).unwrap();
        let (a1, e1) = flow_value(&g, 1.0, 128).unwrap();
        assert!((a0 - log_eg).abs() <= e0 + 1e-13);
        assert!((a1 - (elog + ef)).abs() <= e1 + 1e-13);
        assert!(a1 >= a0);
    }

    #[test]
    fn constant_g_gives_flat_flow() {
        let g = PositiveFunction::direct(TestFunction::constant(3.0).unwrap()).unwrap();
        let (trace, r) = check_flow_monotone(&g, 5, 32, 1e-9).unwrap();
        assert!(r.passed);
        for v in trace.values {
            assert!((v - 3f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn direct_requires_positivity() {
        let f = TestFunction::trig_poly(0.0, &[1.0], &[0.0]).unwrap();
        assert!(matches!(PositiveFunction::direct(f), Err(Error::Domain { .. })));
    }

    #[test]
    fn trace_export_rows() {
        let g = PositiveFunction::exp_of(TestFunction::random_trig_poly(2)).unwrap();
        let (trace, _) = check_flow_monotone(&g, 3, 16, 1e-9).unwrap();
        let text = trace.to_text();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().nth(1).unwrap().split('\t').count(), 3);
    }
}
