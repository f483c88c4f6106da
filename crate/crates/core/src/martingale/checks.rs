use std::time::Instant;

use rayon::prelude::*;

use super::tree::{quadratic_variation, DyadicMartingale, MartingaleSpec};
use crate::error::Result;
use crate::special::functions::g_eval_unchecked;
use crate::verify::{four_point_margin, BellmanFunction, Tolerances, VerificationReport};

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

/// Expectations over leaves that every log-form check needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafTerms {
    /// `log E xi - E log xi`
    pub lhs: f64,
    /// `E G(xi / sqrt [xi])`, `G(inf) = 0`
    pub g_term: f64,
    /// `E log(1 + [xi] / xi^2)`
    pub log_term: f64,
}

pub fn leaf_terms(m: &DyadicMartingale) -> LeafTerms {
    let q = quadratic_variation(m);
    let leaves = m.leaves();
    let n = leaves.len();
    let root = m.root();
    // relative to the root so the value does not drift under rescaling
    let lhs = -mean(leaves.iter().map(|v| (v / root).ln()), n);
    let g_term = mean(
        leaves.iter().zip(q.leaves()).map(|(&v, &qv)| if qv == 0.0 { 0.0 } else { g_eval_unchecked(v / qv.sqrt()) }),
        n,
    );
    let log_term = mean(leaves.iter().zip(q.leaves()).map(|(&v, &qv)| (qv / (v * v)).ln_1p()), n);
    LeafTerms { lhs, g_term, log_term }
}

pub fn check_g_bound(m: &DyadicMartingale, tol: f64) -> VerificationReport {
    let start = Instant::now();
    let t = leaf_terms(m);
    let mut r = VerificationReport::new("martingale_g_bound", tol).with_domain(format!("depth {}", m.depth()));
    r.observe(t.g_term - t.lhs, &[m.depth() as f64]);
    r.samples = m.leaves().len() as u64;
    r.metric("lhs", t.lhs);
    r.metric("rhs", t.g_term);
    r.finish(start.elapsed())
}

/// Both the factor-1 and the factor-1/2 log bounds; the margin is the
/// smaller of the two.
pub fn check_log_bounds(m: &DyadicMartingale, tol: f64) -> VerificationReport {
    let start = Instant::now();
    let t = leaf_terms(m);
    let mut r = VerificationReport::new("martingale_log_bounds", tol).with_domain(format!("depth {}", m.depth()));
    r.observe(t.log_term - t.lhs, &[1.0]);
    r.observe(0.5 * t.log_term - t.lhs, &[0.5]);
    r.samples = m.leaves().len() as u64;
    r.metric("lhs", t.lhs);
    r.metric("rhs_factor_one", t.log_term);
    r.metric("rhs_factor_half", 0.5 * t.log_term);
    r.note("witness is the factor of the binding bound");
    r.finish(start.elapsed())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductionMargins {
    /// Smallest `B(p+a, t+a^2) + B(p-a, t+a^2) - 2 B(p, t)` over internal nodes.
    pub step: f64,
    /// `(level, index)` of that node.
    pub step_node: (usize, usize),
    /// Smallest `E B(xi_n, [xi]_n) - E B(xi_{n-1}, [xi]_{n-1})`.
    pub chain: f64,
    pub chain_level: usize,
    pub internal_nodes: u64,
    /// `E B(xi_N, [xi]_N) - log E xi`: the telescoped total.
    pub total: f64,
}

pub fn induction_margins(m: &DyadicMartingale, which: BellmanFunction) -> InductionMargins {
    let q = quadratic_variation(m);
    let mut out = InductionMargins {
        step: f64::INFINITY,
        step_node: (0, 0),
        chain: f64::INFINITY,
        chain_level: 0,
        internal_nodes: 0,
        total: 0.0,
    };
    let level_mean = |n: usize| {
        let v = m.level(n);
        mean(v.iter().zip(q.level(n)).map(|(&p, &t)| which.eval(p, t)), v.len())
    };
    let mut prev = level_mean(0);
    let start = prev;
    for n in 0..m.depth() {
        for (i, (&p, &t)) in m.level(n).iter().zip(q.level(n)).enumerate() {
            let margin = four_point_margin(which, p, m.half_gap(n, i).abs(), t);
            let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            out.internal_nodes += 1;
            if margin < out.step {
                out.step = margin;
                out.step_node = (n, i);
            }
        }
        let next = level_mean(n + 1);
        if next - prev < out.chain {
            out.chain = next - prev;
            out.chain_level = n + 1;
        }
        prev = next;
    }
    out.total = prev - start;
    out
}

/// Per-node step inequality and monotonicity of the chain
/// `n -> E B(xi_n, [xi]_n)` starting from `B(xi_0, 0) = log E xi`.
pub fn bellman_induction_check(m: &DyadicMartingale, which: BellmanFunction, tol: f64) -> Vec<VerificationReport> {
    let start = Instant::now();
    let im = induction_margins(m, which);
    let domain = format!("depth {}", m.depth());
    let mut step = VerificationReport::new(format!("bellman_step_{}", which.name()), tol).with_domain(domain.clone());
    let mut chain = VerificationReport::new(format!("bellman_chain_{}", which.name()), tol).with_domain(domain);
    if m.depth() == 0 {
        step.note("no internal nodes");
        chain.note("no internal nodes");
    } else {
        let (n, i) = im.step_node;
        step.observe(im.step, &[n as f64, i as f64]);
        step.samples = im.internal_nodes;
        chain.observe(im.chain, &[im.chain_level as f64]);
        chain.samples = m.depth() as u64;
        chain.metric("telescoped_total", im.total);
    }
    let e = start.elapsed();
    vec![step.finish(e), chain.finish(e)]
}

#[derive(Debug, Clone, Copy)]
struct BatchRow {
    g_bound: f64,
    log_one: f64,
    log_half: f64,
    steps: [InductionMargins; 2],
}

/// Runs every martingale check over a batch and folds the results into one
/// report per check; witnesses are `(batch index, depth, seed)`.
pub fn run_batch(specs: &[MartingaleSpec], tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    let rows = specs
        .par_iter()
        .map(|s| {
            let m = s.build()?;
            let t = leaf_terms(&m);
            Ok(BatchRow {
                g_bound: t.g_term - t.lhs,
                log_one: t.log_term - t.lhs,
                log_half: 0.5 * t.log_term - t.lhs,
                steps: [induction_margins(&m, BellmanFunction::N), induction_margins(&m, BellmanFunction::NSup)],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_depth = specs.iter().map(|s| s.depth).max().unwrap_or(0);
    let domain = format!("{} dyadic martingales, depth <= {max_depth}", specs.len());
    let mtol = tol.get("martingale");
    let stol = tol.get("bellman_step");
    let mk = |name: String, t: f64| VerificationReport::new(name, t).with_domain(domain.clone());
    let mut g_bound = mk("martingale_g_bound".into(), mtol);
    let mut log_one = mk("martingale_log_bound_one".into(), mtol);
    let mut log_half = mk("martingale_log_bound_half".into(), mtol);
    let mut tighter = 0u64;
    let mut ind: Vec<[VerificationReport; 2]> = [BellmanFunction::N, BellmanFunction::NSup]
        .iter()
        .map(|w| [mk(format!("bellman_step_{}", w.name()), stol), mk(format!("bellman_chain_{}", w.name()), stol)])
        .collect();
    let mut nodes = [0u64; 2];
    for (k, (s, row)) in specs.iter().zip(&rows).enumerate() {
        let w = [k as f64, s.depth as f64, s.seed as f64];
        g_bound.observe(row.g_bound, &w);
        log_one.observe(row.log_one, &w);
        log_half.observe(row.log_half, &w);
        if row.log_half < row.log_one {
            tighter += 1;
        }
        if s.depth > 0 {
            for (j, im) in row.steps.iter().enumerate() {
                ind[j][0].observe(im.step, &w);
                ind[j][1].observe(im.chain, &w);
                nodes[j] += im.internal_nodes;
            }
        }
    }
    log_half.metric("trees_where_half_is_tighter", tighter as f64);
    let e = start.elapsed();
    let mut out = vec![g_bound.finish(e), log_one.finish(e), log_half.finish(e)];
    for (j, [mut step, chain]) in ind.into_iter().enumerate() {
        step.metric("internal_nodes", nodes[j] as f64);
        out.push(step.finish(e));
        out.push(chain.finish(e));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::tree::{random_batch, random_martingale, Law};
    use crate::special::g_eval;

    #[test]
    fn constant_martingale_is_equality() {
        let m = DyadicMartingale::constant(3.0, 5).unwrap();
        let t = leaf_terms(&m);
        assert_eq!((t.lhs, t.g_term, t.log_term), (0.0, 0.0, 0.0));
        assert!(check_g_bound(&m, 1e-9).passed);
        assert!(check_log_bounds(&m, 1e-9).passed);
        for w in [BellmanFunction::N, BellmanFunction::NSup] {
            let im = induction_margins(&m, w);
            assert_eq!(im.step, 0.0);
            assert!(im.chain.abs() < 1e-15);
        }
    }

    #[test]
    fn two_leaf_example() {
        let h = 0.5;
        let m = DyadicMartingale::from_leaves(vec![1.0 + h, 1.0 - h]).unwrap();
        let t = leaf_terms(&m);
        assert!((t.lhs - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let g = 0.5 * (g_eval(3.0).unwrap() + g_eval(1.0).unwrap());
        assert!((t.g_term - g).abs() < 1e-15);
        assert!(t.g_term >= t.lhs);
        // [xi] = 1/4: log(1 + 1/9) and log(1 + 1) averaged
        let lt = 0.5 * ((10.0f64 / 9.0).ln() + 2.0f64.ln());
        assert!((t.log_term - lt).abs() < 1e-15);
        assert!(0.5 * t.log_term >= t.lhs);
    }

    #[test]
    fn node_step_is_four_point_inequality() {
        let m = random_martingale(1, 4, Law::LognormalLeaves).unwrap();
        let im = induction_margins(&m, BellmanFunction::N);
        let a = m.half_gap(0, 0).abs();
        assert_eq!(im.step, four_point_margin(BellmanFunction::N, m.root(), a, 0.0));
        // at depth one the chain step is half the node step
        assert!((im.chain - 0.5 * im.step).abs() < 1e-14);
    }

    #[test]
    fn deep_trees_hold() {
        for seed in 0..4 {
            for law in [Law::LognormalLeaves, Law::BoundedRatio] {
                let m = random_martingale(10, seed, law).unwrap();
                assert!(check_g_bound(&m, 1e-9).passed);
                assert!(check_log_bounds(&m, 1e-9).passed);
                for w in [BellmanFunction::N, BellmanFunction::NSup] {
                    assert!(bellman_induction_check(&m, w, 1e-9).iter().all(|r| r.passed));
                }
            }
        }
    }

    #[test]
    fn telescoped_total_matches_g_bound() {
        let m = random_martingale(7, 8, Law::BoundedRatio).unwrap();
        let t = leaf_terms(&m);
        let im = induction_margins(&m, BellmanFunction::N);
        assert!((im.total - (t.g_term - t.lhs)).abs() < 1e-12);
        let im = induction_margins(&m, BellmanFunction::NSup);
        assert!((im.total - (0.5 * t.log_term - t.lhs)).abs() < 1e-12);
    }

    #[test]
    fn batch_reports() {
        let specs = random_batch(200, 6, 3);
        let reps = run_batch(&specs, &Tolerances::default()).unwrap();
        assert_eq!(reps.len(), 7);
        assert!(reps.iter().all(|r| r.passed), "{:?}", reps.iter().map(|r| r.to_human()).collect::<Vec<_>>());
        assert_eq!(reps[0].samples, 200);
        assert_eq!(reps[2].get_metric("trees_where_half_is_tighter"), Some(specs.iter().filter(|s| s.depth > 0).count() as f64));
    }
}
