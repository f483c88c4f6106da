//! Sample spaces for scans and the deterministic parallel scan driver.
//!
//! Samples are processed in fixed chunks of `CHUNK` points. Random chunks
//! draw from a ChaCha stream selected by the chunk index, so the sample set
//! and the reduced result do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

const CHUNK: u64 = 4096;
const MAX_GRID_POINTS: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
    /// Random draws only: half uniform on `[lo, hi]`, half log-uniform on
    /// `[max(lo, hi * 1e-6), hi]`.
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub scale: Scale,
}

impl Axis {
    pub fn linear(name: &'static str, lo: f64, hi: f64) -> Self {
        Self { name, lo, hi, scale: Scale::Linear }
    }
    pub fn log(name: &'static str, lo: f64, hi: f64) -> Self {
        Self { name, lo, hi, scale: Scale::Log }
    }
    pub fn mixed(name: &'static str, lo: f64, hi: f64) -> Self {
        Self { name, lo, hi, scale: Scale::Mixed }
    }

    fn grid_point(&self, i: usize, n: usize) -> f64 {
        if n == 1 {
            return self.lo;
        }
        if i == n - 1 {
            return self.hi;
        }
        let f = i as f64 / (n - 1) as f64;
        match self.scale {
            Scale::Log => self.lo * (self.hi / self.lo).powf(f),
            _ => self.lo + (self.hi - self.lo) * f,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        let log = |lo: f64, hi: f64, u: f64| lo * (hi / lo).powf(u);
        let v = match self.scale {
            Scale::Linear => self.lo + (self.hi - self.lo) * u,
            Scale::Log => log(self.lo, self.hi, u),
            Scale::Mixed => {
                let pick: bool = rng.random();
                if pick {
                    self.lo + (self.hi - self.lo) * u
                } else {
                    log(self.lo.max(self.hi * 1e-6), self.hi, u)
                }
            }
        };
        v.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Tensor grid with the given number of points per axis.
    Grid(Vec<usize>),
    Random { count: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanDomain {
    pub axes: Vec<Axis>,
    pub sampling: Sampling,
    pub seed: u64,
}

impl ScanDomain {
    pub fn grid(axes: Vec<Axis>, per_axis: usize) -> Self {
        let n = axes.len();
        Self { axes, sampling: Sampling::Grid(vec![per_axis; n]), seed: 0 }
    }

    pub fn random(axes: Vec<Axis>, count: u64, seed: u64) -> Self {
        Self { axes, sampling: Sampling::Random { count }, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Config("scan domain has no axes".into()));
        }
        for a in &self.axes {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo <= a.hi) {
                return Err(Error::Config(format!(
                    "axis {} needs finite lo <= hi, got [{}, {}]",
                    a.name, a.lo, a.hi
                )));
            }
            if a.scale == Scale::Log && !(a.lo > 0.0) {
                return Err(Error::Config(format!("log axis {} needs lo > 0", a.name)));
            }
            if a.scale == Scale::Mixed && !(a.hi > 0.0) {
                return Err(Error::Config(format!("mixed axis {} needs hi > 0", a.name)));
            }
        }
        match &self.sampling {
            Sampling::Grid(n) => {
                if n.len() != self.axes.len() {
                    return Err(Error::Config("grid counts must match the axes".into()));
                }
                if n.contains(&0) {
                    return Err(Error::Config("empty scan domain".into()));
                }
                if self.axes.iter().any(|a| a.scale == Scale::Mixed) {
                    return Err(Error::Config("mixed scale is only for random sampling".into()));
                }
                let total = n.iter().try_fold(1u64, |acc, &k| acc.checked_mul(k as u64));
                if total.is_none_or(|t| t > MAX_GRID_POINTS) {
                    return Err(Error::Resource("grid too large".into()));
                }
            }
            Sampling::Random { count } => {
                if *count == 0 {
                    return Err(Error::Config("empty scan domain".into()));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        match &self.sampling {
            Sampling::Grid(n) => n.iter().map(|&k| k as u64).product(),
            Sampling::Random { count } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_random(&self) -> bool {
        matches!(self.sampling, Sampling::Random { .. })
    }

    /// Stable text description used in reports.
    pub fn describe(&self) -> String {
        let axes: Vec<String> = self
            .axes
            .iter()
            .map(|a| {
                let s = match a.scale {
                    Scale::Linear => "lin",
                    Scale::Log => "log",
                    Scale::Mixed => "mixed",
                };
                format!("{}:[{:e},{:e}] {s}", a.name, a.lo, a.hi)
            })
            .collect();
        let sampling = match &self.sampling {
            Sampling::Grid(n) => {
                let n: Vec<String> = n.iter().map(|k| k.to_string()).collect();
                format!("grid {}", n.join("x"))
            }
            Sampling::Random { count } => format!("random {count} seed {}", self.seed),
        };
        format!("{}; {sampling}", axes.join(", "))
    }

    fn fill_grid_point(&self, counts: &[usize], mut index: u64, out: &mut [f64]) {
        // the last axis varies fastest
        for d in (0..self.axes.len()).rev() {
            let n = counts[d] as u64;
            out[d] = self.axes[d].grid_point((index % n) as usize, counts[d]);
            index /= n;
        }
    }
}

/// Smallest value of one margin component and where it occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub index: u64,
    pub point: Vec<f64>,
}

impl Extremum {
    fn empty() -> Self {
        Self { value: f64::INFINITY, index: u64::MAX, point: Vec::new() }
    }

    fn offer(&mut self, value: f64, index: u64, point: &[f64]) {
        let v = if value.is_nan() { f64::NEG_INFINITY } else { value };
        if v < self.value || (v == self.value && index < self.index) {
            self.value = v;
            self.index = index;
            self.point.clear();
            self.point.extend_from_slice(point);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if other.value < self.value || (other.value == self.value && other.index < self.index) {
            self = other;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub evaluated: u64,
    pub excluded: u64,
    pub worst: Vec<Extremum>,
}

/// Evaluate `eval` at every point of `domain` and keep, per component, the
/// minimum and its first witness. `None` marks an excluded point.
pub fn scan<const K: usize, F>(domain: &ScanDomain, eval: F) -> Result<ScanResult>
where
    F: Fn(&[f64]) -> Option<[f64; K]> + Sync,
{
    domain.validate()?;
    let total = domain.len();
    let chunks = total.div_ceil(CHUNK);
    let dim = domain.axes.len();
    let empty = || ScanResult {
        evaluated: 0,
        excluded: 0,
        worst: (0..K).map(|_| Extremum::empty()).collect(),
    };
    let result = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = empty();
            let mut point = vec![0.0; dim];
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut rng = ChaCha8Rng::seed_from_u64(domain.seed);
            rng.set_stream(c);
            for i in start..end {
                match &domain.sampling {
                    Sampling::Grid(n) => domain.fill_grid_point(n, i, &mut point),
                    Sampling::Random { .. } => {
                        for (d, a) in domain.axes.iter().enumerate() {
                            point[d] = a.draw(&mut rng);
                        }
                    }
                }
                match eval(&point) {
                    Some(m) => {
                        acc.evaluated += 1;
                        for (e, v) in acc.worst.iter_mut().zip(m) {
                            e.offer(v, i, &point);
                        }
                    }
                    None => acc.excluded += 1,
                }
            }
            acc
        })
        .reduce(empty, |a, b| ScanResult {
            evaluated: a.evaluated + b.evaluated,
            excluded: a.excluded + b.excluded,
            worst: a.worst.into_iter().zip(b.worst).map(|(x, y)| x.merge(y)).collect(),
        });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_corners() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.0, 1.0), Axis::log("y", 1e-2, 1e2)], 3);
        let r = scan::<2, _>(&d, |p| Some([p[0], -p[1]])).unwrap();
        assert_eq!(r.evaluated, 9);
        assert_eq!(r.worst[0].value, 0.0);
        assert_eq!(r.worst[0].index, 0);
        assert_eq!(r.worst[1].point, vec![0.0, 1e2]);
    }

    #[test]
    fn middle_log_point_is_geometric_mean() {
        let a = Axis::log("y", 1e-2, 1e2);
        assert!((a.grid_point(1, 3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_scan_is_thread_count_independent() {
        let d = ScanDomain::random(
            vec![Axis::mixed("x", 0.0, 10.0), Axis::linear("y", -1.0, 1.0)],
            20_000,
            42,
        );
        let f = |p: &[f64]| Some([(p[0] * 3.0).sin() * p[1]]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| scan::<1, _>(&d, f).unwrap());
        let b = four.install(|| scan::<1, _>(&d, f).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn exclusions_are_counted() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.0, 1.0)], 10);
        let r = scan::<1, _>(&d, |p| (p[0] > 0.5).then_some([p[0]])).unwrap();
        assert_eq!(r.evaluated + r.excluded, 10);
        assert_eq!(r.excluded, 5);
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(ScanDomain::grid(vec![], 3).validate().is_err());
        assert!(ScanDomain::grid(vec![Axis::linear("x", 1.0, 0.0)], 3).validate().is_err());
        assert!(ScanDomain::grid(vec![Axis::log("x", 0.0, 1.0)], 3).validate().is_err());
        assert!(ScanDomain::grid(vec![Axis::linear("x", 0.0, 1.0)], 0).validate().is_err());
        assert!(ScanDomain::random(vec![Axis::linear("x", 0.0, 1.0)], 0, 1).validate().is_err());
    }

    #[test]
    fn nan_is_reported_as_worst() {
        let d = ScanDomain::grid(vec![Axis::linear("x", 0.0, 1.0)], 5);
        let r = scan::<1, _>(&d, |p| Some([if p[0] == 0.5 { f64::NAN } else { 1.0 }])).unwrap();
        assert_eq!(r.worst[0].value, f64::NEG_INFINITY);
        assert_eq!(r.worst[0].point, vec![0.5]);
    }
}
