use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const MAX_DEPTH: usize = 16;
/// Largest `|d_n| / xi_{n-1}` drawn by the bounded-ratio law.
pub const BOUNDED_RATIO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    /// Leaves `exp(Z)`, `Z` standard normal.
    LognormalLeaves,
    /// Top-down splitting `p -> p (1 -+ r)` with `r` uniform in `[-0.9, 0.9]`.
    BoundedRatio,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::LognormalLeaves => "lognormal_leaves",
            Law::BoundedRatio => "bounded_ratio",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lognormal_leaves" | "lognormal" => Ok(Law::LognormalLeaves),
            "bounded_ratio" | "bounded" => Ok(Law::BoundedRatio),
            _ => Err(Error::Parse(format!("unknown martingale law '{s}'"))),
        }
    }
}

/// A simple dyadic martingale stored as its full tree of atom values.
/// `levels[n]` holds the `2^n` values of `xi_n`; each parent is computed as
/// `0.5 * (left + right)` so the averaging holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicMartingale {
    levels: Vec<Vec<f64>>,
}

impl DyadicMartingale {
    pub fn from_leaves(leaves: Vec<f64>) -> Result<Self> {
        let n = leaves.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Config(format!("leaf count {n} is not a power of two")));
        }
        let depth = n.trailing_zeros() as usize;
        if depth > MAX_DEPTH {
            return Err(Error::Resource(format!("depth {depth} exceeds the cap of {MAX_DEPTH}")));
        }
        if let Some(&v) = leaves.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain { func: "DyadicMartingale", value: v, reason: "leaf values must be positive" });
        }
        let mut levels = vec![leaves];
        while levels[0].len() > 1 {
            let up = levels[0].chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
            levels.insert(0, up);
        }
        Ok(Self { levels })
    }

    pub fn constant(value: f64, depth: usize) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::Resource(format!("depth {depth} exceeds the cap of {MAX_DEPTH}")));
        }
        Self::from_leaves(vec![value; 1 << depth])
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn leaves(&self) -> &[f64] {
        &self.levels[self.depth()]
    }

    pub fn root(&self) -> f64 {
        self.levels[0][0]
    }

    /// Half-gap `A` of node `i` on level `n < depth`: its children are
    /// `value -+ A` up to the rounding of the stored average.
    pub fn half_gap(&self, n: usize, i: usize) -> f64 {
        let c = &self.levels[n + 1];
        0.5 * (c[2 * i + 1] - c[2 * i])
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_leaves(self.leaves().iter().map(|v| v * lambda).collect())
    }

    /// `depth` on the first line, then one leaf per line at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("depth {}\n", self.depth());
        for v in self.leaves() {
            let _ = writeln!(out, "{v:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| Error::Parse("empty martingale text".into()))?;
        let depth: usize = head
            .strip_prefix("depth")
            .map(str::trim)
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected 'depth N', got '{head}'")))?;
        if depth > MAX_DEPTH {
            return Err(Error::Resource(format!("depth {depth} exceeds the cap of {MAX_DEPTH}")));
        }
        let leaves = lines
            .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("bad leaf '{l}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if leaves.len() != 1 << depth {
            return Err(Error::Parse(format!("depth {depth} needs {} leaves, got {}", 1 << depth, leaves.len())));
        }
        Self::from_leaves(leaves)
    }
}

pub fn random_martingale(depth: usize, seed: u64, law: Law) -> Result<DyadicMartingale> {
    if depth > MAX_DEPTH {
        return Err(Error::Resource(format!("depth {depth} exceeds the cap of {MAX_DEPTH}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = match law {
        Law::LognormalLeaves => (0..1usize << depth)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z.exp()
            })
            .collect(),
        Law::BoundedRatio => {
            let mut level = vec![1.0];
            for _ in 0..depth {
                level = level
                    .iter()
                    .flat_map(|&p| {
                        let r = rng.random_range(-BOUNDED_RATIO..=BOUNDED_RATIO);
                        [p * (1.0 - r), p * (1.0 + r)]
                    })
                    .collect();
            }
            level
        }
    };
    DyadicMartingale::from_leaves(leaves)
}

/// `[xi]_n` on every node: the sum of squared increments `d_k^2`,
/// `k = 1..n`, along the path from the root. `d_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticVariationField {
    levels: Vec<Vec<f64>>,
}

impl QuadraticVariationField {
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn leaves(&self) -> &[f64] {
        &self.levels[self.levels.len() - 1]
    }
}

pub fn quadratic_variation(m: &DyadicMartingale) -> QuadraticVariationField {
    let mut levels = vec![vec![0.0]];
    for n in 0..m.depth() {
        let next = levels[n]
            .iter()
            .enumerate()
            .flat_map(|(i, &q)| {
                let a = m.half_gap(n, i);
                let v = q + a * a;
                [v, v]
            })
            .collect();
        levels.push(next);
    }
    QuadraticVariationField { levels }
}

/// One line of a batch manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MartingaleSpec {
    pub depth: usize,
    pub seed: u64,
    pub law: Law,
}

impl MartingaleSpec {
    pub fn build(&self) -> Result<DyadicMartingale> {
        random_martingale(self.depth, self.seed, self.law)
    }
}

/// Whitespace- or comma-separated `depth seed law` triples, `#` comments.
pub fn parse_manifest(text: &str) -> Result<Vec<MartingaleSpec>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let bad = || Error::Parse(format!("manifest line {}: expected 'depth seed law', got '{raw}'", k + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        let depth: usize = fields[0].parse().map_err(|_| bad())?;
        let seed: u64 = fields[1].parse().map_err(|_| bad())?;
        let law: Law = fields[2].parse()?;
        if depth > MAX_DEPTH {
            return Err(Error::Resource(format!("manifest line {}: depth {depth} exceeds {MAX_DEPTH}", k + 1)));
        }
        out.push(MartingaleSpec { depth, seed, law });
    }
    Ok(out)
}

/// `count` specs cycling through depths `0..=max_depth` and both laws;
/// tree `i` uses seed `seed + i` so witnesses stay exact as floats.
pub fn random_batch(count: usize, max_depth: usize, seed: u64) -> Vec<MartingaleSpec> {
    (0..count)
        .map(|i| MartingaleSpec {
            depth: i % (max_depth + 1),
            seed: seed.wrapping_add(i as u64),
            law: if (i / (max_depth + 1)).is_multiple_of(2) { Law::LognormalLeaves } else { Law::BoundedRatio },
        })
        .collect()
}
