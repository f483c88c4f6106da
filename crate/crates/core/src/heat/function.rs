//! Smooth test functions with analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// 1-D: `c + sum_j a_j sin(jx) + b_j cos(jx)`, params `[c, a_1, b_1, ..]`, `j <= 5`.
    TrigPoly,
    /// n-D: `A prod_i sin(m_i x_i + phase_i)`, params `[A, m.., phase..]`.
    TrigProduct,
    /// n-D: `A exp(-|x - m|^2 / (2 w^2))`, params `[A, w, m..]`.
    GaussianBump,
    /// n-D: `c + a . x`, params `[c, a..]`.
    Affine,
    /// 1-D: `f(0) = 0`, `f'(x) = x chi_R(|x|)`, params `[R]`.
    ClippedQuadratic,
    /// 1-D: cubic Hermite through tabulated values and slopes, constant
    /// outside the table.
    CustomTable,
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    x: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    family: Family,
    dimension: usize,
    params: Vec<f64>,
    table: Option<Table>,
}

pub const MAX_TRIG_DEGREE: usize = 5;

/// Quintic smoothstep `6z^5 - 15z^4 + 10z^3`, C2 at both ends.
fn smoothstep(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    z * z * z * (z * (6.0 * z - 15.0) + 10.0)
}

/// The cutoff: 1 on `[0, R]`, 0 beyond `R + 1`, `1 - smoothstep(u - R)` between.
pub fn cutoff(r: f64, u: f64) -> f64 {
    1.0 - smoothstep(u - r)
}

/// `int_0^w (R + z)(1 - smoothstep(z)) dz` for `0 <= w <= 1`.
fn ramp_integral(r: f64, w: f64) -> f64 {
    let w2 = w * w;
    let w4 = w2 * w2;
    r * w - 2.5 * r * w4 + 3.0 * r * w4 * w - r * w4 * w2 + 0.5 * w2 - 2.0 * w4 * w
        + 2.5 * w4 * w2
        - 6.0 / 7.0 * w4 * w2 * w
}

impl TestFunction {
    fn build(family: Family, dimension: usize, params: Vec<f64>, table: Option<Table>) -> Result<Self> {
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("test function parameters must be finite".into()));
        }
        let f = Self { family, dimension, params, table };
        f.validate_gradient()?;
        Ok(f)
    }

    pub fn trig_poly(constant: f64, sin: &[f64], cos: &[f64]) -> Result<Self> {
        if sin.len() != cos.len() || sin.len() > MAX_TRIG_DEGREE {
            return Err(Error::Config(format!(
                "trig_poly needs equal sin/cos lists of length <= {MAX_TRIG_DEGREE}"
            )));
        }
        let mut p = vec![constant];
        for (a, b) in sin.iter().zip(cos) {
            p.push(*a);
            p.push(*b);
        }
        Self::build(Family::TrigPoly, 1, p, None)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::trig_poly(c, &[], &[])
    }

    /// A random trig polynomial of degree 1..=5 whose derivative is bounded
    /// by a random `L` in `[0.5, 4]`.
    pub fn random_trig_poly(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let degree = rng.random_range(1..=MAX_TRIG_DEGREE);
        let mut sin: Vec<f64> = (0..degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut cos: Vec<f64> = (0..degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lip: f64 = sin
            .iter()
            .zip(&cos)
            .enumerate()
            .map(|(j, (a, b))| (j + 1) as f64 * (a.abs() + b.abs()))
            .sum();
        let target = rng.random_range(0.5..4.0);
        for v in sin.iter_mut().chain(cos.iter_mut()) {
            *v *= target / lip;
        }
        let c = rng.random_range(-1.0..1.0);
        Self::trig_poly(c, &sin, &cos).expect("generated coefficients are valid")
    }

    pub fn trig_product(amplitude: f64, freq: &[f64], phase: &[f64]) -> Result<Self> {
        if freq.is_empty() || freq.len() != phase.len() {
            return Err(Error::Config("trig_product needs matching frequency and phase lists".into()));
        }
        let mut p = vec![amplitude];
        p.extend_from_slice(freq);
        p.extend_from_slice(phase);
        Self::build(Family::TrigProduct, freq.len(), p, None)
    }

    pub fn gaussian_bump(amplitude: f64, width: f64, center: &[f64]) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Config("gaussian_bump needs a center".into()));
        }
        if !(width > 0.0) {
            return Err(Error::Domain { func: "gaussian_bump", value: width, reason: "width must be positive" });
        }
        let mut p = vec![amplitude, width];
        p.extend_from_slice(center);
        Self::build(Family::GaussianBump, center.len(), p, None)
    }

    pub fn affine(constant: f64, slope: &[f64]) -> Result<Self> {
        if slope.is_empty() {
            return Err(Error::Config("affine needs at least one slope".into()));
        }
        let mut p = vec![constant];
        p.extend_from_slice(slope);
        Self::build(Family::Affine, slope.len(), p, None)
    }

    pub fn clipped_quadratic(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain { func: "clipped_quadratic", value: radius, reason: "radius must be positive" });
        }
        Self::build(Family::ClippedQuadratic, 1, vec![radius], None)
    }

    /// Cubic Hermite interpolant through `(x_i, f_i, f'_i)`. End slopes must
    /// be zero so the constant extension stays C1.
    pub fn custom_table(x: Vec<f64>, f: Vec<f64>, df: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != f.len() || x.len() != df.len() {
            return Err(Error::Config("custom table needs >= 2 rows of equal length".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("custom table abscissae must be strictly increasing".into()));
        }
        if df[0] != 0.0 || df[df.len() - 1] != 0.0 {
            return Err(Error::Config("custom table end slopes must be zero".into()));
        }
        if x.iter().chain(&f).chain(&df).any(|v| !v.is_finite()) {
            return Err(Error::Config("custom table entries must be finite".into()));
        }
        Self::build(Family::CustomTable, 1, Vec::new(), Some(Table { x, f, df }))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn gradient_available(&self) -> bool {
        true
    }

    /// A certified lower bound, when one is cheap to state.
    pub fn lower_bound(&self) -> Option<f64> {
        let p = &self.params;
        match self.family {
            Family::TrigPoly => Some(p[0] - p[1..].iter().map(|v| v.abs()).sum::<f64>()),
            Family::TrigProduct => Some(-p[0].abs()),
            Family::GaussianBump => Some(p[0].min(0.0)),
            Family::Affine => p[1..].iter().all(|&a| a == 0.0).then_some(p[0]),
            Family::ClippedQuadratic => Some(0.0),
            Family::CustomTable => {
                let t = self.table.as_ref().expect("table");
                // Hermite cubic on a cell stays above min(f) - max|f'| h / 4
                let slack = t
                    .x
                    .windows(2)
                    .zip(t.df.windows(2))
                    .map(|(x, d)| 0.25 * (x[1] - x[0]) * d[0].abs().max(d[1].abs()))
                    .fold(0.0, f64::max);
                Some(t.f.iter().copied().fold(f64::INFINITY, f64::min) - slack)
            }
        }
    }

    /// Upper bound on `|grad f|` when the family admits one.
    pub fn gradient_bound(&self) -> Option<f64> {
        let p = &self.params;
        match self.family {
            Family::TrigPoly => Some(
                p[1..]
                    .chunks(2)
                    .enumerate()
                    .map(|(j, ab)| (j + 1) as f64 * (ab[0].abs() + ab[1].abs()))
                    .sum(),
            ),
            Family::TrigProduct => {
                let n = self.dimension;
                Some(p[0].abs() * p[1..=n].iter().map(|m| m * m).sum::<f64>().sqrt())
            }
            Family::GaussianBump => Some(p[0].abs() / p[1] * (-0.5f64).exp()),
            Family::Affine => Some(p[1..].iter().map(|a| a * a).sum::<f64>().sqrt()),
            Family::ClippedQuadratic => Some(p[0] + 1.0),
            Family::CustomTable => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        let p = &self.params;
        match self.family {
            Family::TrigPoly => self.value_1d(x[0]),
            Family::TrigProduct => {
                let n = self.dimension;
                p[0] * (0..n).map(|i| (p[1 + i] * x[i] + p[1 + n + i]).sin()).product::<f64>()
            }
            Family::GaussianBump => {
                let r2: f64 = x.iter().zip(&p[2..]).map(|(a, m)| (a - m) * (a - m)).sum();
                p[0] * (-0.5 * r2 / (p[1] * p[1])).exp()
            }
            Family::Affine => p[0] + x.iter().zip(&p[1..]).map(|(a, b)| a * b).sum::<f64>(),
            Family::ClippedQuadratic | Family::CustomTable => self.value_1d(x[0]),
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dimension);
        let p = &self.params;
        match self.family {
            Family::TrigProduct => {
                let n = self.dimension;
                let s: Vec<f64> = (0..n).map(|i| (p[1 + i] * x[i] + p[1 + n + i]).sin()).collect();
                for i in 0..n {
                    let others: f64 = (0..n).filter(|&j| j != i).map(|j| s[j]).product();
                    out[i] = p[0] * others * p[1 + i] * (p[1 + i] * x[i] + p[1 + n + i]).cos();
                }
            }
            Family::GaussianBump => {
                let v = self.eval(x);
                let w2 = p[1] * p[1];
                for i in 0..self.dimension {
                    out[i] = -v * (x[i] - p[2 + i]) / w2;
                }
            }
            Family::Affine => out.copy_from_slice(&p[1..]),
            Family::TrigPoly | Family::ClippedQuadratic | Family::CustomTable => {
                out[0] = self.deriv_1d(x[0]);
            }
        }
    }

    pub fn gradient_norm(&self, x: &[f64]) -> f64 {
        if self.dimension == 1 {
            return self.deriv_1d(x[0]).abs();
        }
        let mut g = vec![0.0; self.dimension];
        self.gradient(x, &mut g);
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Value of a 1-D function.
    pub fn value_1d(&self, x: f64) -> f64 {
        let p = &self.params;
        match self.family {
            Family::TrigPoly => {
                let mut v = p[0];
                for (j, ab) in p[1..].chunks(2).enumerate() {
                    let (s, c) = ((j + 1) as f64 * x).sin_cos();
                    v += ab[0] * s + ab[1] * c;
                }
                v
            }
            Family::ClippedQuadratic => {
                let r = p[0];
                let u = x.abs();
                if u <= r {
                    0.5 * u * u
                } else {
                    0.5 * r * r + ramp_integral(r, (u - r).min(1.0))
                }
            }
            Family::CustomTable => {
                let t = self.table.as_ref().expect("table");
                let n = t.x.len();
                if x <= t.x[0] {
                    return t.f[0];
                }
                if x >= t.x[n - 1] {
                    return t.f[n - 1];
                }
                let i = t.x.partition_point(|&g| g <= x) - 1;
                let h = t.x[i + 1] - t.x[i];
                let u = (x - t.x[i]) / h;
                let (h00, h10, h01, h11) = (
                    (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
                    u * (1.0 - u) * (1.0 - u),
                    u * u * (3.0 - 2.0 * u),
                    u * u * (u - 1.0),
                );
                h00 * t.f[i] + h10 * h * t.df[i] + h01 * t.f[i + 1] + h11 * h * t.df[i + 1]
            }
            _ => self.eval(&[x]),
        }
    }

    /// Derivative of a 1-D function.
    pub fn deriv_1d(&self, x: f64) -> f64 {
        let p = &self.params;
        match self.family {
            Family::TrigPoly => {
                let mut v = 0.0;
                for (j, ab) in p[1..].chunks(2).enumerate() {
                    let k = (j + 1) as f64;
                    let (s, c) = (k * x).sin_cos();
                    v += k * (ab[0] * c - ab[1] * s);
                }
                v
            }
            Family::ClippedQuadratic => x * cutoff(p[0], x.abs()),
            Family::CustomTable => {
                let t = self.table.as_ref().expect("table");
                let n = t.x.len();
                if x <= t.x[0] || x >= t.x[n - 1] {
                    return 0.0;
                }
                let i = t.x.partition_point(|&g| g <= x) - 1;
                let h = t.x[i + 1] - t.x[i];
                let u = (x - t.x[i]) / h;
                let (d00, d10, d01, d11) = (
                    6.0 * u * (u - 1.0),
                    (1.0 - u) * (1.0 - 3.0 * u),
                    6.0 * u * (1.0 - u),
                    u * (3.0 * u - 2.0),
                );
                (d00 * t.f[i] + d01 * t.f[i + 1]) / h + d10 * t.df[i] + d11 * t.df[i + 1]
            }
            _ => {
                let mut g = [0.0];
                self.gradient(&[x], &mut g);
                g[0]
            }
        }
    }

    fn probe_box(&self) -> (f64, f64) {
        match self.family {
            Family::ClippedQuadratic => (-(self.params[0] + 2.0), self.params[0] + 2.0),
            Family::CustomTable => {
                let t = self.table.as_ref().expect("table");
                (t.x[0] - 1.0, t.x[t.x.len() - 1] + 1.0)
            }
            _ => (-6.0, 6.0),
        }
    }

    /// Compare the coded gradient with central differences at 100 fixed
    /// pseudo-random points.
    fn validate_gradient(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a09_e667);
        let (lo, hi) = self.probe_box();
        let n = self.dimension;
        let mut x = vec![0.0; n];
        let mut g = vec![0.0; n];
        for _ in 0..100 {
            for v in x.iter_mut() {
                *v = rng.random_range(lo..hi);
            }
            self.gradient(&x, &mut g);
            for i in 0..n {
                let h = 6.055_454_452_393_343e-6 * x[i].abs().max(1.0); // eps^(1/3)
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (self.eval(&xp) - self.eval(&xm)) / (xp[i] - xm[i]);
                let scale = g[i].abs().max(1.0) * self.eval(&x).abs().max(1.0);
                if (fd - g[i]).abs() > 1e-6 * scale {
                    return Err(Error::Config(format!(
                        "{:?} gradient mismatch at {:?}: coded {}, finite difference {}",
                        self.family, x, g[i], fd
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_construct() {
        TestFunction::trig_poly(0.1, &[0.5, -0.2], &[0.3, 0.1]).unwrap();
        TestFunction::trig_product(0.5, &[1.0, 1.0], &[0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        TestFunction::gaussian_bump(1.0, 0.7, &[0.1, -0.2, 0.3]).unwrap();
        TestFunction::affine(0.0, &[1.5]).unwrap();
        TestFunction::clipped_quadratic(3.0).unwrap();
        TestFunction::custom_table(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]).unwrap();
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(TestFunction::trig_poly(0.0, &[1.0; 6], &[1.0; 6]).is_err());
        assert!(TestFunction::gaussian_bump(1.0, 0.0, &[0.0]).is_err());
        assert!(TestFunction::clipped_quadratic(-1.0).is_err());
        assert!(TestFunction::custom_table(vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(TestFunction::custom_table(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn clipped_quadratic_is_c2_and_flat_outside() {
        let f = TestFunction::clipped_quadratic(2.0).unwrap();
        assert_eq!(f.value_1d(1.5), 1.125);
        assert_eq!(f.deriv_1d(3.5), 0.0);
        assert_eq!(f.value_1d(3.0), f.value_1d(7.0));
        let h = 1e-6;
        for x in [2.0, 3.0] {
            let left = (f.deriv_1d(x) - f.deriv_1d(x - h)) / h;
            let right = (f.deriv_1d(x + h) - f.deriv_1d(x)) / h;
            assert!((left - right).abs() < 1e-4, "x={x}");
        }
        // value matches integral of the derivative
        let n = 20000;
        let integral: f64 = (0..n)
            .map(|i| {
                let u = 3.0 * (i as f64 + 0.5) / n as f64;
                f.deriv_1d(u) * 3.0 / n as f64
            })
            .sum();
        assert!((integral - f.value_1d(3.0)).abs() < 1e-7);
    }

    #[test]
    fn random_trig_poly_respects_gradient_bound() {
        for seed in 0..50 {
            let f = TestFunction::random_trig_poly(seed);
            let l = f.gradient_bound().unwrap();
            assert!((0.5 - 1e-12..=4.0 + 1e-12).contains(&l));
            for i in 0..200 {
                let x = -10.0 + 0.1 * i as f64;
                assert!(f.deriv_1d(x).abs() <= l + 1e-12);
            }
        }
    }

    #[test]
    fn lower_bounds_hold() {
        let f = TestFunction::trig_poly(3.0, &[1.0], &[0.5]).unwrap();
        let lb = f.lower_bound().unwrap();
        assert!((0..100).all(|i| f.value_1d(i as f64 * 0.1) >= lb));
        let t = TestFunction::custom_table(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 1.0], vec![0.0, 0.0, 0.0]).unwrap();
        let lb = t.lower_bound().unwrap();
        assert!((0..200).all(|i| t.value_1d(-1.0 + 0.02 * i as f64) >= lb));
    }
}
