//! Quintic Hermite lookup tables with an a-posteriori error bound.
//!
//! Text format (one table per file):
//!
//! ```text
//! # expint-table v1 name=<name> domain=<lo>,<hi> max_abs_error=<e> rows=<n>
//! x<TAB>value<TAB>derivative
//! ...
//! ```
//!
//! Numbers are written with 17 significant digits. Second derivatives are not
//! stored; the owner of the table recomputes them from closed forms on import.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const FORMAT_TAG: &str = "expint-table v1";

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialFunctionTable {
    name: String,
    grid: Vec<f64>,
    values: Vec<f64>,
    derivative_values: Vec<f64>,
    second_derivative_values: Vec<f64>,
    max_abs_error: f64,
    domain: (f64, f64),
}

impl SpecialFunctionTable {
    pub fn new(
        name: impl Into<String>,
        grid: Vec<f64>,
        values: Vec<f64>,
        derivative_values: Vec<f64>,
        second_derivative_values: Vec<f64>,
        max_abs_error: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if n < 2 {
            return Err(Error::Config("table needs at least two abscissae".into()));
        }
        if values.len() != n || derivative_values.len() != n || second_derivative_values.len() != n {
            return Err(Error::Config("table columns differ in length".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("table grid must be strictly increasing".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&grid) || !finite(&values) || !finite(&derivative_values) || !finite(&second_derivative_values) {
            return Err(Error::Config("table entries must be finite".into()));
        }
        if !(max_abs_error > 0.0) {
            return Err(Error::Config("max_abs_error must be positive".into()));
        }
        let domain = (grid[0], grid[n - 1]);
        Ok(Self {
            name: name.into(),
            grid,
            values,
            derivative_values,
            second_derivative_values,
            max_abs_error,
            domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn derivative_values(&self) -> &[f64] {
        &self.derivative_values
    }
    pub fn max_abs_error(&self) -> f64 {
        self.max_abs_error
    }
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    fn locate(&self, x: f64) -> usize {
        let i = self.grid.partition_point(|&g| g <= x);
        i.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// Interpolated value; queries outside the domain are rejected.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Range {
                func: "table lookup",
                value: x,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(self.eval_in_domain(x))
    }

    pub(crate) fn eval_in_domain(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let u = (x - x0) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u3 * u;
        let u5 = u4 * u;
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        let h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h5 = 0.5 * (u3 - 2.0 * u4 + u5);
        h0 * self.values[i]
            + h3 * self.values[i + 1]
            + h * (h1 * self.derivative_values[i] + h4 * self.derivative_values[i + 1])
            + h * h * (h2 * self.second_derivative_values[i] + h5 * self.second_derivative_values[i + 1])
    }

    /// Serialize to the versioned text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {FORMAT_TAG} name={} domain={:.16e},{:.16e} max_abs_error={:.16e} rows={}",
            self.name,
            self.domain.0,
            self.domain.1,
            self.max_abs_error,
            self.grid.len()
        );
        for ((x, v), d) in self.grid.iter().zip(&self.values).zip(&self.derivative_values) {
            let _ = writeln!(out, "{x:.16e}\t{v:.16e}\t{d:.16e}");
        }
        out
    }

    /// Parse the text format; `second` supplies the second derivative at
    /// each row from `(x, value, derivative)`.
    pub fn from_text<S>(text: &str, mut second: S) -> Result<Self>
    where
        S: FnMut(f64, f64, f64) -> f64,
    {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty table file".into()))?;
        let body = header
            .strip_prefix("# ")
            .and_then(|h| h.strip_prefix(FORMAT_TAG))
            .ok_or_else(|| Error::Parse(format!("missing '{FORMAT_TAG}' header")))?;
        let mut name = None;
        let mut domain = None;
        let mut err = None;
        let mut rows = None;
        for field in body.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field '{field}'")))?;
            match k {
                "name" => name = Some(v.to_string()),
                "domain" => {
                    let (a, b) = v
                        .split_once(',')
                        .ok_or_else(|| Error::Parse("domain must be lo,hi".into()))?;
                    domain = Some((parse_f64(a)?, parse_f64(b)?));
                }
                "max_abs_error" => err = Some(parse_f64(v)?),
                "rows" => {
                    rows = Some(
                        v.parse::<usize>()
                            .map_err(|e| Error::Parse(format!("rows: {e}")))?,
                    )
                }
                other => return Err(Error::Parse(format!("unknown header field '{other}'"))),
            }
        }
        let name = name.ok_or_else(|| Error::Parse("header lacks name".into()))?;
        let domain = domain.ok_or_else(|| Error::Parse("header lacks domain".into()))?;
        let err = err.ok_or_else(|| Error::Parse("header lacks max_abs_error".into()))?;
        let (mut grid, mut values, mut derivs, mut seconds) = (vec![], vec![], vec![], vec![]);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!(
                    "row {}: expected 3 tab-separated columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let (x, v, d) = (parse_f64(cols[0])?, parse_f64(cols[1])?, parse_f64(cols[2])?);
            grid.push(x);
            values.push(v);
            derivs.push(d);
            seconds.push(second(x, v, d));
        }
        if let Some(r) = rows {
            if r != grid.len() {
                return Err(Error::Parse(format!("header says {r} rows, found {}", grid.len())));
            }
        }
        let table = Self::new(name, grid, values, derivs, seconds, err)?;
        if table.domain != domain {
            return Err(Error::Parse("header domain disagrees with rows".into()));
        }
        Ok(table)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("'{s}': {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_table() -> SpecialFunctionTable {
        // quintic polynomial is reproduced exactly
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let dp = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let ddp = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        SpecialFunctionTable::new(
            "poly",
            grid.clone(),
            grid.iter().map(|&x| p(x)).collect(),
            grid.iter().map(|&x| dp(x)).collect(),
            grid.iter().map(|&x| ddp(x)).collect(),
            1e-15,
        )
        .unwrap()
    }

    #[test]
    fn reproduces_quintics() {
        let t = poly_table();
        for i in 0..100 {
            let x = 3.0 * i as f64 / 99.0;
            let exact = 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
            assert!((t.eval(x).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        let t = poly_table();
        assert!(matches!(t.eval(-0.1), Err(Error::Range { .. })));
        assert!(t.eval(3.0000001).is_err());
        assert!(t.eval(3.0).is_ok());
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(SpecialFunctionTable::new("x", vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], 1.0).is_err());
        assert!(SpecialFunctionTable::new("x", vec![0.0, 1.0], vec![0.0, f64::NAN], vec![0.0; 2], vec![0.0; 2], 1.0).is_err());
        assert!(SpecialFunctionTable::new("x", vec![0.0, 1.0], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], 0.0).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let t = poly_table();
        let text = t.to_text();
        let ddp = |x: f64, _: f64, _: f64| -12.0 * x + 10.0 * x.powi(3);
        let back = SpecialFunctionTable::from_text(&text, ddp).unwrap();
        assert_eq!(back, t);
        assert!(text.starts_with("# expint-table v1 name=poly"));
    }

    #[test]
    fn malformed_text_rejected() {
        let none = |_: f64, _: f64, _: f64| 0.0;
        assert!(SpecialFunctionTable::from_text("", none).is_err());
        assert!(SpecialFunctionTable::from_text("# other\n", none).is_err());
        let bad = "# expint-table v1 name=a domain=0,1 max_abs_error=1 rows=2\n0\t1\n";
        assert!(SpecialFunctionTable::from_text(bad, none).is_err());
    }
}
