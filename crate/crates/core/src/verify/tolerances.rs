use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Default slack per named check. Every "≥ 0" claim is tested as
/// "≥ -tolerance" after the normalization documented at the check.
const DEFAULTS: &[(&str, f64)] = &[
    ("psd", 1e-8),
    ("det", 1e-7),
    ("f_bound", 1e-9),
    ("g_sandwich", 1e-10),
    ("heat_residual", 1e-5),
    ("fd_slack", 1e-6),
    ("heat_closed_form", 1e-9),
    ("concavity", 1e-10),
    ("four_point", 1e-9),
    ("taylor", 0.02),
    ("supersolution", 1e-9),
    ("counterexample", 0.0),
    ("flow", 1e-9),
    ("endpoint", 1e-9),
    ("mc_sigmas", 3.0),
    ("sharpness", 1e-3),
    ("martingale", 1e-9),
    ("bellman_step", 1e-9),
    ("brownian_sigmas", 3.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULTS.iter().copied().collect())
    }
}

impl Tolerances {
    pub fn names() -> impl Iterator<Item = &'static str> {
        DEFAULTS.iter().map(|(n, _)| *n)
    }

    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("no tolerance named {name}"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::Config(format!(
                "tolerance {name} must be finite and nonnegative, got {value}"
            )));
        }
        let key = DEFAULTS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, _)| *n)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::names().collect();
                Error::Config(format!(
                    "unknown tolerance {name:?}; known: {}",
                    known.join(", ")
                ))
            })?;
        self.0.insert(key, value);
        Ok(())
    }

    /// Apply a `name=value` override.
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected name=value, got {spec:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad tolerance value in {spec:?}")))?;
        self.set(name.trim(), value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_rejections() {
        let mut t = Tolerances::default();
        assert_eq!(t.get("four_point"), 1e-9);
        t.apply("four_point=1e-6").unwrap();
        assert_eq!(t.get("four_point"), 1e-6);
        assert!(matches!(t.apply("bogus=1"), Err(Error::Config(_))));
        assert!(matches!(t.apply("psd"), Err(Error::Parse(_))));
        assert!(t.apply("psd=-1").is_err());
        assert!(t.apply("psd=abc").is_err());
    }
}
