use std::fmt::Write as _;
use std::time::Duration;

use serde::ser::{Serialize, SerializeStruct, Serializer};

/// A named auxiliary statistic attached to a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

/// Outcome of one check: the smallest margin seen, where it was seen, and
/// the slack that was allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check_name: String,
    pub samples: u64,
    pub min_margin: f64,
    pub worst_witness: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
    /// Informational reports never affect an exit status.
    pub gating: bool,
    pub elapsed: Option<Duration>,
    pub seed: Option<u64>,
    pub domain: String,
    pub metrics: Vec<Metric>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(check_name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            check_name: check_name.into(),
            samples: 0,
            min_margin: f64::INFINITY,
            worst_witness: Vec::new(),
            tolerance,
            passed: true,
            gating: true,
            elapsed: None,
            seed: None,
            domain: String::new(),
            metrics: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = domain.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn get_metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    /// Fold one observation into the running minimum. NaN counts as a
    /// failure at `-inf` so it cannot hide.
    pub fn observe(&mut self, margin: f64, witness: &[f64]) {
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        self.samples += 1;
        if self.samples == 1 || m < self.min_margin {
            self.min_margin = m;
            self.worst_witness = witness.to_vec();
        }
    }

    /// Recompute `passed` from the margin; call after the last observation.
    /// A report that saw no samples does not pass.
    pub fn finish(mut self, elapsed: Duration) -> Self {
        if self.samples == 0 {
            self.note("no samples evaluated");
        }
        self.passed = self.samples > 0 && self.min_margin >= -self.tolerance;
        self.elapsed = Some(elapsed);
        self
    }

    pub fn status(&self) -> &'static str {
        match (self.gating, self.passed) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, _) => "INFO",
        }
    }

    pub fn to_json(&self, timing: bool) -> String {
        serde_json::to_string(&Timed(self, timing)).expect("report serialization")
    }

    pub fn to_human(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{:<5}{:<34} min_margin={} tol={} samples={}",
            self.status(),
            self.check_name,
            fmt_num(self.min_margin),
            fmt_num(self.tolerance),
            self.samples
        );
        if !self.worst_witness.is_empty() {
            let w: Vec<String> = self.worst_witness.iter().map(|v| fmt_num(*v)).collect();
            let _ = write!(s, " witness=({})", w.join(", "));
        }
        if let Some(e) = self.elapsed {
            let _ = write!(s, " [{:.1} ms]", e.as_secs_f64() * 1e3);
        }
        for m in &self.metrics {
            let _ = write!(s, "\n       {} = {}", m.name, fmt_num(m.value));
        }
        for n in &self.notes {
            let _ = write!(s, "\n       note: {n}");
        }
        s
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        format!("{v}")
    } else if v.is_finite() {
        format!("{v:.6e}")
    } else {
        format!("{v}")
    }
}

/// JSON has no infinities or NaN; those are written as strings.
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

struct Nums<'a>(&'a [f64]);

impl Serialize for Nums<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|v| Num(*v)))
    }
}

struct Metrics<'a>(&'a [Metric]);

impl Serialize for Metrics<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|m| (m.name.as_str(), Num(m.value))))
    }
}

/// Wall-clock time is left out unless asked for, so that machine output is
/// reproducible byte for byte.
struct Timed<'a>(&'a VerificationReport, bool);

impl Serialize for Timed<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.0;
        let mut st = s.serialize_struct("VerificationReport", 12)?;
        st.serialize_field("check_name", &r.check_name)?;
        st.serialize_field("samples", &r.samples)?;
        st.serialize_field("min_margin", &Num(r.min_margin))?;
        st.serialize_field("worst_witness", &Nums(&r.worst_witness))?;
        st.serialize_field("tolerance", &Num(r.tolerance))?;
        st.serialize_field("passed", &r.passed)?;
        st.serialize_field("gating", &r.gating)?;
        let elapsed = if self.1 {
            r.elapsed.map(|d| d.as_secs_f64() * 1e3)
        } else {
            None
        };
        st.serialize_field("elapsed_ms", &elapsed.map(Num))?;
        st.serialize_field("seed", &r.seed)?;
        st.serialize_field("domain", &r.domain)?;
        st.serialize_field("metrics", &Metrics(&r.metrics))?;
        st.serialize_field("notes", &r.notes)?;
        st.end()
    }
}

/// Line-delimited records, one report per line.
pub fn to_json_lines(reports: &[VerificationReport], timing: bool) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.to_json(timing));
        out.push('\n');
    }
    out
}

/// A single JSON document holding every report and the gating verdict.
pub fn to_json_document(suite: &str, reports: &[VerificationReport], timing: bool) -> String {
    let body: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| serde_json::from_str(&r.to_json(timing)).expect("round trip"))
        .collect();
    let doc = serde_json::json!({
        "suite": suite,
        "passed": all_gating_passed(reports),
        "reports": body,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("document serialization");
    s.push('\n');
    s
}

pub fn all_gating_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().filter(|r| r.gating).all(|r| r.passed)
}
