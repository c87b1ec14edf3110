//! Structured pass/fail records for check suites and their serialization.
//!
//! The machine-readable form is a JSON document with a stable key order so
//! that repeated runs over identical input are byte-identical. Elapsed time
//! is deliberately kept out of the JSON body.

use std::fmt;

/// Residual of a single check: either exactly zero by construction
/// (exact rational or integer arithmetic) or a floating-point magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Residual {
    Exact,
    Float(f64),
}

impl Residual {
    pub fn magnitude(&self) -> f64 {
        match self {
            Residual::Exact => 0.0,
            Residual::Float(x) => *x,
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Exact => write!(f, "exact"),
            Residual::Float(x) => write!(f, "{:.3e}", x),
        }
    }
}

/// One named check with its outcome.
#[derive(Debug, Clone)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub residual: Residual,
    pub detail: String,
}

impl CheckEntry {
    pub fn pass(name: impl Into<String>, residual: Residual, detail: impl Into<String>) -> Self {
        CheckEntry {
            name: name.into(),
            pass: true,
            residual,
            detail: detail.into(),
        }
    }

    /// A failing entry. `detail` must be nonempty; this is enforced here so
    /// every failure carries a diagnostic.
    pub fn fail(name: impl Into<String>, residual: Residual, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        assert!(!detail.is_empty(), "failing check entries need a detail");
        CheckEntry {
            name: name.into(),
            pass: false,
            residual,
            detail,
        }
    }

    /// Pass/fail from a residual against a threshold.
    pub fn from_residual(
        name: impl Into<String>,
        residual: f64,
        tol: f64,
        fail_detail: impl Into<String>,
    ) -> Self {
        if residual <= tol {
            CheckEntry::pass(name, Residual::Float(residual), "")
        } else {
            CheckEntry::fail(name, Residual::Float(residual), fail_detail)
        }
    }
}

/// Aggregate report for one datum.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub datum_fingerprint: String,
    pub entries: Vec<CheckEntry>,
    pub elapsed_ms: u128,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Machine-readable JSON with stable key ordering and no timing data.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!(
            "  \"datum_fingerprint\": \"{}\",\n",
            self.datum_fingerprint
        ));
        out.push_str(&format!(
            "  \"overall\": \"{}\",\n",
            if self.all_pass() { "pass" } else { "fail" }
        ));
        out.push_str("  \"entries\": [\n");
        for (idx, e) in self.entries.iter().enumerate() {
            let residual = match e.residual {
                Residual::Exact => "\"exact\"".to_string(),
                Residual::Float(x) => format_float(x),
            };
            out.push_str(&format!(
                "    {{\"name\": {}, \"status\": \"{}\", \"residual\": {}, \"detail\": {}}}{}\n",
                json_string(&e.name),
                if e.pass { "pass" } else { "fail" },
                residual,
                json_string(&e.detail),
                if idx + 1 < self.entries.len() {
                    ","
                } else {
                    ""
                }
            ));
        }
        out.push_str("  ]\n");
        out.push_str("}\n");
        out
    }

    /// Human-readable listing, one line per entry, with timing.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let status = if e.pass { "PASS" } else { "FAIL" };
            if e.detail.is_empty() {
                out.push_str(&format!(
                    "{} {:<44} residual {}\n",
                    status, e.name, e.residual
                ));
            } else {
                out.push_str(&format!(
                    "{} {:<44} residual {}  {}\n",
                    status, e.name, e.residual, e.detail
                ));
            }
        }
        let (pass, total) = (
            self.entries.iter().filter(|e| e.pass).count(),
            self.entries.len(),
        );
        out.push_str(&format!(
            "{}/{} checks passed in {} ms (datum {})\n",
            pass, total, self.elapsed_ms, self.datum_fingerprint
        ));
        out
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Deterministic float rendering: shortest representation that round-trips.
/// Non-finite residuals (degenerate input data) serialize as a string,
/// since bare NaN/Infinity tokens are not valid JSON.
fn format_float(x: f64) -> String {
    if !x.is_finite() {
        "\"non-finite\"".to_string()
    } else if x == x.trunc() && x.abs() < 1e15 {
        format!("{:.1}", x)
    } else {
        format!("{}", x)
    }
}
