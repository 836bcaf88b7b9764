//! Pass/fail reports with text and JSON renderings.

use std::fmt::Write as _;

use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Largest residual over the probe points; NaN if any evaluation failed.
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Point attaining `value`, or the first failing point.
    pub worst: Option<Vec<f64>>,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value.is_finite() && value <= threshold, worst: None, note: None }
    }

    pub fn at(mut self, worst: Option<Vec<f64>>) -> Self {
        self.worst = worst;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Builds a check from per-point residuals, keeping the worst point.
    ///
    /// A failed evaluation makes the whole check fail and is reported with its point.
    pub fn sweep<E: std::fmt::Display>(
        name: impl Into<String>,
        threshold: f64,
        results: impl IntoIterator<Item = (Vec<f64>, Result<f64, E>)>,
    ) -> Self {
        let mut worst = 0.0f64;
        let mut at = None;
        for (pt, r) in results {
            match r {
                Ok(v) if v.is_nan() => return Check::new(name, f64::NAN, threshold).at(Some(pt)).note("residual is NaN"),
                Ok(v) => {
                    if at.is_none() || v > worst {
                        worst = v;
                        at = Some(pt);
                    }
                }
                Err(e) => return Check::new(name, f64::NAN, threshold).at(Some(pt)).note(format!("evaluation failed: {e}")),
            }
        }
        Check::new(name, worst, threshold).at(at)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub title: String,
    pub checks: Vec<Check>,
    /// Informational lines, not part of the verdict.
    pub info: Vec<(String, String)>,
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), ..Self::default() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn info(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.info.push((key.into(), value.into()));
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn render_text(&self) -> String {
        let mut s = format!("== {} ==\n", self.title);
        for (k, v) in &self.info {
            let _ = writeln!(s, "  {k}: {v}");
        }
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = write!(
                s,
                "{} {:<width$}  {:>12.3e}  (threshold {:.1e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            );
            if let Some(p) = &c.worst {
                let _ = write!(s, "  at {}", fmt_point(p));
            }
            if let Some(n) = &c.note {
                let _ = write!(s, "  [{n}]");
            }
            s.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(
            s,
            "overall: {} ({} of {} checks passed)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.checks.len() - failed,
            self.checks.len()
        );
        s
    }

    pub fn to_json(&self) -> Value {
        let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        json!({
            "title": self.title,
            "pass": self.pass(),
            "info": self.info.iter().map(|(k, v)| json!({ "key": k, "value": v })).collect::<Vec<_>>(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "value": num(c.value),
                "threshold": c.threshold,
                "pass": c.pass,
                "worst_point": c.worst,
                "note": c.note,
            })).collect::<Vec<_>>(),
        })
    }
}
