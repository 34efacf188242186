//! Structured results of a check: named measurements, named tolerances and
//! the comparisons between them that decide `pass`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::solver::fmt17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    pub fn holds(&self, measured: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => measured <= tolerance,
            Relation::Below => measured < tolerance,
            Relation::AtLeast => measured >= tolerance,
            Relation::Above => measured > tolerance,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        }
    }
}

/// `measured[measured] relation tolerance[tolerance]`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub measured: String,
    pub relation: Relation,
    pub tolerance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_id: String,
    pub params: BTreeMap<String, Value>,
    pub samples: usize,
    pub pass: bool,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: BTreeMap<String, f64>,
    pub conditions: Vec<Condition>,
    /// Supporting data: fit windows, per-run verdicts, sampled sequences.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
    pub seed: u64,
    /// Seconds; omitted in strict mode so reports stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn new(check_id: &str, seed: u64) -> Self {
        Report {
            check_id: check_id.to_string(),
            params: BTreeMap::new(),
            samples: 0,
            pass: false,
            measured: BTreeMap::new(),
            tolerance: BTreeMap::new(),
            conditions: Vec::new(),
            details: BTreeMap::new(),
            seed,
            wall_time: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn measure(&mut self, key: &str, value: f64) -> &mut Self {
        self.measured.insert(key.to_string(), value);
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    /// Adds the condition `measured relation tolerance` with the tolerance
    /// stored under `tolerance_key`.
    pub fn require(&mut self, measured: &str, relation: Relation, tolerance_key: &str, tolerance: f64) -> &mut Self {
        self.tolerance.insert(tolerance_key.to_string(), tolerance);
        self.conditions.push(Condition {
            measured: measured.to_string(),
            relation,
            tolerance: tolerance_key.to_string(),
        });
        self
    }

    /// Whether every condition holds. Missing or non-finite entries fail, and
    /// a report without conditions never passes.
    pub fn evaluate(&self) -> bool {
        !self.conditions.is_empty() && self.conditions.iter().all(|c| self.condition_holds(c))
    }

    pub fn condition_holds(&self, c: &Condition) -> bool {
        match (self.measured.get(&c.measured), self.tolerance.get(&c.tolerance)) {
            (Some(m), Some(t)) if !m.is_nan() && !t.is_nan() => c.relation.holds(*m, *t),
            _ => false,
        }
    }

    /// Sets `pass` from the conditions.
    pub fn finish(mut self) -> Self {
        self.pass = self.evaluate();
        self
    }

    /// Conditions that do not hold, rendered as `name = value rel tol = value`.
    pub fn failures(&self) -> Vec<String> {
        self.conditions
            .iter()
            .filter(|c| !self.condition_holds(c))
            .map(|c| {
                let m = self.measured.get(&c.measured).copied().unwrap_or(f64::NAN);
                let t = self.tolerance.get(&c.tolerance).copied().unwrap_or(f64::NAN);
                format!("{} = {m:e} {} {} = {t:e}", c.measured, c.relation.symbol(), c.tolerance)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub const CSV_HEADER: &'static str = "check_id,seed,pass,kind,name,value";

    /// Long-format rows (no header): one per parameter, measurement and tolerance.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        let mut row = |kind: &str, name: &str, value: &str| {
            let _ = writeln!(out, "{},{},{},{kind},{},{}", csv_field(&self.check_id), self.seed, self.pass, csv_field(name), csv_field(value));
        };
        row("samples", "samples", &self.samples.to_string());
        for (k, v) in &self.params {
            row("param", k, &v.to_string());
        }
        for (k, v) in &self.measured {
            row("measured", k, &fmt17(*v));
        }
        for (k, v) in &self.tolerance {
            row("tolerance", k, &fmt17(*v));
        }
        if let Some(t) = self.wall_time {
            row("timing", "wall_time", &fmt17(t));
        }
        out
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// CSV document for a set of reports.
pub fn reports_to_csv(reports: &[Report]) -> String {
    let mut out = String::from(Report::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.to_csv_rows());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", 7);
        r.param("dim", 2).param("label", "a,b");
        r.measure("error", 1e-9).measure("count", 0.0);
        r.require("error", Relation::AtMost, "error_max", 1e-6);
        r.require("count", Relation::AtMost, "count_max", 0.0);
        r.samples = 3;
        r.finish()
    }

    #[test]
    fn pass_follows_conditions() {
        let r = sample();
        assert!(r.pass);
        let mut bad = r.clone();
        bad.measured.insert("error".into(), 1e-3);
        assert!(!bad.evaluate());
        assert_eq!(bad.failures().len(), 1);
        let mut missing = r.clone();
        missing.measured.remove("count");
        assert!(!missing.evaluate());
        assert!(!Report::new("empty", 0).finish().pass);
        let mut nan = r;
        nan.measured.insert("error".into(), f64::NAN);
        assert!(!nan.evaluate());
    }

    #[test]
    fn json_round_trip_and_csv() {
        let r = sample();
        let text = r.to_json();
        assert!(!text.contains("wall_time"));
        assert!(text.contains("\"<=\""));
        assert_eq!(Report::from_json(&text).unwrap(), r);
        let csv = reports_to_csv(&[r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], Report::CSV_HEADER);
        assert!(lines.contains(&"demo,7,true,measured,error,1.0000000000000001e-9"));
        assert!(lines.contains(&"demo,7,true,param,label,\"\"\"a,b\"\"\""));
        assert_eq!(lines.len(), 1 + 1 + 2 + 2 + 2);
    }
}
