//! Report rows and their CSV/JSON renderings.

use std::fmt::Write as _;

pub const REPORT_HEADER: &str = "quantity,value,reference,std_error,tolerance,holds,seed";

/// One checked quantity. `reference` is the target or bound compared
/// against, `tolerance` the allowed deviation (0 for one-sided bounds).
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    pub reference: f64,
    pub std_error: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub seed: u64,
}

impl Row {
    pub fn new(quantity: impl Into<String>, value: f64, reference: f64, holds: bool, seed: u64) -> Self {
        Self { quantity: quantity.into(), value, reference, std_error: 0.0, tolerance: 0.0, holds, seed }
    }

    pub fn std_error(mut self, se: f64) -> Self {
        self.std_error = se;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.holds).count()
    }

    pub fn failed(&self) -> usize {
        self.rows.len() - self.passed()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for r in &self.rows {
            let quantity = if r.quantity.contains(',') { format!("\"{}\"", r.quantity) } else { r.quantity.clone() };
            let _ = writeln!(
                out,
                "{quantity},{:e},{:e},{:e},{:e},{},{}",
                r.value, r.reference, r.std_error, r.tolerance, r.holds, r.seed
            );
        }
        out
    }

    pub fn summary_json(&self, suite: &str, seed: u64) -> String {
        let v = serde_json::json!({ "suite": suite, "passed": self.passed(), "failed": self.failed(), "seed": seed });
        format!("{}\n", serde_json::to_string_pretty(&v).expect("plain JSON object"))
    }
}
