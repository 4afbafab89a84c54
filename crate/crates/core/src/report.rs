//! Report documents: a `meta` block (version, seed, parameters) and a
//! `results` block, plus CSV companions for tabular series.

use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub results: Value,
}

impl Report {
    pub fn new<P: Serialize, R: Serialize>(command: &str, seed: u64, params: &P, results: &R) -> Report {
        Report {
            meta: Meta {
                version: VERSION.to_string(),
                command: command.to_string(),
                seed,
                params: serde_json::to_value(params).expect("params serialize"),
            },
            results: serde_json::to_value(results).expect("results serialize"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Compact serialization of the `results` block alone; equal strings
    /// mean byte-identical results.
    pub fn results_json(&self) -> String {
        serde_json::to_string(&self.results).expect("results serialize")
    }
}

/// CSV text with a header row. Floats use the shortest round-trip form.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
