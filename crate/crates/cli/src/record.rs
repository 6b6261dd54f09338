use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ExperimentConfig;

/// A numeric table; cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Builds a row from displayable cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => { vec![$($cell.to_string()),*] };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub passed: bool,
}

impl Verdict {
    pub fn new(name: &str, value: f64, expected: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            value,
            expected: expected.into(),
            passed,
        }
    }

    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, format!("<= {limit:e}"), value <= limit)
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, format!(">= {limit:e}"), value >= limit)
    }

    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self::new(name, value, format!("{target} ± {tol:e}"), (value - target).abs() <= tol)
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, "1", ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableInfo {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub tables: Vec<TableInfo>,
    pub wall_clock_secs: f64,
    pub artifacts: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    pub passed: bool,
}
