use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One verdict. `anchor` names the statement the assertion instantiates.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Assertion {
    pub id: String,
    pub anchor: String,
    pub value: Option<f64>,
    pub requirement: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Assertion {
    pub fn new(id: &str, anchor: &str, value: Option<f64>, requirement: impl Into<String>, passed: bool) -> Self {
        Assertion {
            id: id.into(),
            anchor: anchor.into(),
            value,
            requirement: requirement.into(),
            passed,
            note: String::new(),
        }
    }

    pub fn at_most(id: &str, anchor: &str, value: f64, limit: f64) -> Self {
        Self::new(id, anchor, Some(value), format!("<= {limit:e}"), value <= limit)
    }

    pub fn holds(id: &str, anchor: &str, ok: bool, requirement: &str) -> Self {
        Self::new(id, anchor, None, requirement, ok)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ReportTable {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

impl ReportTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        ReportTable { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Fixed-width scientific formatting so that tables are byte-stable.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.10e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub tables: Vec<ReportTable>,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    pub fn new(suite: &str, tables: Vec<ReportTable>, assertions: Vec<Assertion>) -> Self {
        let passed = assertions.iter().all(|a| a.passed);
        SuiteReport { suite: suite.into(), passed, tables, assertions }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub config: serde_json::Value,
    pub suites: Vec<SuiteReport>,
}

/// Writes `<table>.csv` for every table and `summary.json`.
pub fn render(summary: &Summary, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for s in &summary.suites {
        for t in &s.tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
    }
    let json = serde_json::to_string_pretty(summary).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_has_header_only() {
        let t = ReportTable::new("empty", &["k", "rank"]);
        assert_eq!(t.to_csv().unwrap(), "k,rank\n");
    }

    #[test]
    fn verdicts() {
        let a = Assertion::at_most("x", "bound", 0.5, 1.0);
        assert!(a.passed);
        let s = SuiteReport::new("s", vec![], vec![a, Assertion::holds("y", "fact", false, "true")]);
        assert!(!s.passed);
        assert_eq!(s.failures().count(), 1);
        assert_eq!(num(1.0), "1.0000000000e0");
    }
}
