//! Result tables, assertions and their JSON and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use index_lab_core::linalg::CMat;
use index_lab_core::transport::IndexReport;

use crate::engine::Instance;

/// One line of the result table; the columns are the same for every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub l1: usize,
    pub l2: usize,
    pub label: String,
    pub route: String,
    pub dim: Option<usize>,
    pub p: Option<usize>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub admissible: Option<bool>,
    pub index: Option<f64>,
    pub p_index: Option<f64>,
    pub integer_distance: Option<f64>,
    pub leakage: Option<f64>,
    pub residual: Option<f64>,
    pub wall_time_s: f64,
    pub status: String,
}

impl Row {
    pub fn new(inst: &Instance, label: impl Into<String>) -> Self {
        let gap = inst.gap();
        Self {
            l1: inst.lattice.l1(),
            l2: inst.lattice.l2(),
            label: label.into(),
            route: inst.route.name().into(),
            dim: Some(inst.dim()),
            p: Some(gap.p),
            gamma: Some(gap.gamma),
            delta: Some(gap.delta),
            admissible: Some(gap.admissible),
            index: None,
            p_index: None,
            integer_distance: None,
            leakage: None,
            residual: None,
            wall_time_s: 0.0,
            status: "ok".into(),
        }
    }

    pub fn aborted(size: [usize; 2], label: &str, route: &str, err: &anyhow::Error) -> Self {
        Self {
            l1: size[0],
            l2: size[1],
            label: label.into(),
            route: route.into(),
            dim: None,
            p: None,
            gamma: None,
            delta: None,
            admissible: None,
            index: None,
            p_index: None,
            integer_distance: None,
            leakage: None,
            residual: None,
            wall_time_s: 0.0,
            status: format!("aborted: {err:#}"),
        }
    }

    pub fn with_index(mut self, r: &IndexReport) -> Self {
        self.index = Some(r.index);
        self.p_index = Some(r.p_index);
        self.integer_distance = Some(r.integer_distance);
        self
    }

    pub fn with_leakage(mut self, v: f64) -> Self {
        self.leakage = Some(v);
        self
    }

    pub fn with_residual(mut self, v: f64) -> Self {
        self.residual = Some(v);
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub size: Option<[usize; 2]>,
    pub hard: bool,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Assertion {
    /// Passes iff `value ≤ threshold`; NaN fails.
    pub fn at_most(name: impl Into<String>, size: Option<[usize; 2]>, value: f64, threshold: f64, hard: bool) -> Self {
        Self { name: name.into(), size, hard, passed: value <= threshold, value, threshold }
    }

    pub fn holds(name: impl Into<String>, size: Option<[usize; 2]>, ok: bool, hard: bool) -> Self {
        Self { name: name.into(), size, hard, passed: ok, value: if ok { 1.0 } else { 0.0 }, threshold: 1.0 }
    }
}

/// Output of one size.
#[derive(Debug, Clone, Default)]
pub struct SizeOutcome {
    pub rows: Vec<Row>,
    pub details: Vec<Value>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    /// `(name, COO text)` operator dumps.
    pub operators: Vec<(String, String)>,
}

impl SizeOutcome {
    pub fn push(&mut self, row: Row, details: Value) {
        self.rows.push(row);
        self.details.push(details);
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: String,
    pub rows: Vec<Row>,
    /// Scenario-specific data, parallel to `rows`.
    pub details: Vec<Value>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub passed: bool,
    /// `(file name, COO text)`, written next to the summary.
    #[serde(skip)]
    pub operators: Vec<(String, String)>,
}

impl SweepResult {
    pub fn hard_failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| a.hard && !a.passed).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `summary.json`, `table.csv` and the operator dumps into `dir`.
    pub fn write(&self, dir: &Path, config: &crate::config::ExperimentConfig) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let summary = serde_json::json!({
            "config": config,
            "result": self,
        });
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        fs::write(dir.join("table.csv"), self.to_csv()?)?;
        for (name, text) in &self.operators {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

/// Coordinate list `row col re im` of the nonzero entries of a dense matrix.
pub fn dense_coo(m: &CMat) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if v.re != 0.0 || v.im != 0.0 {
                let _ = writeln!(s, "{r} {c} {:.17e} {:.17e}", v.re, v.im);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_an_upper_bound() {
        assert!(!Assertion::at_most("x", None, f64::NAN, 1.0, true).passed);
        assert!(Assertion::at_most("x", None, 1.0, 1.0, true).passed);
    }

    #[test]
    fn csv_has_stable_columns() {
        let err = anyhow::anyhow!("boom");
        let r = SweepResult {
            scenario: "lsm".into(),
            rows: vec![Row::aborted([4, 1], "translation", "free", &err)],
            details: vec![Value::Null],
            assertions: vec![],
            notes: vec![],
            passed: true,
            operators: vec![],
        };
        let csv = r.to_csv().unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "l1,l2,label,route,dim,p,gamma,delta,admissible,index,p_index,integer_distance,leakage,residual,wall_time_s,status"
        );
        assert!(csv.contains("aborted: boom"));
    }

    #[test]
    fn coo_lists_nonzeros() {
        let mut m = CMat::zeros(2, 2);
        m[(1, 0)] = index_lab_core::linalg::C64::new(0.5, -1.0);
        let s = dense_coo(&m);
        assert_eq!(s.lines().count(), 1);
        assert!(s.starts_with("1 0 5.0"));
    }
}
