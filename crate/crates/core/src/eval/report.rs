use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{evaluate_outputs, predict_all, to_f64, EvalError, EvalRecord, Evaluation, Monitor, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub monitor: String,
    pub status: Status,
    pub n: u64,
    pub base_rate: f64,
    pub sg: f64,
    pub rh: f64,
    pub ac: f64,
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl BenchmarkRow {
    fn new(monitor: &str, status: Status, e: &Evaluation) -> Self {
        Self {
            monitor: monitor.to_string(),
            status,
            n: e.n,
            base_rate: to_f64(e.base_rate()),
            sg: to_f64(e.sg),
            rh: to_f64(e.rh),
            ac: to_f64(e.ac),
            tp: e.tp,
            fn_: e.fn_,
            fp: e.fp,
            tn: e.tn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    /// Records before the ODD filter.
    pub total: u64,
    /// Records scored.
    pub evaluated: u64,
    pub odd_filtered: bool,
    pub retention: f64,
    pub rows: Vec<BenchmarkRow>,
    pub notes: Vec<String>,
    pub config: Map<String, Value>,
}

impl BenchmarkReport {
    pub fn row(&self, monitor: &str, status: Status) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.monitor == monitor && r.status == status)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One table per status with columns monitor | SG | RH | AC.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "evaluated {} of {} records (retention {:.4}{})",
            self.evaluated,
            self.total,
            self.retention,
            if self.odd_filtered { ", ODD filter" } else { "" }
        );
        let mut statuses: Vec<Status> = Vec::new();
        for r in &self.rows {
            if !statuses.contains(&r.status) {
                statuses.push(r.status);
            }
        }
        for st in statuses {
            let _ = writeln!(s);
            let base = self.rows.iter().find(|r| r.status == st).map(|r| r.base_rate).unwrap_or(0.0);
            let _ = writeln!(s, "Benchmarking runtime monitors: {} (mean {:.4})", st.label(), base);
            let _ = writeln!(s, "{:<10} | {:>8} | {:>8} | {:>8}", "monitor", "SG", "RH", "AC");
            let _ = writeln!(s, "{}", "-".repeat(43));
            for r in self.rows.iter().filter(|r| r.status == st) {
                let _ = writeln!(s, "{:<10} | {:>8.4} | {:>8.4} | {:>8.4}", r.monitor, r.sg, r.rh, r.ac);
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// Scores fitted monitors on `records` for each status. With `odd_filter`,
/// only records flagged as within the ODD are scored.
pub fn benchmark(
    monitors: &mut [Box<dyn Monitor>],
    records: &[EvalRecord],
    statuses: &[Status],
    odd_filter: bool,
    config: Map<String, Value>,
) -> Result<BenchmarkReport, EvalError> {
    let kept: Vec<EvalRecord> = if odd_filter {
        records.iter().filter(|r| r.within_odd).cloned().collect()
    } else {
        records.to_vec()
    };
    if kept.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for m in monitors.iter_mut() {
        let outputs = predict_all(m.as_mut(), &kept)?;
        for &st in statuses {
            let tau: Vec<bool> = kept.iter().map(|r| r.status(st)).collect();
            rows.push(BenchmarkRow::new(m.name(), st, &evaluate_outputs(&tau, &outputs)?));
        }
        notes.extend(m.notes());
    }
    Ok(BenchmarkReport {
        total: records.len() as u64,
        evaluated: kept.len() as u64,
        odd_filtered: odd_filter,
        retention: kept.len() as f64 / records.len().max(1) as f64,
        rows,
        notes,
        config,
    })
}
