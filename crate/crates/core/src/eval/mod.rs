//! Runtime-monitor benchmarking: safety and mission returns, safety gain /
//! residual hazard / availability cost, and baseline monitors.
//!
//! A monitor `m` flags an input (`m = 1`) when it expects the perception
//! component to fail. Against the unmonitored component (`m = 0` always)
//! and the ideal one (`m = tau`):
//!
//! * `SG = mean(R^S(C, m) - R^S(C))`
//! * `RH = mean(R^S(C*) - R^S(C, m))`
//! * `AC = mean(R^M(C) - R^M(C, m))`
//!
//! All three are kept as exact fractions over the dataset size.

mod baselines;
mod report;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::ObservationVector;
use crate::engine::EngineError;

pub use baselines::{DecisionTree, FuzzyMonitor, GaussianNaiveBayes, RandomMonitor, TreeNode};
pub use report::{benchmark, BenchmarkReport, BenchmarkRow};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no records to evaluate")]
    EmptyDataset,
    #[error("{got} monitor outputs for {expected} records")]
    LengthMismatch { expected: usize, got: usize },
    #[error("monitor `{0}` has not been fitted")]
    NotFitted(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One evaluation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub o: Vec<f64>,
    pub tau_mp: bool,
    pub tau_hmp: bool,
    pub within_odd: bool,
}

impl EvalRecord {
    pub fn new(o: Vec<f64>, tau_mp: bool, tau_hmp: bool) -> Self {
        Self {
            o,
            tau_mp,
            tau_hmp: tau_mp && tau_hmp,
            within_odd: true,
        }
    }

    pub fn from_observation(o: &ObservationVector) -> Self {
        Self::new(o.values.clone(), o.mp(), o.hmp())
    }

    pub fn status(&self, status: Status) -> bool {
        match status {
            Status::Mp => self.tau_mp,
            Status::Hmp => self.tau_hmp,
        }
    }
}

/// Which ground-truth error status a monitor is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "tau_mP")]
    Mp,
    #[serde(rename = "tau_HmP")]
    Hmp,
}

impl Status {
    pub const ALL: [Status; 2] = [Status::Mp, Status::Hmp];

    pub fn label(self) -> &'static str {
        match self {
            Status::Mp => "tau_mP",
            Status::Hmp => "tau_HmP",
        }
    }
}

/// A runtime monitor over encoded observations.
///
/// `predict` takes `&mut self` so that stochastic monitors can advance a
/// seeded stream; deterministic monitors leave their state untouched.
pub trait Monitor {
    fn name(&self) -> &str;

    /// Trains on `tau_mp` labels. Monitors without parameters ignore the data.
    fn fit(&mut self, data: &[EvalRecord]) -> Result<(), EvalError>;

    fn predict(&mut self, o: &[f64]) -> Result<bool, EvalError>;

    /// Caveats to surface in reports, such as a degenerate fit.
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Safety return: 0 exactly when an error goes unflagged.
pub fn safety_return(tau: bool, m: bool) -> u8 {
    if tau && !m {
        0
    } else {
        1
    }
}

/// Mission return: 0 exactly when a correct output is flagged.
pub fn mission_return(tau: bool, m: bool) -> u8 {
    if !tau && m {
        0
    } else {
        1
    }
}

/// Confusion counts with the three benchmark metrics as exact fractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub n: u64,
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
    pub sg: Ratio<i64>,
    pub rh: Ratio<i64>,
    pub ac: Ratio<i64>,
}

impl Evaluation {
    /// `mean(tau)`.
    pub fn base_rate(&self) -> Ratio<i64> {
        Ratio::new((self.tp + self.fn_) as i64, self.n as i64)
    }
}

pub fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Scores monitor outputs `m` against ground truth `tau` through the
/// return functions.
pub fn evaluate_outputs(tau: &[bool], m: &[bool]) -> Result<Evaluation, EvalError> {
    if tau.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    if tau.len() != m.len() {
        return Err(EvalError::LengthMismatch {
            expected: tau.len(),
            got: m.len(),
        });
    }
    let (mut sg, mut rh, mut ac) = (0i64, 0i64, 0i64);
    let (mut tp, mut fn_, mut fp, mut tn) = (0, 0, 0, 0);
    for (&t, &mi) in tau.iter().zip(m) {
        let rs_mon = safety_return(t, mi) as i64;
        sg += rs_mon - safety_return(t, false) as i64;
        rh += safety_return(t, t) as i64 - rs_mon;
        ac += mission_return(t, false) as i64 - mission_return(t, mi) as i64;
        match (t, mi) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let n = tau.len() as i64;
    Ok(Evaluation {
        n: n as u64,
        tp,
        fn_,
        fp,
        tn,
        sg: Ratio::new(sg, n),
        rh: Ratio::new(rh, n),
        ac: Ratio::new(ac, n),
    })
}

/// Runs `monitor` over `records` and scores it against `status`.
pub fn evaluate(monitor: &mut dyn Monitor, records: &[EvalRecord], status: Status) -> Result<Evaluation, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let m = predict_all(monitor, records)?;
    let tau: Vec<bool> = records.iter().map(|r| r.status(status)).collect();
    evaluate_outputs(&tau, &m)
}

pub fn predict_all(monitor: &mut dyn Monitor, records: &[EvalRecord]) -> Result<Vec<bool>, EvalError> {
    records.iter().map(|r| monitor.predict(&r.o)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn return_tables() {
        assert_eq!(safety_return(true, false), 0);
        assert_eq!(safety_return(true, true), 1);
        assert_eq!(safety_return(false, false), 1);
        assert_eq!(safety_return(false, true), 1);
        assert_eq!(mission_return(false, true), 0);
        assert_eq!(mission_return(true, true), 1);
        assert_eq!(mission_return(false, false), 1);
        assert_eq!(mission_return(true, false), 1);
    }

    #[test]
    fn hand_example() {
        let e = evaluate_outputs(&[true, false, false, true], &[true, true, false, false]).unwrap();
        let q = Ratio::new(1, 4);
        assert_eq!((e.sg, e.rh, e.ac), (q, q, q));
        assert_eq!((e.tp, e.fn_, e.fp, e.tn), (1, 1, 1, 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(evaluate_outputs(&[], &[]), Err(EvalError::EmptyDataset)));
        assert!(matches!(
            evaluate_outputs(&[true], &[]),
            Err(EvalError::LengthMismatch { expected: 1, got: 0 })
        ));
    }
}
