//! End-to-end steps shared by the command-line tool and the test suites:
//! train, collect evidence, derive the ODD and benchmark monitors.

use log::info;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::data::{FeatureSchema, ObservationVector};
use crate::engine::{AccuracySnapshot, Action, EngineError, FuzzyMonitorModel};
use crate::eval::{
    benchmark, BenchmarkReport, DecisionTree, EvalError, EvalRecord, FuzzyMonitor, GaussianNaiveBayes, Monitor,
    RandomMonitor, Status,
};
use crate::evidence::{
    assemble_safety_case, collect_evidence, dataset_tally, model_tally, EvidenceError, EvidenceReport, SafetyCase,
    SafetyCaseParams, Shortlist,
};
use crate::odd::{within_odd, OddError, OddSpecification};

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error(transparent)]
    Odd(#[from] OddError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainSummary {
    pub samples: u64,
    pub created: u64,
    pub merged: u64,
    pub pruned: u64,
    pub final_accuracy: AccuracySnapshot,
}

/// Streams observations through test-then-train, logging the rolling
/// accuracy every `log_every` samples (0 disables the log).
pub fn train(model: &mut FuzzyMonitorModel, data: &[ObservationVector], log_every: u64) -> Result<TrainSummary, EngineError> {
    let mut s = TrainSummary::default();
    for o in data {
        let out = model.learn(o)?;
        s.samples += 1;
        for a in &out.actions {
            match a {
                Action::Created { .. } => s.created += 1,
                Action::Merged { .. } => s.merged += 1,
                Action::Pruned { .. } => s.pruned += 1,
                Action::Updated { .. } => {}
            }
        }
        if log_every > 0 && model.global.n_seen % log_every == 0 {
            info!(
                "n={} clouds={} accuracy cumulative={} windowed={}",
                model.global.n_seen,
                model.clouds.len(),
                fmt_opt(out.accuracy.cumulative),
                fmt_opt(out.accuracy.windowed)
            );
        }
    }
    s.final_accuracy = model.rolling_accuracy();
    Ok(s)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"))
}

pub struct EvidenceOutcome {
    pub shortlist: Shortlist,
    pub case: SafetyCase,
    pub report: EvidenceReport,
}

/// Evidence, shortlist and safety case. Counts come from the model's own
/// training tallies, or from a recount of `data` when given.
pub fn evidence(
    model: &FuzzyMonitorModel,
    data: Option<&[ObservationVector]>,
    max_mp_rate: f64,
    params: &SafetyCaseParams,
) -> Result<EvidenceOutcome, WorkflowError> {
    let (tally, total) = match data {
        Some(d) => (dataset_tally(model, d)?, d.len() as u64),
        None => (model_tally(model), model.global.n_seen),
    };
    let ev = collect_evidence(model, &tally, total, params.q, max_mp_rate)?;
    let case = assemble_safety_case(&ev, params)?;
    let report = EvidenceReport::new(&model.schema, &ev, &case, params, max_mp_rate, total);
    Ok(EvidenceOutcome {
        shortlist: Shortlist::from_evidence(ev),
        case,
        report,
    })
}

/// Settings of the baseline monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSetup {
    pub seed: u64,
    pub random_p: f64,
    pub tree_depth: usize,
    pub tree_min_leaf: usize,
}

impl Default for BenchmarkSetup {
    fn default() -> Self {
        Self {
            seed: 0,
            random_p: 0.5,
            tree_depth: 5,
            tree_min_leaf: 5,
        }
    }
}

pub fn eval_records(
    data: &[ObservationVector],
    spec: Option<&OddSpecification>,
    schema: &FeatureSchema,
) -> Result<Vec<EvalRecord>, OddError> {
    data.iter()
        .map(|o| {
            let mut r = EvalRecord::from_observation(o);
            if let Some(spec) = spec {
                r.within_odd = within_odd(spec, &o.source, schema)?.is_within();
            }
            Ok(r)
        })
        .collect()
}

/// Fits the random, naive Bayes and tree baselines on `train` and scores
/// them with the fuzzy monitor on `validation`, ODD-filtered when a spec
/// is given.
pub fn run_benchmark(
    model: &FuzzyMonitorModel,
    train: &[ObservationVector],
    validation: &[ObservationVector],
    spec: Option<&OddSpecification>,
    setup: &BenchmarkSetup,
) -> Result<BenchmarkReport, WorkflowError> {
    let train_records = eval_records(train, None, &model.schema)?;
    let val_records = eval_records(validation, spec, &model.schema)?;

    let mut gnb = GaussianNaiveBayes::new();
    gnb.fit(&train_records)?;
    let mut tree = DecisionTree::new(setup.tree_depth, setup.tree_min_leaf);
    tree.fit(&train_records)?;
    let mut monitors: Vec<Box<dyn Monitor>> = vec![
        Box::new(RandomMonitor::new(setup.seed, setup.random_p)?),
        Box::new(gnb),
        Box::new(tree),
        Box::new(FuzzyMonitor::new(model.clone())),
    ];

    let mut config = Map::new();
    config.insert("seed".into(), json!(setup.seed));
    config.insert("random_p".into(), json!(setup.random_p));
    config.insert("tree_max_depth".into(), json!(setup.tree_depth));
    config.insert("tree_min_leaf".into(), json!(setup.tree_min_leaf));
    config.insert("train_records".into(), json!(train_records.len()));
    config.insert("fuzzy_clouds".into(), json!(model.clouds.len()));
    config.insert("fuzzy_params".into(), serde_json::to_value(&model.params).unwrap_or(Value::Null));

    Ok(benchmark(&mut monitors, &val_records, &Status::ALL, spec.is_some(), config)?)
}
