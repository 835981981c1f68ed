use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::cloud::{Datacloud, Origin};
use super::rls::{extend, Consequent};
use super::stats::{GlobalStats, MIN_VARIANCE};
use super::EngineError;
use crate::data::{FeatureSchema, ObservationVector, RawRecord};

/// Tunables of the evolving classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Diagonal of the initial RLS covariance.
    pub omega0: f64,
    /// Mutual membership above which two clouds are merged.
    pub merge_threshold: f64,
    /// Utility below which a mature cloud is pruned.
    pub util_threshold: f64,
    /// Support a cloud needs before it can be pruned.
    pub min_support_eval: u64,
    /// Length of the windowed accuracy buffer.
    pub window: usize,
    /// Windowed accuracy at which the human reviewer is notified.
    pub accuracy_target: f64,
    /// Cloud variances are floored at `max(MIN_VARIANCE, var_floor_ratio * global variance)`.
    pub var_floor_ratio: f64,
    /// A sample whose best membership is below this belongs to no cloud.
    /// The default `1 / (1 + 3^2)` places the boundary at three cloud
    /// standard deviations.
    pub belonging_threshold: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            omega0: 1000.0,
            merge_threshold: 0.8,
            util_threshold: 0.01,
            min_support_eval: 20,
            window: 500,
            accuracy_target: 0.9,
            var_floor_ratio: 0.01,
            belonging_threshold: 0.1,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |what: &str| Err(EngineError::InvalidHyperparameter(what.to_string()));
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return bad("omega0 must be positive");
        }
        if !(0.0..=1.0).contains(&self.merge_threshold) {
            return bad("merge_threshold must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.util_threshold) {
            return bad("util_threshold must lie in [0, 1]");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.accuracy_target) {
            return bad("accuracy_target must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.belonging_threshold) {
            return bad("belonging_threshold must lie in [0, 1)");
        }
        if !(self.var_floor_ratio >= 0.0) {
            return bad("var_floor_ratio must be non-negative");
        }
        Ok(())
    }
}

/// Ground truth attached to a training sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label {
    pub mp: bool,
    pub hmp: bool,
}

impl Label {
    pub fn new(mp: bool, hmp: bool) -> Self {
        Self { mp, hmp: hmp && mp }
    }

    pub fn reliable() -> Self {
        Self::new(false, false)
    }

    pub fn misperception() -> Self {
        Self::new(true, false)
    }
}

impl From<&RawRecord> for Label {
    fn from(r: &RawRecord) -> Self {
        Label::new(r.mp, r.hmp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Defuzzified output, clamped to `[0, 1]`.
    pub score: f64,
    /// `true` flags a predicted misperception.
    pub label: bool,
    /// Normalized firing strengths, aligned with [`FuzzyMonitorModel::clouds`].
    pub firing: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    Created { id: u64 },
    Updated { id: u64 },
    Merged { kept: u64, absorbed: u64 },
    Pruned { id: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AccuracySnapshot {
    /// `None` until the first test.
    pub cumulative: Option<f64>,
    pub windowed: Option<f64>,
    pub window_full: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    /// Prediction made before training; `None` when the model was empty.
    pub predicted: Option<bool>,
    pub correct: Option<bool>,
    pub actions: Vec<Action>,
    pub accuracy: AccuracySnapshot,
    pub human_review_due: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineReport {
    pub merged: Option<(u64, u64)>,
    pub pruned: Option<u64>,
}

/// Test-then-train bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prequential {
    pub tests: u64,
    pub hits: u64,
    pub recent: VecDeque<bool>,
    pub recent_hits: u64,
}

impl Prequential {
    fn new() -> Self {
        Self {
            tests: 0,
            hits: 0,
            recent: VecDeque::new(),
            recent_hits: 0,
        }
    }

    fn record(&mut self, hit: bool, window: usize) {
        self.tests += 1;
        self.hits += u64::from(hit);
        self.recent.push_back(hit);
        self.recent_hits += u64::from(hit);
        while self.recent.len() > window {
            if self.recent.pop_front() == Some(true) {
                self.recent_hits -= 1;
            }
        }
    }

    fn snapshot(&self, window: usize) -> AccuracySnapshot {
        if self.tests == 0 {
            return AccuracySnapshot::default();
        }
        AccuracySnapshot {
            cumulative: Some(self.hits as f64 / self.tests as f64),
            windowed: Some(self.recent_hits as f64 / self.recent.len() as f64),
            window_full: self.recent.len() >= window,
        }
    }
}

/// The evolving fuzzy classifier: global statistics, dataclouds and the
/// prequential accuracy state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMonitorModel {
    pub schema: FeatureSchema,
    pub params: Hyperparameters,
    pub seed: u64,
    pub global: GlobalStats,
    pub clouds: Vec<Datacloud>,
    pub next_id: u64,
    pub dropped_by_prune: u64,
    pub prequential: Prequential,
}

impl FuzzyMonitorModel {
    pub fn new(schema: FeatureSchema, params: Hyperparameters, seed: u64) -> Result<Self, EngineError> {
        params.validate()?;
        let violations = schema.validate();
        if let Some(v) = violations.first() {
            return Err(EngineError::InvalidSchema(v.to_string()));
        }
        let dim = schema.dim();
        Ok(Self {
            schema,
            params,
            seed,
            global: GlobalStats::new(dim),
            clouds: Vec::new(),
            next_id: 0,
            dropped_by_prune: 0,
            prequential: Prequential::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.global.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clouds.is_empty()
    }

    pub fn cloud(&self, id: u64) -> Option<&Datacloud> {
        self.clouds.iter().find(|c| c.id == id)
    }

    /// Current variance floor shared by every cloud.
    pub fn variance_floor(&self) -> f64 {
        if self.global.n_seen == 0 {
            return MIN_VARIANCE;
        }
        (self.params.var_floor_ratio * self.global.variance()).max(MIN_VARIANCE)
    }

    pub fn cloud_variance(&self, cloud: &Datacloud) -> f64 {
        cloud.variance(self.variance_floor())
    }

    pub fn membership(&self, cloud: &Datacloud, o: &[f64]) -> f64 {
        cloud.membership(o, self.variance_floor())
    }

    pub fn global_density(&self, o: &[f64]) -> Result<f64, EngineError> {
        self.global.density(o)
    }

    fn check_dim(&self, o: &[f64]) -> Result<(), EngineError> {
        if o.len() != self.dim() {
            return Err(EngineError::SchemaMismatch {
                expected: self.dim(),
                got: o.len(),
            });
        }
        Ok(())
    }

    fn firing(&self, o: &[f64]) -> Vec<f64> {
        let floor = self.variance_floor();
        let mut mu: Vec<f64> = self.clouds.iter().map(|c| c.membership(o, floor)).collect();
        let total: f64 = mu.iter().sum();
        for m in &mut mu {
            *m /= total;
        }
        mu
    }

    /// Weighted-sum defuzzification; scores of 0.5 and above flag a
    /// misperception.
    pub fn predict(&self, o: &[f64]) -> Result<Prediction, EngineError> {
        self.check_dim(o)?;
        if self.clouds.is_empty() {
            return Err(EngineError::Untrained);
        }
        let firing = self.firing(o);
        let raw: f64 = self
            .clouds
            .iter()
            .zip(&firing)
            .map(|(c, l)| l * c.consequent.output(o))
            .sum();
        let score = raw.clamp(0.0, 1.0);
        Ok(Prediction {
            score,
            label: score >= 0.5,
            firing,
        })
    }

    /// Test-then-train step on one sample.
    pub fn learn_one(&mut self, o: &[f64], label: Label) -> Result<UpdateOutcome, EngineError> {
        self.check_dim(o)?;
        let mut actions = Vec::new();

        // test: the prediction only ever sees the model state before this sample
        let predicted = if self.clouds.is_empty() {
            None
        } else {
            Some(self.predict(o)?.label)
        };
        let correct = predicted.map(|p| p == label.mp);
        if let Some(hit) = correct {
            self.prequential.record(hit, self.params.window);
        }

        self.global.update(o);
        match self.creation_or_assignment(o)? {
            None => {
                let id = self.create_cloud(o, label, Origin::Discovered);
                actions.push(Action::Created { id });
            }
            Some(k) => {
                let c = &mut self.clouds[k];
                c.absorb(o, label.mp, label.hmp);
                actions.push(Action::Updated { id: c.id });
            }
        }

        let x = extend(o);
        let target = if label.mp { 1.0 } else { 0.0 };
        let firing = self.firing(o);
        for (c, l) in self.clouds.iter_mut().zip(firing) {
            c.consequent.update(&x, l, target);
            c.accumulated_firing += l;
        }

        let report = self.refine();
        if let Some((kept, absorbed)) = report.merged {
            actions.push(Action::Merged { kept, absorbed });
        }
        if let Some(id) = report.pruned {
            actions.push(Action::Pruned { id });
        }

        let accuracy = self.rolling_accuracy();
        let human_review_due =
            accuracy.window_full && accuracy.windowed.is_some_and(|w| w >= self.params.accuracy_target);
        Ok(UpdateOutcome {
            predicted,
            correct,
            actions,
            accuracy,
            human_review_due,
        })
    }

    /// Convenience wrapper taking the label from the observation's record.
    pub fn learn(&mut self, o: &ObservationVector) -> Result<UpdateOutcome, EngineError> {
        self.learn_one(o.as_slice(), Label::from(o.source.as_ref()))
    }

    /// `None` means a new cloud is due; otherwise the index of the winning cloud.
    ///
    /// A new cloud is created when the global density of `o` exceeds that of
    /// every prototype or falls below all of them, or when no cloud's
    /// membership reaches the belonging threshold.
    fn creation_or_assignment(&self, o: &[f64]) -> Result<Option<usize>, EngineError> {
        if self.clouds.is_empty() {
            return Ok(None);
        }
        let d = self.global.density(o)?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &self.clouds {
            let dp = self.global.density(&c.prototype)?;
            lo = lo.min(dp);
            hi = hi.max(dp);
        }
        if d > hi || d < lo {
            return Ok(None);
        }
        let floor = self.variance_floor();
        let mut best = 0;
        let mut best_mu = f64::NEG_INFINITY;
        for (i, c) in self.clouds.iter().enumerate() {
            let mu = c.membership(o, floor);
            // strict comparison keeps the lowest id on ties (clouds are id-ordered)
            if mu > best_mu {
                best = i;
                best_mu = mu;
            }
        }
        if best_mu < self.params.belonging_threshold {
            return Ok(None);
        }
        Ok(Some(best))
    }

    fn create_cloud(&mut self, o: &[f64], label: Label, origin: Origin) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let intercept = if label.mp { 1.0 } else { 0.0 };
        let consequent = Consequent::new(o.len() + 1, intercept, self.params.omega0);
        let mut c = Datacloud::new(id, o, consequent, self.global.n_seen, origin);
        c.count_label(label.mp, label.hmp);
        self.clouds.push(c);
        id
    }

    /// Adds an expert-provided prototype as a new cloud whose consequent is
    /// the constant `label.mp`. The record counts as one observed sample.
    pub fn seed_prototype(&mut self, record: &RawRecord, label: Label) -> Result<u64, EngineError> {
        let o = self
            .schema
            .encode_values(record)
            .map_err(|e| EngineError::Encode(e.to_string()))?;
        self.check_dim(&o)?;
        self.global.update(&o);
        Ok(self.create_cloud(&o, label, Origin::UserSeeded))
    }

    /// At most one merge followed by at most one prune.
    pub fn refine(&mut self) -> RefineReport {
        let mut report = RefineReport::default();
        let floor = self.variance_floor();

        let mut candidate: Option<(usize, usize, f64)> = None;
        for i in 0..self.clouds.len() {
            for j in i + 1..self.clouds.len() {
                let (a, b) = (&self.clouds[i], &self.clouds[j]);
                let mu_ab = a.membership(&b.prototype, floor);
                let mu_ba = b.membership(&a.prototype, floor);
                let m = mu_ab.min(mu_ba);
                if mu_ab > self.params.merge_threshold
                    && mu_ba > self.params.merge_threshold
                    && candidate.is_none_or(|(_, _, best)| m > best)
                {
                    candidate = Some((i, j, m));
                }
            }
        }
        if let Some((i, j, _)) = candidate {
            let merged = self.clouds[i].merged_with(&self.clouds[j]);
            let absorbed = if merged.id == self.clouds[i].id {
                self.clouds[j].id
            } else {
                self.clouds[i].id
            };
            report.merged = Some((merged.id, absorbed));
            self.clouds[i] = merged;
            self.clouds.remove(j);
            // keep id order
            self.clouds.sort_by_key(|c| c.id);
        }

        let n = self.global.n_seen;
        let mut worst: Option<(usize, f64)> = None;
        for (i, c) in self.clouds.iter().enumerate() {
            if c.support < self.params.min_support_eval || n <= c.creation_index {
                continue;
            }
            let utility = c.accumulated_firing / (n - c.creation_index) as f64;
            if utility < self.params.util_threshold && worst.is_none_or(|(_, u)| utility < u) {
                worst = Some((i, utility));
            }
        }
        if let Some((i, _)) = worst {
            let c = self.clouds.remove(i);
            self.dropped_by_prune += c.support;
            report.pruned = Some(c.id);
        }
        report
    }

    pub fn rolling_accuracy(&self) -> AccuracySnapshot {
        self.prequential.snapshot(self.params.window)
    }

    pub fn total_support(&self) -> u64 {
        self.clouds.iter().map(|c| c.support).sum()
    }
}
