use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, EvalRecord, Monitor};
use crate::engine::{FuzzyMonitorModel, Label};

/// Flags each input independently with probability `p`.
#[derive(Debug, Clone)]
pub struct RandomMonitor {
    p: f64,
    rng: ChaCha8Rng,
}

impl RandomMonitor {
    pub fn new(seed: u64, p: f64) -> Result<Self, EvalError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(EvalError::Invalid(format!("probability {p} outside [0, 1]")));
        }
        Ok(Self {
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl Monitor for RandomMonitor {
    fn name(&self) -> &str {
        "random"
    }

    fn fit(&mut self, _data: &[EvalRecord]) -> Result<(), EvalError> {
        Ok(())
    }

    fn predict(&mut self, _o: &[f64]) -> Result<bool, EvalError> {
        Ok(self.rng.gen_bool(self.p))
    }
}

/// Smallest per-feature variance used by the naive Bayes likelihoods.
pub const GNB_VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassModel {
    count: u64,
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl ClassModel {
    /// Order-independent fit: each feature is summed in sorted order.
    fn fit(rows: &[&[f64]], dim: usize) -> Self {
        let n = rows.len() as f64;
        let mut mean = Vec::with_capacity(dim);
        let mut var = Vec::with_capacity(dim);
        let mut col = Vec::with_capacity(rows.len());
        for d in 0..dim {
            col.clear();
            col.extend(rows.iter().map(|r| r[d]));
            col.sort_by(f64::total_cmp);
            let m = col.iter().sum::<f64>() / n;
            let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            mean.push(m);
            var.push(v.max(GNB_VAR_FLOOR));
        }
        Self {
            count: rows.len() as u64,
            mean,
            var,
        }
    }

    fn log_joint(&self, o: &[f64], total: u64) -> f64 {
        let prior = (self.count as f64 / total as f64).ln();
        let ll: f64 = o
            .iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((x, m), v)| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v))
            .sum();
        prior + ll
    }
}

/// Gaussian naive Bayes over the encoded features.
#[derive(Debug, Clone, Default)]
pub struct GaussianNaiveBayes {
    classes: Option<[Option<ClassModel>; 2]>,
}

impl GaussianNaiveBayes {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set when training saw a single class; predictions are then constant.
    pub fn degenerate(&self) -> Option<bool> {
        match &self.classes {
            Some([Some(_), None]) => Some(false),
            Some([None, Some(_)]) => Some(true),
            _ => None,
        }
    }

    pub fn class_means(&self, class: bool) -> Option<&[f64]> {
        self.classes.as_ref()?[class as usize].as_ref().map(|c| c.mean.as_slice())
    }

    pub fn class_variances(&self, class: bool) -> Option<&[f64]> {
        self.classes.as_ref()?[class as usize].as_ref().map(|c| c.var.as_slice())
    }
}

impl Monitor for GaussianNaiveBayes {
    fn name(&self) -> &str {
        "gnb"
    }

    fn fit(&mut self, data: &[EvalRecord]) -> Result<(), EvalError> {
        if data.is_empty() {
            return Err(EvalError::EmptyDataset);
        }
        let dim = data[0].o.len();
        let by_class = |c: bool| -> Vec<&[f64]> { data.iter().filter(|r| r.tau_mp == c).map(|r| r.o.as_slice()).collect() };
        let fit = |rows: Vec<&[f64]>| (!rows.is_empty()).then(|| ClassModel::fit(&rows, dim));
        self.classes = Some([fit(by_class(false)), fit(by_class(true))]);
        Ok(())
    }

    /// Posterior arg-max; ties go to class 1.
    fn predict(&mut self, o: &[f64]) -> Result<bool, EvalError> {
        let classes = self.classes.as_ref().ok_or_else(|| EvalError::NotFitted("gnb".into()))?;
        match classes {
            [Some(c0), Some(c1)] => {
                let total = c0.count + c1.count;
                Ok(c1.log_joint(o, total) >= c0.log_joint(o, total))
            }
            [Some(_), None] => Ok(false),
            [None, Some(_)] => Ok(true),
            [None, None] => Err(EvalError::NotFitted("gnb".into())),
        }
    }

    fn notes(&self) -> Vec<String> {
        match self.degenerate() {
            Some(c) => vec![format!("gnb: training saw only class {}, predictions are constant", c as u8)],
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: bool,
        count: u64,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// `o[feature] <= threshold`
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn predict(&self, o: &[f64]) -> bool {
        match self {
            TreeNode::Leaf { label, .. } => *label,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if o[*feature] <= *threshold {
                    left.predict(o)
                } else {
                    right.predict(o)
                }
            }
        }
    }
}

/// CART classifier with Gini impurity. Ties between splits go to the lowest
/// feature index, then the lowest threshold; leaf ties go to class 1.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    pub max_depth: usize,
    pub min_leaf: usize,
    root: Option<TreeNode>,
}

impl Default for DecisionTree {
    fn default() -> Self {
        Self::new(5, 5)
    }
}

fn gini(pos: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl DecisionTree {
    pub fn new(max_depth: usize, min_leaf: usize) -> Self {
        Self {
            max_depth,
            min_leaf: min_leaf.max(1),
            root: None,
        }
    }

    pub fn root(&self) -> Option<&TreeNode> {
        self.root.as_ref()
    }

    fn grow(&self, data: &[EvalRecord], idx: &mut [usize], depth: usize) -> TreeNode {
        let n = idx.len() as u64;
        let pos = idx.iter().filter(|&&i| data[i].tau_mp).count() as u64;
        let leaf = TreeNode::Leaf {
            label: 2 * pos >= n,
            count: n,
        };
        if depth >= self.max_depth || pos == 0 || pos == n || idx.len() < 2 * self.min_leaf {
            return leaf;
        }
        let parent = gini(pos, n);
        let dim = data[idx[0]].o.len();
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..dim {
            idx.sort_by(|&a, &b| data[a].o[f].total_cmp(&data[b].o[f]));
            let mut left_pos = 0u64;
            for k in 0..idx.len() - 1 {
                if data[idx[k]].tau_mp {
                    left_pos += 1;
                }
                let (x, next) = (data[idx[k]].o[f], data[idx[k + 1]].o[f]);
                let nl = (k + 1) as u64;
                if x == next || (nl as usize) < self.min_leaf || idx.len() - (nl as usize) < self.min_leaf {
                    continue;
                }
                let nr = n - nl;
                let child = (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(pos - left_pos, nr)) / n as f64;
                let gain = parent - child;
                if gain > 0.0 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, x + (next - x) / 2.0));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        let mut left: Vec<usize> = idx.iter().copied().filter(|&i| data[i].o[feature] <= threshold).collect();
        let mut right: Vec<usize> = idx.iter().copied().filter(|&i| data[i].o[feature] > threshold).collect();
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(self.grow(data, &mut left, depth + 1)),
            right: Box::new(self.grow(data, &mut right, depth + 1)),
        }
    }
}

impl Monitor for DecisionTree {
    fn name(&self) -> &str {
        "tree"
    }

    fn fit(&mut self, data: &[EvalRecord]) -> Result<(), EvalError> {
        if data.is_empty() {
            return Err(EvalError::EmptyDataset);
        }
        let mut idx: Vec<usize> = (0..data.len()).collect();
        self.root = Some(self.grow(data, &mut idx, 0));
        Ok(())
    }

    fn predict(&mut self, o: &[f64]) -> Result<bool, EvalError> {
        self.root
            .as_ref()
            .map(|r| r.predict(o))
            .ok_or_else(|| EvalError::NotFitted("tree".into()))
    }
}

/// The learned fuzzy classifier used as a monitor. Prediction is read-only.
#[derive(Debug, Clone)]
pub struct FuzzyMonitor {
    model: FuzzyMonitorModel,
}

impl FuzzyMonitor {
    pub fn new(model: FuzzyMonitorModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &FuzzyMonitorModel {
        &self.model
    }

    pub fn into_model(self) -> FuzzyMonitorModel {
        self.model
    }
}

impl Monitor for FuzzyMonitor {
    fn name(&self) -> &str {
        "fuzzy"
    }

    /// Continues test-then-train learning over `data`.
    fn fit(&mut self, data: &[EvalRecord]) -> Result<(), EvalError> {
        for r in data {
            self.model.learn_one(&r.o, Label::new(r.tau_mp, r.tau_hmp))?;
        }
        Ok(())
    }

    fn predict(&mut self, o: &[f64]) -> Result<bool, EvalError> {
        Ok(self.model.predict(o)?.label)
    }
}
