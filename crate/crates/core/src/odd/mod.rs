//! ODD specifications: include lists and conditional-exclude blocks derived
//! from shortlisted dataclouds, their text format and the membership check.
//!
//! An exclude block rejects a record whose categorical values equal the
//! block's trigger and whose named numeric attributes lie within membership
//! `threshold` of the block's prototype, using the source cloud's spread on
//! those dimensions.

mod text;

use indexmap::IndexMap;
use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureKind, FeatureSchema, RawRecord, RawValue};
use crate::engine::{membership_value, FuzzyMonitorModel};
use crate::evidence::{round3, Shortlist};

pub use text::{emit, parse, ParseError};

/// Membership at or above which an exclude block applies.
pub const DEFAULT_EXCLUDE_THRESHOLD: f64 = 0.5;
/// Spread (encoded-space variance) assumed for blocks that do not state one.
pub const DEFAULT_SPREAD: f64 = 0.01;
pub const DEFAULT_GROUP: &str = "visibility";

#[derive(Debug, Error)]
pub enum OddError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature `{0}` is not categorical")]
    NotCategorical(String),
    #[error("feature `{0}` is not numeric")]
    NotNumeric(String),
    #[error("`{value}` is not a declared value of `{feature}`")]
    UnknownValue { feature: String, value: String },
    #[error("exclude block {block}: {message}")]
    Block { block: usize, message: String },
    #[error("record lacks feature `{0}`")]
    MissingValue(String),
    #[error("feature `{0}` has a non-numeric value")]
    NonNumeric(String),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludeBlock {
    /// Numeric attributes the block constrains.
    pub attributes: Vec<String>,
    /// Label for the attribute group, e.g. "visibility".
    pub group: String,
    /// Categorical values, in schema order, that activate the block.
    pub trigger: Vec<String>,
    /// Prototype values of `attributes` in raw units.
    pub values: Vec<f64>,
    pub source: Option<u64>,
    /// Variance of the source cloud on `attributes`, in encoded units.
    pub spread: Option<f64>,
    pub threshold: f64,
}

impl ExcludeBlock {
    pub fn spread_or_default(&self) -> f64 {
        self.spread.unwrap_or(DEFAULT_SPREAD)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OddSpecification {
    /// Categorical feature to its sorted allowed values.
    pub includes: IndexMap<String, Vec<String>>,
    pub excludes: Vec<ExcludeBlock>,
}

impl OddSpecification {
    pub fn is_empty(&self) -> bool {
        self.includes.is_empty() && self.excludes.is_empty()
    }

    /// Sets the allowed values of `feature`, sorted and deduplicated.
    pub fn include<S: Into<String>>(&mut self, feature: &str, values: impl IntoIterator<Item = S>) {
        let mut v: Vec<String> = values.into_iter().map(Into::into).collect();
        v.sort();
        v.dedup();
        self.includes.insert(feature.to_string(), v);
    }

    /// Checks names and values against `schema`.
    pub fn validate(&self, schema: &FeatureSchema) -> Result<(), OddError> {
        for (name, values) in &self.includes {
            let f = schema.feature(name).ok_or_else(|| OddError::UnknownFeature(name.clone()))?;
            let FeatureKind::Categorical { values: declared } = &f.kind else {
                return Err(OddError::NotCategorical(name.clone()));
            };
            if let Some(v) = values.iter().find(|v| !declared.contains(v)) {
                return Err(OddError::UnknownValue {
                    feature: name.clone(),
                    value: v.clone(),
                });
            }
        }
        let cats: Vec<_> = schema.categorical_features().collect();
        for (b, block) in self.excludes.iter().enumerate() {
            let fail = |message: String| OddError::Block { block: b, message };
            if block.attributes.is_empty() {
                return Err(fail("no attributes".into()));
            }
            if block.attributes.len() != block.values.len() {
                return Err(fail(format!(
                    "{} attributes but {} values",
                    block.attributes.len(),
                    block.values.len()
                )));
            }
            for a in &block.attributes {
                let f = schema.feature(a).ok_or_else(|| OddError::UnknownFeature(a.clone()))?;
                if !matches!(f.kind, FeatureKind::Numeric { .. }) {
                    return Err(OddError::NotNumeric(a.clone()));
                }
            }
            if block.trigger.len() != cats.len() {
                return Err(fail(format!(
                    "trigger has {} values, the schema has {} categorical features",
                    block.trigger.len(),
                    cats.len()
                )));
            }
            for ((_, f), v) in cats.iter().zip(&block.trigger) {
                if let FeatureKind::Categorical { values } = &f.kind {
                    if !values.contains(v) {
                        return Err(OddError::UnknownValue {
                            feature: f.name.clone(),
                            value: v.clone(),
                        });
                    }
                }
            }
            if !(block.threshold > 0.0 && block.threshold <= 1.0) {
                return Err(fail(format!("threshold {} outside (0, 1]", block.threshold)));
            }
            if block.spread.is_some_and(|s| !(s > 0.0)) {
                return Err(fail("spread must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeriveOptions {
    pub group: String,
    pub threshold: f64,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        Self {
            group: DEFAULT_GROUP.to_string(),
            threshold: DEFAULT_EXCLUDE_THRESHOLD,
        }
    }
}

/// Builds the ODD from a shortlist: includes are the union of prototype
/// categories over included clouds; each excluded cloud whose
/// unreliability is established becomes one conditional-exclude block over
/// all numeric features. Inconclusive clouds add no statement.
pub fn derive_odd(
    model: &FuzzyMonitorModel,
    shortlist: &Shortlist,
    schema: &FeatureSchema,
    options: &DeriveOptions,
) -> Result<OddSpecification, OddError> {
    let mut spec = OddSpecification::default();
    let cats: Vec<_> = schema.categorical_features().collect();
    let nums: Vec<_> = schema.numeric_features().collect();
    let dims: Vec<usize> = nums.iter().map(|(i, _)| schema.offset(*i)).collect();
    let floor = model.variance_floor();

    let included: Vec<_> = model.clouds.iter().filter(|c| shortlist.is_included(c.id)).collect();
    if included.is_empty() {
        warn!("no included clouds; the ODD has no include statements");
    } else {
        for (i, f) in &cats {
            let values = included
                .iter()
                .filter_map(|c| schema.decode_category(*i, &c.prototype))
                .map(str::to_string);
            spec.include(&f.name, values.collect::<Vec<_>>());
        }
    }

    if nums.is_empty() {
        return Ok(spec);
    }
    let blocked = |id: u64| shortlist.evidence.iter().any(|e| e.id == id && !e.reliable && e.unreliable);
    for c in model.clouds.iter().filter(|c| blocked(c.id)) {
        spec.excludes.push(ExcludeBlock {
            attributes: nums.iter().map(|(_, f)| f.name.clone()).collect(),
            group: options.group.clone(),
            trigger: cats
                .iter()
                .map(|(i, _)| schema.decode_category(*i, &c.prototype).unwrap_or_default().to_string())
                .collect(),
            values: nums
                .iter()
                .map(|(i, _)| round3(schema.decode_numeric(*i, &c.prototype).unwrap_or_default()))
                .collect(),
            source: Some(c.id),
            spread: Some(c.restricted_variance(&dims, floor)),
            threshold: options.threshold,
        });
    }
    Ok(spec)
}

/// Outcome of an ODD check on one record.
#[derive(Debug, Clone, PartialEq)]
pub enum OddDecision {
    Within,
    /// A categorical value is missing from its include list.
    NotIncluded { feature: String, value: String },
    /// Exclude block `block` applies with the given membership.
    Excluded {
        block: usize,
        source: Option<u64>,
        membership: f64,
    },
}

impl OddDecision {
    pub fn is_within(&self) -> bool {
        matches!(self, OddDecision::Within)
    }
}

fn text_of(record: &RawRecord, feature: &str) -> Result<String, OddError> {
    match record.values.get(feature) {
        Some(RawValue::Text(s)) => Ok(s.clone()),
        Some(other) => Ok(other.to_string()),
        None => Err(OddError::MissingValue(feature.to_string())),
    }
}

/// Checks one record against an ODD specification.
///
/// Features without an include statement are unconstrained.
pub fn within_odd(spec: &OddSpecification, record: &RawRecord, schema: &FeatureSchema) -> Result<OddDecision, OddError> {
    for (feature, allowed) in &spec.includes {
        if schema.index_of(feature).is_none() {
            return Err(OddError::UnknownFeature(feature.clone()));
        }
        let value = text_of(record, feature)?;
        if allowed.binary_search(&value).is_err() {
            return Ok(OddDecision::NotIncluded {
                feature: feature.clone(),
                value,
            });
        }
    }
    if spec.excludes.is_empty() {
        return Ok(OddDecision::Within);
    }
    let record_trigger: Vec<String> = schema
        .categorical_features()
        .map(|(_, f)| text_of(record, &f.name))
        .collect::<Result<_, _>>()?;
    for (b, block) in spec.excludes.iter().enumerate() {
        if block.trigger != record_trigger {
            continue;
        }
        let mut point = Vec::with_capacity(block.attributes.len());
        let mut proto = Vec::with_capacity(block.attributes.len());
        for (name, raw_proto) in block.attributes.iter().zip(&block.values) {
            let i = schema.index_of(name).ok_or_else(|| OddError::UnknownFeature(name.clone()))?;
            let raw = record
                .values
                .get(name)
                .ok_or_else(|| OddError::MissingValue(name.clone()))?
                .as_f64()
                .ok_or_else(|| OddError::NonNumeric(name.clone()))?;
            point.push(schema.scale_numeric(i, raw).ok_or_else(|| OddError::NotNumeric(name.clone()))?);
            proto.push(schema.scale_numeric(i, *raw_proto).ok_or_else(|| OddError::NotNumeric(name.clone()))?);
        }
        let mu = membership_value(&point, &proto, block.spread_or_default());
        if mu >= block.threshold {
            return Ok(OddDecision::Excluded {
                block: b,
                source: block.source,
                membership: mu,
            });
        }
    }
    Ok(OddDecision::Within)
}

/// Per-record ODD membership of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct OddFilter {
    pub within: Vec<bool>,
}

impl OddFilter {
    pub fn retained(&self) -> usize {
        self.within.iter().filter(|w| **w).count()
    }

    pub fn total(&self) -> usize {
        self.within.len()
    }

    /// Fraction of records inside the ODD; 0 for an empty dataset.
    pub fn retention(&self) -> f64 {
        if self.within.is_empty() {
            0.0
        } else {
            self.retained() as f64 / self.total() as f64
        }
    }

    /// The records marked as within the ODD.
    pub fn apply<'a, T>(&self, items: &'a [T]) -> Vec<&'a T> {
        items.iter().zip(&self.within).filter(|(_, w)| **w).map(|(x, _)| x).collect()
    }
}

pub fn filter_records(spec: &OddSpecification, records: &[RawRecord], schema: &FeatureSchema) -> Result<OddFilter, OddError> {
    let within = records
        .iter()
        .map(|r| within_odd(spec, r, schema).map(|d| d.is_within()))
        .collect::<Result<_, _>>()?;
    Ok(OddFilter { within })
}
