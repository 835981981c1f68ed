//! Feature schema and the deterministic encoding of operating conditions.
//!
//! Every feature occupies a contiguous block of the encoded vector, in schema
//! order: a one-hot block per categorical feature, one component per boolean
//! and one min-max scaled component per numeric feature. All components lie
//! in `[0, 1]`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::record::{ObservationVector, RawRecord, RawValue};
use super::EncodeError;

/// Kind of a single feature, with its kind-specific domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical { values: Vec<String> },
    Boolean,
    /// Declared range `[lo, hi]` in the raw field's physical units.
    Numeric { range: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl FeatureDef {
    pub fn categorical<S: Into<String>>(name: &str, values: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.to_string(),
            kind: FeatureKind::Categorical {
                values: values.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn boolean(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: FeatureKind::Boolean,
        }
    }

    pub fn numeric(name: &str, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: FeatureKind::Numeric { range: [lo, hi] },
        }
    }

    /// Number of encoded components this feature occupies.
    pub fn width(&self) -> usize {
        match &self.kind {
            FeatureKind::Categorical { values } => values.len(),
            FeatureKind::Boolean | FeatureKind::Numeric { .. } => 1,
        }
    }
}

/// A single schema problem reported by [`FeatureSchema::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateName(String),
    EmptyName,
    EmptyValueList(String),
    DuplicateValue { feature: String, value: String },
    InvalidRange { feature: String, lo: f64, hi: f64 },
    NoFeatures,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName(n) => write!(f, "duplicate name \"{n}\""),
            Violation::EmptyName => write!(f, "feature with empty name"),
            Violation::EmptyValueList(n) => write!(f, "categorical feature \"{n}\" has no values"),
            Violation::DuplicateValue { feature, value } => {
                write!(f, "categorical feature \"{feature}\" lists \"{value}\" twice")
            }
            Violation::InvalidRange { feature, lo, hi } => {
                write!(f, "numeric feature \"{feature}\": lo < hi required, got [{lo}, {hi}]")
            }
            Violation::NoFeatures => write!(f, "schema declares no features"),
        }
    }
}

/// Ordered list of feature definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureDef>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureDef>) -> Self {
        Self { features }
    }

    /// The eight-attribute driving schema: weather, scene and time of day as
    /// categoricals, blur and low-contrast flags, and three image statistics.
    pub fn driving_default() -> Self {
        Self::new(vec![
            FeatureDef::categorical(
                "weather",
                ["clear", "snowy", "overcast", "partly cloudy", "rainy"],
            ),
            FeatureDef::categorical("scene", ["city-street", "highway", "residential"]),
            FeatureDef::categorical("timeofday", ["daytime", "dawn/dusk", "night"]),
            FeatureDef::boolean("blurry"),
            FeatureDef::boolean("low_contrast"),
            FeatureDef::numeric("brightness", 0.0, 255.0),
            FeatureDef::numeric("clearness_score", 0.0, 1.0),
            FeatureDef::numeric("contrast_score", 0.0, 8.0),
        ])
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Returns every violation found; an empty list means the schema is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.features.is_empty() {
            out.push(Violation::NoFeatures);
        }
        let mut seen = HashSet::new();
        for f in &self.features {
            if f.name.is_empty() {
                out.push(Violation::EmptyName);
            }
            if !seen.insert(f.name.as_str()) {
                out.push(Violation::DuplicateName(f.name.clone()));
            }
            match &f.kind {
                FeatureKind::Categorical { values } => {
                    if values.is_empty() {
                        out.push(Violation::EmptyValueList(f.name.clone()));
                    }
                    let mut vs = HashSet::new();
                    for v in values {
                        if !vs.insert(v.as_str()) {
                            out.push(Violation::DuplicateValue {
                                feature: f.name.clone(),
                                value: v.clone(),
                            });
                        }
                    }
                }
                FeatureKind::Numeric { range: [lo, hi] } => {
                    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                        out.push(Violation::InvalidRange {
                            feature: f.name.clone(),
                            lo: *lo,
                            hi: *hi,
                        });
                    }
                }
                FeatureKind::Boolean => {}
            }
        }
        out
    }

    /// Encoded dimensionality.
    pub fn dim(&self) -> usize {
        self.features.iter().map(FeatureDef::width).sum()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureDef> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Offset of the first encoded component of feature `index`.
    pub fn offset(&self, index: usize) -> usize {
        self.features[..index].iter().map(FeatureDef::width).sum()
    }

    /// Encoded component range of the named feature.
    pub fn block(&self, name: &str) -> Option<std::ops::Range<usize>> {
        let i = self.index_of(name)?;
        let start = self.offset(i);
        Some(start..start + self.features[i].width())
    }

    pub fn categorical_features(&self) -> impl Iterator<Item = (usize, &FeatureDef)> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f.kind, FeatureKind::Categorical { .. }))
    }

    pub fn numeric_features(&self) -> impl Iterator<Item = (usize, &FeatureDef)> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f.kind, FeatureKind::Numeric { .. }))
    }

    /// Encodes one record into a fresh vector.
    pub fn encode_values(&self, record: &RawRecord) -> Result<Vec<f64>, EncodeError> {
        let mut out = Vec::with_capacity(self.dim());
        for f in &self.features {
            let raw = record
                .values
                .get(&f.name)
                .ok_or_else(|| EncodeError::MissingFeature(f.name.clone()))?;
            match &f.kind {
                FeatureKind::Categorical { values } => {
                    let text = match raw {
                        RawValue::Text(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let hit = values.iter().position(|v| *v == text).ok_or_else(|| {
                        EncodeError::UnknownCategory {
                            feature: f.name.clone(),
                            value: text.clone(),
                        }
                    })?;
                    out.extend((0..values.len()).map(|i| if i == hit { 1.0 } else { 0.0 }));
                }
                FeatureKind::Boolean => {
                    let b = raw.as_bool().ok_or_else(|| EncodeError::KindMismatch {
                        feature: f.name.clone(),
                        expected: "boolean",
                    })?;
                    out.push(if b { 1.0 } else { 0.0 });
                }
                FeatureKind::Numeric { range: [lo, hi] } => {
                    let v = raw.as_f64().ok_or_else(|| EncodeError::KindMismatch {
                        feature: f.name.clone(),
                        expected: "numeric",
                    })?;
                    out.push(scale(v, *lo, *hi));
                }
            }
        }
        Ok(out)
    }

    /// Decodes the categorical value of feature `index` from an encoded
    /// vector: the arg-max of its one-hot block, lowest index on ties.
    pub fn decode_category<'a>(&'a self, index: usize, encoded: &[f64]) -> Option<&'a str> {
        let FeatureKind::Categorical { values } = &self.features[index].kind else {
            return None;
        };
        let start = self.offset(index);
        let block = &encoded[start..start + values.len()];
        let mut best = 0;
        for (i, v) in block.iter().enumerate() {
            if *v > block[best] {
                best = i;
            }
        }
        Some(values[best].as_str())
    }

    /// Maps an encoded numeric component back to raw units.
    pub fn decode_numeric(&self, index: usize, encoded: &[f64]) -> Option<f64> {
        let FeatureKind::Numeric { range: [lo, hi] } = self.features[index].kind else {
            return None;
        };
        Some(lo + encoded[self.offset(index)] * (hi - lo))
    }

    /// Scales a raw numeric value of feature `index` into `[0, 1]`.
    pub fn scale_numeric(&self, index: usize, raw: f64) -> Option<f64> {
        let FeatureKind::Numeric { range: [lo, hi] } = self.features[index].kind else {
            return None;
        };
        Some(scale(raw, lo, hi))
    }
}

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Encodes a record under `schema`, keeping a handle on the source record.
pub fn encode(record: &RawRecord, schema: &FeatureSchema) -> Result<ObservationVector, EncodeError> {
    let values = schema.encode_values(record)?;
    Ok(ObservationVector {
        values,
        source: Arc::new(record.clone()),
    })
}

/// Encodes all records, dropping those with values outside the schema.
/// Returns the kept observations and the number dropped.
pub fn encode_all(records: &[RawRecord], schema: &FeatureSchema) -> (Vec<ObservationVector>, usize) {
    let mut dropped = 0;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        match encode(r, schema) {
            Ok(o) => out.push(o),
            Err(e) => {
                log::debug!("dropping record (episode {}, frame {}): {e}", r.episode, r.frame);
                dropped += 1;
            }
        }
    }
    (out, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(pairs: &[(&str, RawValue)]) -> RawRecord {
        RawRecord::new(
            pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            false,
            false,
            0,
            0,
        )
        .unwrap()
    }

    fn example_record() -> RawRecord {
        rec(&[
            ("weather", RawValue::Text("clear".into())),
            ("scene", RawValue::Text("highway".into())),
            ("timeofday", RawValue::Text("daytime".into())),
            ("blurry", RawValue::Bool(false)),
            ("low_contrast", RawValue::Bool(false)),
            ("brightness", RawValue::Number(18.16)),
            ("clearness_score", RawValue::Number(0.12)),
            ("contrast_score", RawValue::Number(2.18)),
        ])
    }

    #[test]
    fn driving_schema_is_valid() {
        let s = FeatureSchema::driving_default();
        assert!(s.validate().is_empty());
        assert_eq!(s.dim(), 5 + 3 + 3 + 2 + 3);
    }

    #[test]
    fn duplicate_name_reported() {
        let s = FeatureSchema::new(vec![
            FeatureDef::categorical("weather", ["clear"]),
            FeatureDef::boolean("weather"),
        ]);
        let v = s.validate();
        assert_eq!(v, vec![Violation::DuplicateName("weather".into())]);
        assert!(v[0].to_string().contains("duplicate name"));
    }

    #[test]
    fn degenerate_range_reported() {
        let s = FeatureSchema::new(vec![FeatureDef::numeric("x", 5.0, 5.0)]);
        let v = s.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("lo < hi required"));
    }

    #[test]
    fn empty_and_duplicate_values_reported() {
        let s = FeatureSchema::new(vec![
            FeatureDef::categorical::<&str>("a", []),
            FeatureDef::categorical("b", ["x", "x"]),
        ]);
        assert_eq!(s.validate().len(), 2);
    }

    #[test]
    fn one_hot_block_for_weather() {
        let s = FeatureSchema::new(vec![FeatureDef::categorical(
            "weather",
            ["clear", "snowy", "overcast", "partly cloudy"],
        )]);
        let r = rec(&[("weather", RawValue::Text("clear".into()))]);
        assert_eq!(s.encode_values(&r).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn brightness_min_max_scaled() {
        let s = FeatureSchema::driving_default();
        let o = encode(&example_record(), &s).unwrap();
        let i = s.block("brightness").unwrap().start;
        assert!((o.values[i] - 18.16 / 255.0).abs() < 1e-12);
        assert!((o.values[i] - 0.07122).abs() < 1e-5);
        let b = s.block("blurry").unwrap().start;
        assert_eq!(o.values[b], 0.0);
    }

    #[test]
    fn out_of_range_numeric_is_clamped() {
        let s = FeatureSchema::new(vec![FeatureDef::numeric("v", 0.0, 10.0)]);
        let hi = rec(&[("v", RawValue::Number(42.0))]);
        let lo = rec(&[("v", RawValue::Number(-3.0))]);
        assert_eq!(s.encode_values(&hi).unwrap(), vec![1.0]);
        assert_eq!(s.encode_values(&lo).unwrap(), vec![0.0]);
    }

    #[test]
    fn unknown_category_is_typed_error() {
        let s = FeatureSchema::driving_default();
        let mut r = example_record();
        r.values.insert("weather".into(), RawValue::Text("undefined".into()));
        match encode(&r, &s) {
            Err(EncodeError::UnknownCategory { feature, value }) => {
                assert_eq!(feature, "weather");
                assert_eq!(value, "undefined");
            }
            other => panic!("unexpected {other:?}"),
        }
        let (kept, dropped) = encode_all(&[r, example_record()], &s);
        assert_eq!((kept.len(), dropped), (1, 1));
    }

    #[test]
    fn decode_round_trips_prototype_fields() {
        let s = FeatureSchema::driving_default();
        let o = encode(&example_record(), &s).unwrap();
        assert_eq!(s.decode_category(0, &o.values), Some("clear"));
        assert_eq!(s.decode_category(1, &o.values), Some("highway"));
        let b = s.index_of("brightness").unwrap();
        assert!((s.decode_numeric(b, &o.values).unwrap() - 18.16).abs() < 1e-9);
    }

    #[test]
    fn schema_json_round_trip() {
        let s = FeatureSchema::driving_default();
        let text = s.to_json();
        assert!(text.contains("\"kind\": \"categorical\""));
        assert_eq!(FeatureSchema::from_json(&text).unwrap(), s);
    }
}
