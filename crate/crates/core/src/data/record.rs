use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::DataError;

/// A raw field value as it appears in a record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl RawValue {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            RawValue::Bool(b) => Some(*b),
            RawValue::Text(s) => match s.to_ascii_lowercase().as_str() {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            },
            RawValue::Number(_) => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            RawValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    /// Infers a typed value from an untyped text cell.
    pub fn infer(cell: &str) -> Self {
        match cell {
            "true" | "True" | "TRUE" => RawValue::Bool(true),
            "false" | "False" | "FALSE" => RawValue::Bool(false),
            _ => match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => RawValue::Number(v),
                _ => RawValue::Text(cell.to_string()),
            },
        }
    }
}

impl fmt::Display for RawValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawValue::Bool(b) => write!(f, "{b}"),
            RawValue::Number(v) => write!(f, "{v}"),
            RawValue::Text(s) => f.write_str(s),
        }
    }
}

/// One observed frame: operating conditions plus the perception outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    /// Feature name to raw value, in file order.
    pub values: IndexMap<String, RawValue>,
    /// Misperception flag.
    pub mp: bool,
    /// Hazardous misperception flag; implies `mp`.
    pub hmp: bool,
    pub episode: u64,
    pub frame: u64,
    /// Optional pointer to the sensor input (e.g. an image path).
    pub exemplar: Option<String>,
}

impl RawRecord {
    pub fn new(
        values: IndexMap<String, RawValue>,
        mp: bool,
        hmp: bool,
        episode: u64,
        frame: u64,
    ) -> Result<Self, DataError> {
        if hmp && !mp {
            return Err(DataError::HazardWithoutMisperception { episode, frame });
        }
        Ok(Self {
            values,
            mp,
            hmp,
            episode,
            frame,
            exemplar: None,
        })
    }

    pub fn with_exemplar(mut self, exemplar: impl Into<String>) -> Self {
        self.exemplar = Some(exemplar.into());
        self
    }
}

/// Encoded operating-condition vector with a handle on its source record.
#[derive(Debug, Clone)]
pub struct ObservationVector {
    pub values: Vec<f64>,
    pub source: Arc<RawRecord>,
}

impl ObservationVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn mp(&self) -> bool {
        self.source.mp
    }

    pub fn hmp(&self) -> bool {
        self.source.hmp
    }
}

impl std::ops::Deref for ObservationVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}
