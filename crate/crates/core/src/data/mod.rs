//! Feature schema, record ingestion, encoding and dataset splitting.

mod io;
mod record;
mod schema;
mod split;

use std::fmt;

use thiserror::Error;

pub use io::{read_records, record_stream, to_json_line, write_records, write_records_to, Format, ReadMode, ReadOutcome};
pub use record::{ObservationVector, RawRecord, RawValue};
pub use schema::{encode, encode_all, FeatureDef, FeatureKind, FeatureSchema, Violation};
pub use split::split;

/// A malformed input line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl LineError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("write failed: {0}")]
    Write(String),
    #[error("parse error at {0}")]
    Parse(LineError),
    #[error("episode {episode} frame {frame}: hmp set without mp")]
    HazardWithoutMisperception { episode: u64, frame: u64 },
    #[error("train fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("dataset is empty")]
    EmptyDataset,
}

impl DataError {
    fn write(e: std::io::Error) -> Self {
        DataError::Write(e.to_string())
    }

    fn csv(e: csv::Error) -> Self {
        DataError::Write(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("record lacks feature \"{0}\"")]
    MissingFeature(String),
    #[error("feature \"{feature}\" expects a {expected} value")]
    KindMismatch { feature: String, expected: &'static str },
    #[error("feature \"{feature}\": value \"{value}\" is not in the schema")]
    UnknownCategory { feature: String, value: String },
}
