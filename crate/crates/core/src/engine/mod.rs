//! The evolving fuzzy classifier.
//!
//! Each datacloud is the antecedent of a first-order Takagi-Sugeno rule
//! `IF o ~ p_k THEN phi_k = [1, o] . a_k` with membership
//! `mu_k(o) = 1 / (1 + ||o - p_k||^2 / sigma_k^2)`. Training is
//! test-then-train: every sample is first predicted, scored into the rolling
//! accuracy, and then used to update the global statistics, the cloud
//! structure and all consequents (fuzzily weighted RLS).

mod cloud;
mod model;
mod persist;
mod rls;
mod stats;

use thiserror::Error;

pub use cloud::{membership_value, sq_dist, sq_norm, Datacloud, Origin};
pub use model::{
    AccuracySnapshot, Action, FuzzyMonitorModel, Hyperparameters, Label, Prediction, Prequential, RefineReport,
    UpdateOutcome,
};
pub use persist::{load_state, save_state, FORMAT_VERSION};
pub use rls::{extend, Consequent};
pub use stats::{GlobalStats, MIN_VARIANCE};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("model has no dataclouds yet")]
    Untrained,
    #[error("global density is undefined before the first sample")]
    NoSamples,
    #[error("observation has {got} components, the model expects {expected}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("record does not fit the model schema: {0}")]
    Encode(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("model document version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("corrupted model document: {0}")]
    Corrupt(String),
}
