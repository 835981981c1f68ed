//! Interpretable fuzzy monitors for ML perception components.
//!
//! The crate learns an evolving Takagi-Sugeno classifier from streamed
//! (operating condition, misperception) records, turns the learned
//! dataclouds into reliability evidence, a safety-case bound and an ODD
//! specification, and benchmarks the classifier against baseline runtime
//! monitors.

pub mod data;
pub mod engine;
pub mod eval;
pub mod evidence;
pub mod odd;
pub mod sim;
pub mod workflow;
