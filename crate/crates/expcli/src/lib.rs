//! Declarative experiments over the `slowbond_core` models: run replicas in
//! parallel, persist reproducible records, derive scaling reports.

pub mod analyze;
pub mod config;
pub mod error;
pub mod records;
pub mod runner;

pub use analyze::{analyze, Analysis, AnalysisReport, AnalyzeOptions};
pub use config::{ExperimentConfig, Model, Params};
pub use error::{CliError, Result};
pub use records::{SummaryRecord, HEADER};
pub use runner::{execute, run, RunOutcome};
