//! Seeded experiment harness for the localtest testers: configs, input
//! generators, trial execution and CSV/JSON reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod generators;
pub mod harness;
pub mod report;

pub use config::{ExperimentConfig, InputSpec, NSpec, Overrides, PropertySpec};
pub use error::HarnessError;
pub use generators::{Base, GeneratorSpec};
pub use harness::{bench_scaling, run};
pub use report::{Aggregate, Report, TrialRow, VerdictLabel};
