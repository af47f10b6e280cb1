//! Experiment harness for the online matchers: synthetic data, trials against
//! the exact optimum, latency sweeps and CSV/JSON reports.

pub mod config;
pub mod generate;
pub mod report;
pub mod sweep;
pub mod trial;

pub use config::{Distribution, ExperimentConfig, OutputFormat};
pub use generate::{generate_dataset, Dataset};
pub use report::{emit_report, emit_sweep, read_report, ReportRow};
pub use sweep::{scaling_sweep, SweepResult};
pub use trial::{run_experiment, run_trial, TrialReport};
