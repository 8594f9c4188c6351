//! Experiment orchestration for the rule-induction bench: configuration,
//! seeded multi-run execution, F1 metrics and report files.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod report;

pub use config::{EngineEntry, EvalOn, Experiment, ExperimentConfig, NamedEngine, NamedRule, RuleEntry};
pub use error::{ErrorRecord, HarnessError};
pub use experiment::{aggregate, run_experiment, run_seed, Aggregate, ExperimentReport, RunRecord};
pub use metrics::{f1_score, mean_std, Scores};
pub use report::{emit_report, Format};

/// The grid of the `repro-rq3` command when no config is given.
pub const DEFAULT_RQ3_CONFIG: &str = include_str!("../configs/rq3.toml");
