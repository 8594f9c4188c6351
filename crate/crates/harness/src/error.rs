use std::path::PathBuf;

use nesy_core::generate::DatasetError;
use nesy_core::perception::PerceptionError;
use nesy_core::reasoners::ReasonerError;
use nesy_core::rules::RuleError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("no items to score")]
    Empty,
    #[error("rule {name}: {source}")]
    Rule { name: String, source: RuleError },
    #[error("rule {rule}, profile {profile}: {source}")]
    Dataset { rule: String, profile: String, source: RuleError },
    #[error("rule {rule}, engine {engine}, profile {profile}, run {run}: {source}")]
    Run { rule: String, engine: String, profile: String, run: usize, source: ReasonerError },
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Scenes(#[from] DatasetError),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// What the command line prints on stderr when a command fails.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Io { .. } => "io",
            HarnessError::Config { .. } => "config",
            HarnessError::Invalid(_) => "invalid_input",
            HarnessError::LengthMismatch { .. } => "length_mismatch",
            HarnessError::Empty => "empty",
            HarnessError::Rule { source: RuleError::Parse { .. }, .. } => "rule_parse",
            HarnessError::Rule { .. } => "rule",
            HarnessError::Dataset { source: RuleError::Unsatisfiable { .. }, .. } => "unsatisfiable_rule",
            HarnessError::Dataset { .. } => "dataset",
            HarnessError::Run { source, .. } | HarnessError::Reasoner(source) => match source {
                ReasonerError::EmptyTrainingSet => "empty_training_set",
                ReasonerError::WidthMismatch { .. } => "width_mismatch",
                ReasonerError::NonFiniteLoss { .. } => "non_finite_loss",
                _ => "reasoner",
            },
            HarnessError::Perception(_) => "perception",
            HarnessError::Scenes(_) => "scenes",
            HarnessError::Json { .. } => "json",
            HarnessError::Csv { .. } => "csv",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord { error: self.kind(), message: self.to_string() }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
