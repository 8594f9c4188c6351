//! Rule-induction engines behind one fit/predict contract.

pub mod bn;
pub mod dt;
pub mod engine;
pub mod ilp;
pub mod nscl;

pub use bn::{bn_fit, BnConfig, NaiveBayes};
pub use engine::{EngineKind, FittedModel, ReasonerConfig};
pub use dt::{dt_fit, DecisionTree, DtConfig, Node};
pub use ilp::{ilp_fit, parse_program, Hypothesis, IlpClause, IlpConfig, IlpMode, IlpModel, IlpOutcome};
pub use nscl::{nscl_fit, object_features, DeepSets, NsclConfig, Params};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReasonerError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("{scenes} scenes but {labels} labels")]
    LengthMismatch { scenes: usize, labels: usize },
    #[error("feature width {found} does not match the model width {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("training scenes use different schemas")]
    SchemaMismatch,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse model: {0}")]
    Parse(String),
}
