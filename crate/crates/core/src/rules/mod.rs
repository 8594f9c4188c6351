//! Rule language, ground-truth labelling, labelled datasets and
//! Bag-of-Properties features.

mod bop;
mod dataset;
mod eval;
mod parse;
mod spec;

pub use bop::{bag_of_properties, bop_feature_names, bop_width};
pub use dataset::{
    build_labeled_dataset, stratified_split, DatasetRequest, LabeledDataset, LabeledItem, Split, DEFAULT_SAMPLE_BUDGET,
};
pub use eval::{evaluate_rule, satisfies};
pub use parse::parse_rule;
pub use spec::{Clause, Literal, ResolvedClause, ResolvedRule, RuleSpec};

use thiserror::Error;

use crate::generate::GenError;
use crate::perception::PerceptionError;
use crate::scene::SchemaId;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown literal `{concept}={value}` for schema {schema}")]
    UnknownLiteral { concept: String, value: String, schema: SchemaId },
    #[error("rule `{rule}` unsatisfiable: {positives} positives and {negatives} negatives after {budget} scenes")]
    Unsatisfiable { rule: String, positives: usize, negatives: usize, budget: u64 },
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
}
