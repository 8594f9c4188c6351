//! Calibrated perception simulator, symbol grounding and predicate quality.

mod hungarian;
mod noise;
mod quality;
mod slots;

pub use hungarian::{hungarian_match, match_rectangular, Assignment, PAD_COST};
pub use noise::NoiseProfile;
pub use quality::{predicate_quality, predicate_quality_assigned, QualityCounts};
pub use slots::{
    ground_slots, perceive, pipeline_ground, simulate_slots, simulate_slots_traced, GroundedScene, PredictedSlot,
    SlotTrace, PRESENCE_THRESHOLD,
};

use thiserror::Error;

use crate::scene::SchemaId;

#[derive(Debug, Error)]
pub enum PerceptionError {
    #[error("scene has {objects} objects but only {slots} slots")]
    TooManyObjects { objects: usize, slots: usize },
    #[error("noise profile `{label}`: {message}")]
    InvalidProfile { label: String, message: String },
    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },
    #[error("cost matrix with {rows} rows has a row {row} of length {cols}")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("slot {slot} does not match the {schema} schema layout")]
    SlotShape { slot: usize, schema: SchemaId },
    #[error("prediction and ground truth use different schemas")]
    SchemaMismatch,
}
