//! Simulated slot inference and the grounding pipeline that turns slots into
//! background knowledge.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{NoiseProfile, PerceptionError};
use crate::scene::{Scene, SchemaId, Source, SymbolicScene};

/// Presence threshold used by the grounding step.
pub const PRESENCE_THRESHOLD: f64 = 0.5;

/// Stand-in for one slot's decoded latent: coordinates, presence and one
/// categorical score vector per concept (schema order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedSlot {
    pub slot_index: usize,
    pub presence_prob: f64,
    pub concept_scores: Vec<Vec<f64>>,
    pub coords: Vec<f64>,
}

/// Simulator output with the hidden slot-to-object correspondence.
#[derive(Debug, Clone)]
pub struct SlotTrace {
    pub slots: Vec<PredictedSlot>,
    /// Ground-truth object behind each slot (`None` for empty slots).
    pub object_of_slot: Vec<Option<usize>>,
}

fn scores_for(value: u8, arity: usize, confident: f64) -> Vec<f64> {
    let rest = if arity > 1 { (1.0 - confident) / (arity - 1) as f64 } else { 0.0 };
    (0..arity).map(|i| if i == value as usize { confident } else { rest }).collect()
}

/// Value kept with probability `accuracy`, otherwise uniform over the wrong values.
fn corrupt<R: Rng + ?Sized>(truth: u8, arity: usize, accuracy: f64, rng: &mut R) -> u8 {
    if arity < 2 || rng.random::<f64>() < accuracy {
        return truth;
    }
    let wrong = rng.random_range(0..arity - 1) as u8;
    if wrong >= truth {
        wrong + 1
    } else {
        wrong
    }
}

fn presence<R: Rng + ?Sized>(keep: bool, rng: &mut R) -> f64 {
    if keep {
        rng.random_range(PRESENCE_THRESHOLD..=1.0)
    } else {
        rng.random_range(0.0..PRESENCE_THRESHOLD)
    }
}

/// Corrupt a scene into `k` slots according to `profile`.
pub fn simulate_slots_traced<R: Rng + ?Sized>(
    scene: &Scene,
    profile: &NoiseProfile,
    k: usize,
    rng: &mut R,
) -> Result<SlotTrace, PerceptionError> {
    let schema = scene.schema();
    let n = scene.objects().len();
    if n > k {
        return Err(PerceptionError::TooManyObjects { objects: n, slots: k });
    }
    profile.validate(schema)?;
    let accuracy = profile.accuracies_for(schema)?;
    let sigma = profile.coord_sigma();
    let normal = Normal::new(0.0, sigma).map_err(|e| PerceptionError::InvalidProfile {
        label: profile.label.clone(),
        message: e.to_string(),
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut slots = Vec::with_capacity(k);
    let mut object_of_slot = Vec::with_capacity(k);
    for slot_index in 0..k {
        let slot = match order.get(slot_index) {
            Some(&obj) => {
                let o = &scene.objects()[obj];
                let concept_scores = schema
                    .concepts
                    .iter()
                    .zip(&o.attributes)
                    .zip(&accuracy)
                    .map(|((c, &truth), &a)| {
                        scores_for(corrupt(truth, c.arity(), a, rng), c.arity(), profile.confident_prob)
                    })
                    .collect();
                let coords = o
                    .position
                    .iter()
                    .map(|&x| if sigma > 0.0 { x + normal.sample(rng) } else { x })
                    .collect();
                let keep = rng.random::<f64>() < profile.presence_accuracy;
                object_of_slot.push(Some(obj));
                PredictedSlot { slot_index, presence_prob: presence(keep, rng), concept_scores, coords }
            }
            None => {
                let concept_scores = schema
                    .concepts
                    .iter()
                    .map(|c| scores_for(rng.random_range(0..c.arity()) as u8, c.arity(), profile.confident_prob))
                    .collect();
                let coords = (0..schema.position_dims).map(|_| rng.random::<f64>()).collect();
                let discard = rng.random::<f64>() < profile.presence_accuracy;
                object_of_slot.push(None);
                PredictedSlot { slot_index, presence_prob: presence(!discard, rng), concept_scores, coords }
            }
        };
        slots.push(slot);
    }
    Ok(SlotTrace { slots, object_of_slot })
}

pub fn simulate_slots<R: Rng + ?Sized>(
    scene: &Scene,
    profile: &NoiseProfile,
    k: usize,
    rng: &mut R,
) -> Result<Vec<PredictedSlot>, PerceptionError> {
    simulate_slots_traced(scene, profile, k, rng).map(|t| t.slots)
}

/// Grounded symbols plus the surviving slots' coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundedScene {
    pub symbolic: SymbolicScene,
    pub coords: Vec<Vec<f64>>,
}

impl GroundedScene {
    /// The ground truth viewed as a perfect grounding.
    pub fn from_truth(scene: &Scene) -> Self {
        GroundedScene { symbolic: crate::scene::symbolic_scene_from_ground_truth(scene), coords: scene.coords() }
    }
}

fn argmax(scores: &[f64]) -> u8 {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best as u8
}

/// Presence filtering, per-concept argmax and relation derivation.
pub fn ground_slots(
    slots: &[PredictedSlot],
    schema: SchemaId,
    scene_id: u64,
    threshold: f64,
) -> Result<GroundedScene, PerceptionError> {
    let s = schema.schema();
    let mut rows = Vec::new();
    let mut coords = Vec::new();
    for slot in slots {
        if slot.concept_scores.len() != s.concepts.len() || slot.coords.len() != s.position_dims {
            return Err(PerceptionError::SlotShape { slot: slot.slot_index, schema });
        }
        if slot.presence_prob < threshold {
            continue;
        }
        let mut row = Vec::with_capacity(s.concepts.len());
        for (c, scores) in s.concepts.iter().zip(&slot.concept_scores) {
            if scores.len() != c.arity() {
                return Err(PerceptionError::SlotShape { slot: slot.slot_index, schema });
            }
            row.push(argmax(scores));
        }
        rows.push(row);
        coords.push(slot.coords.clone());
    }
    let symbolic = SymbolicScene::from_rows(scene_id, schema, Source::SimulatedVae, rows, &coords);
    Ok(GroundedScene { symbolic, coords })
}

pub fn pipeline_ground(
    slots: &[PredictedSlot],
    schema: SchemaId,
    scene_id: u64,
    threshold: f64,
) -> Result<SymbolicScene, PerceptionError> {
    ground_slots(slots, schema, scene_id, threshold).map(|g| g.symbolic)
}

/// Simulate and ground in one step.
pub fn perceive<R: Rng + ?Sized>(
    scene: &Scene,
    profile: &NoiseProfile,
    k: usize,
    rng: &mut R,
) -> Result<GroundedScene, PerceptionError> {
    let slots = simulate_slots(scene, profile, k, rng)?;
    ground_slots(&slots, scene.schema_id(), scene.scene_id(), PRESENCE_THRESHOLD)
}
