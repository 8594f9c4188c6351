use serde::{Deserialize, Serialize};

use super::hungarian::match_rectangular;
use super::{GroundedScene, PerceptionError};
use crate::scene::Scene;

/// Predicate-quality counters, additive across scenes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityCounts {
    /// Correct predictions per concept over matched pairs.
    pub concept_correct: Vec<u64>,
    pub matched: u64,
    pub missed: u64,
    pub false_alarms: u64,
    pub slots: u64,
    pub coord_abs_error: f64,
    pub coord_components: u64,
}

impl QualityCounts {
    pub fn merge(&mut self, other: &QualityCounts) {
        if self.concept_correct.len() < other.concept_correct.len() {
            self.concept_correct.resize(other.concept_correct.len(), 0);
        }
        for (a, b) in self.concept_correct.iter_mut().zip(&other.concept_correct) {
            *a += b;
        }
        self.matched += other.matched;
        self.missed += other.missed;
        self.false_alarms += other.false_alarms;
        self.slots += other.slots;
        self.coord_abs_error += other.coord_abs_error;
        self.coord_components += other.coord_components;
    }

    /// Fraction of matched objects whose concept was predicted correctly.
    pub fn concept_accuracy(&self, concept: usize) -> f64 {
        ratio(self.concept_correct.get(concept).copied().unwrap_or(0), self.matched)
    }

    /// Fraction of slots whose keep/discard decision was right.
    pub fn presence_accuracy(&self) -> f64 {
        let true_negatives = self.slots.saturating_sub(self.matched + self.missed + self.false_alarms);
        ratio(self.matched + true_negatives, self.slots)
    }

    pub fn coord_mae(&self) -> f64 {
        if self.coord_components == 0 {
            0.0
        } else {
            self.coord_abs_error / self.coord_components as f64
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Compare a grounding against the truth. Predictions are matched to ground
/// truth objects by minimum total coordinate L2 distance; `slots` is the
/// slot count k the grounding came from.
pub fn predicate_quality(pred: &GroundedScene, truth: &Scene, slots: usize) -> Result<QualityCounts, PerceptionError> {
    if pred.symbolic.schema_id() != truth.schema_id() {
        return Err(PerceptionError::SchemaMismatch);
    }
    let gt = truth.objects();
    let cost: Vec<Vec<f64>> = pred
        .coords
        .iter()
        .map(|p| {
            gt.iter()
                .map(|o| p.iter().zip(&o.position).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                .collect()
        })
        .collect();
    let assignment = match_rectangular(&cost, gt.len())?;
    predicate_quality_assigned(pred, truth, slots, &assignment)
}

/// Same counters under a given association: `assignment[p]` is the ground
/// truth object predicted object `p` stands for, if any.
pub fn predicate_quality_assigned(
    pred: &GroundedScene,
    truth: &Scene,
    slots: usize,
    assignment: &[Option<usize>],
) -> Result<QualityCounts, PerceptionError> {
    if pred.symbolic.schema_id() != truth.schema_id() {
        return Err(PerceptionError::SchemaMismatch);
    }
    let schema = truth.schema();
    let gt = truth.objects();
    let mut counts = QualityCounts {
        concept_correct: vec![0; schema.concepts.len()],
        slots: slots as u64,
        ..Default::default()
    };
    for (p, m) in assignment.iter().enumerate() {
        match m {
            Some(g) => {
                counts.matched += 1;
                let row = pred.symbolic.object(p);
                for (c, (a, b)) in row.iter().zip(&gt[*g].attributes).enumerate() {
                    if a == b {
                        counts.concept_correct[c] += 1;
                    }
                }
                for (a, b) in pred.coords[p].iter().zip(&gt[*g].position) {
                    counts.coord_abs_error += (a - b).abs();
                    counts.coord_components += 1;
                }
            }
            None => counts.false_alarms += 1,
        }
    }
    counts.missed = gt.len() as u64 - counts.matched;
    Ok(counts)
}
