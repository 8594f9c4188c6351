use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PerceptionError;
use crate::scene::AttributeSchema;

/// Calibration targets for the perception simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub label: String,
    /// Target accuracy per concept name.
    pub concept_accuracy: BTreeMap<String, f64>,
    pub presence_accuracy: f64,
    /// Target mean absolute error per normalized coordinate.
    pub coord_mae: f64,
    /// Probability mass placed on the sampled value of each concept.
    #[serde(default = "default_confident_prob")]
    pub confident_prob: f64,
}

fn default_confident_prob() -> f64 {
    0.9
}

/// Concept accuracy (shape, color, size, material), presence accuracy and
/// coordinate MAE by concept-supervision percentage, for the CLEVR Slot-VAE
/// with k = 10 slots.
const SUPERVISION_TABLE: [(u32, [f64; 4], f64, f64); 7] = [
    (1, [0.7140, 0.2182, 0.8808, 0.8358], 0.6586, 0.2646),
    (5, [0.8079, 0.4446, 0.9614, 0.9042], 0.7849, 0.1603),
    (15, [0.8414, 0.7872, 0.9741, 0.9414], 0.8384, 0.0989),
    (25, [0.8407, 0.8214, 0.9751, 0.9388], 0.8479, 0.0873),
    (50, [0.8644, 0.8821, 0.9780, 0.9540], 0.8865, 0.0772),
    (75, [0.8944, 0.8921, 0.9795, 0.9590], 0.9065, 0.0572),
    (100, [0.9310, 0.9138, 0.9880, 0.9676], 0.9380, 0.0425),
];

const CONCEPTS: [&str; 4] = ["shape", "color", "size", "material"];

impl NoiseProfile {
    /// Perfect perception; grounding reproduces the ground truth.
    pub fn oracle() -> Self {
        NoiseProfile {
            label: "oracle".into(),
            concept_accuracy: CONCEPTS.iter().map(|c| (c.to_string(), 1.0)).collect(),
            presence_accuracy: 1.0,
            coord_mae: 0.0,
            confident_prob: default_confident_prob(),
        }
    }

    /// Names of the shipped profiles, in supervision order.
    pub fn builtin_names() -> Vec<String> {
        std::iter::once("oracle".to_string())
            .chain(SUPERVISION_TABLE.iter().map(|row| format!("sup{}", row.0)))
            .collect()
    }

    pub fn builtin(name: &str) -> Option<Self> {
        if name == "oracle" {
            return Some(Self::oracle());
        }
        let level: u32 = name.strip_prefix("sup")?.parse().ok()?;
        let (_, acc, presence, mae) = SUPERVISION_TABLE.iter().find(|row| row.0 == level)?;
        Some(NoiseProfile {
            label: name.to_string(),
            concept_accuracy: CONCEPTS.iter().zip(acc).map(|(c, a)| (c.to_string(), *a)).collect(),
            presence_accuracy: *presence,
            coord_mae: *mae,
            confident_prob: default_confident_prob(),
        })
    }

    /// True when the profile never corrupts anything.
    pub fn is_noiseless(&self) -> bool {
        self.presence_accuracy == 1.0 && self.coord_mae == 0.0 && self.concept_accuracy.values().all(|&a| a == 1.0)
    }

    /// Accuracy vector in schema concept order.
    pub fn accuracies_for(&self, schema: &AttributeSchema) -> Result<Vec<f64>, PerceptionError> {
        schema
            .concepts
            .iter()
            .map(|c| {
                self.concept_accuracy.get(c.name).copied().ok_or_else(|| PerceptionError::InvalidProfile {
                    label: self.label.clone(),
                    message: format!("no accuracy for concept `{}`", c.name),
                })
            })
            .collect()
    }

    /// Gaussian per-axis std-dev whose half-normal mean equals `coord_mae`.
    pub fn coord_sigma(&self) -> f64 {
        self.coord_mae * (std::f64::consts::PI / 2.0).sqrt()
    }

    pub fn validate(&self, schema: &AttributeSchema) -> Result<(), PerceptionError> {
        let bad = |message: String| PerceptionError::InvalidProfile { label: self.label.clone(), message };
        for (name, a) in &self.concept_accuracy {
            if !(*a > 0.0 && *a <= 1.0) {
                return Err(bad(format!("accuracy of `{name}` must lie in (0, 1], got {a}")));
            }
        }
        self.accuracies_for(schema)?;
        if !(self.presence_accuracy > 0.0 && self.presence_accuracy <= 1.0) {
            return Err(bad(format!("presence accuracy must lie in (0, 1], got {}", self.presence_accuracy)));
        }
        if !(self.coord_mae >= 0.0 && self.coord_mae.is_finite()) {
            return Err(bad(format!("coordinate MAE must be finite and >= 0, got {}", self.coord_mae)));
        }
        let smallest = schema.concepts.iter().map(|c| c.arity()).min().unwrap_or(2);
        if !(self.confident_prob > 1.0 / smallest as f64 && self.confident_prob <= 1.0) {
            return Err(bad(format!(
                "confident_prob must exceed 1/{smallest} so argmax recovers the sampled value, got {}",
                self.confident_prob
            )));
        }
        Ok(())
    }
}
