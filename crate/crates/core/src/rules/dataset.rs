use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{RuleError, RuleSpec};
use crate::generate::{generate_scene, GenConfig};
use crate::perception::{perceive, GroundedScene, NoiseProfile};
use crate::scene::Source;
use crate::seed::SeedKey;

/// Candidate scenes drawn before a rule is declared unsatisfiable.
pub const DEFAULT_SAMPLE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
/// Ground truth and perceived groundings of one scene; the label always
/// comes from the ground truth.
pub struct LabeledItem {
    pub gt: GroundedScene,
    pub vae: GroundedScene,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub rule: RuleSpec,
    pub profile: String,
    pub items: Vec<LabeledItem>,
    pub neg_pos_ratio: f64,
    pub split: Split,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DatasetRequest<'a> {
    pub rule: &'a RuleSpec,
    pub generator: &'a GenConfig,
    pub profile: &'a NoiseProfile,
    pub n_pos: usize,
    pub n_neg: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub sample_budget: u64,
}

impl<'a> DatasetRequest<'a> {
    pub fn new(rule: &'a RuleSpec, generator: &'a GenConfig, profile: &'a NoiseProfile, n_pos: usize, n_neg: usize, seed: u64) -> Self {
        DatasetRequest { rule, generator, profile, n_pos, n_neg, seed, train_fraction: 0.8, sample_budget: DEFAULT_SAMPLE_BUDGET }
    }
}

/// Rejection-sample generated scenes into positive and negative buckets.
///
/// Candidates are visited in scene-index order, so the ground truth pool
/// depends only on the rule, generator and seed; the profile only changes
/// the perceived copies.
pub fn build_labeled_dataset(req: &DatasetRequest) -> Result<LabeledDataset, RuleError> {
    let schema = req.generator.schema.schema();
    let resolved = req.rule.resolve(schema)?;
    req.profile.validate(schema)?;
    let mut gen = req.generator.clone();
    gen.base_seed = SeedKey::new(req.generator.base_seed).with(req.seed).value();

    let (mut pos, mut neg) = (0, 0);
    let mut items = Vec::with_capacity(req.n_pos + req.n_neg);
    let mut index = 0u64;
    while pos < req.n_pos || neg < req.n_neg {
        if index >= req.sample_budget {
            return Err(RuleError::Unsatisfiable {
                rule: req.rule.to_string(),
                positives: pos,
                negatives: neg,
                budget: req.sample_budget,
            });
        }
        let scene = generate_scene(&gen, index)?;
        index += 1;
        let gt = GroundedScene::from_truth(&scene);
        let label = resolved.evaluate(&gt.symbolic);
        if label && pos < req.n_pos {
            pos += 1;
        } else if !label && neg < req.n_neg {
            neg += 1;
        } else {
            continue;
        }
        let vae = if req.profile.is_noiseless() {
            GroundedScene { symbolic: gt.symbolic.clone().with_source(Source::SimulatedVae), coords: gt.coords.clone() }
        } else {
            let mut rng = SeedKey::new(req.seed).with_str("perceive").with(scene.scene_id()).rng();
            perceive(&scene, req.profile, schema.k_max, &mut rng)?
        };
        items.push(LabeledItem { gt, vae, label });
    }
    let labels: Vec<bool> = items.iter().map(|i| i.label).collect();
    let split = stratified_split(&labels, req.train_fraction, SeedKey::new(req.seed).with_str("split").value());
    Ok(LabeledDataset {
        rule: req.rule.clone(),
        profile: req.profile.label.clone(),
        items,
        neg_pos_ratio: if req.n_pos == 0 { f64::INFINITY } else { req.n_neg as f64 / req.n_pos as f64 },
        split,
        seed: req.seed,
    })
}

/// Shuffle each class separately and give `fraction` of it (rounded) to
/// training, so both halves keep the dataset's base rate.
pub fn stratified_split(labels: &[bool], fraction: f64, seed: u64) -> Split {
    let mut rng = SeedKey::new(seed).rng();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let cut = (idx.len() as f64 * fraction).round() as usize;
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Split { train, test }
}

impl LabeledDataset {
    pub fn positives(&self) -> usize {
        self.items.iter().filter(|i| i.label).count()
    }

    pub fn resplit(&self, fraction: f64, seed: u64) -> Split {
        let labels: Vec<bool> = self.items.iter().map(|i| i.label).collect();
        stratified_split(&labels, fraction, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::evaluate_rule;
    use crate::scene::SchemaId;

    fn request<'a>(rule: &'a RuleSpec, gen: &'a GenConfig, profile: &'a NoiseProfile) -> DatasetRequest<'a> {
        DatasetRequest::new(rule, gen, profile, 100, 400, 3)
    }

    #[test]
    fn exact_quotas_and_base_rate() {
        let rule: RuleSpec = "exists(size=large & color=red & shape=sphere)".parse().unwrap();
        let gen = GenConfig::new(SchemaId::ClevrAttr, 1);
        let profile = NoiseProfile::builtin("sup15").unwrap();
        let ds = build_labeled_dataset(&request(&rule, &gen, &profile)).unwrap();
        assert_eq!(ds.items.len(), 500);
        assert_eq!(ds.positives(), 100);
        assert_eq!(ds.neg_pos_ratio, 4.0);
        assert_eq!(ds.split.train.len(), 400);
        let train_pos = ds.split.train.iter().filter(|&&i| ds.items[i].label).count();
        assert_eq!(train_pos, 80);
        for item in &ds.items {
            assert_eq!(evaluate_rule(&rule, &item.gt.symbolic).unwrap(), item.label);
        }
        assert_eq!(build_labeled_dataset(&request(&rule, &gen, &profile)).unwrap(), ds);
    }

    #[test]
    fn noiseless_profile_keeps_labels() {
        let rule: RuleSpec = "forall(shape=sphere -> color=blue)".parse().unwrap();
        let gen = GenConfig::new(SchemaId::ClevrAttr, 1);
        let oracle = NoiseProfile::oracle();
        let ds = build_labeled_dataset(&request(&rule, &gen, &oracle)).unwrap();
        for item in &ds.items {
            assert_eq!(evaluate_rule(&rule, &item.vae.symbolic).unwrap(), item.label);
        }
        // ground truth pool is shared across profiles
        let noisy = NoiseProfile::builtin("sup5").unwrap();
        let other = build_labeled_dataset(&request(&rule, &gen, &noisy)).unwrap();
        assert!(ds.items.iter().zip(&other.items).all(|(a, b)| a.gt == b.gt));
    }

    #[test]
    fn contradictory_rule_is_unsatisfiable() {
        let rule: RuleSpec = "exists(color=red & color=blue)".parse().unwrap();
        let gen = GenConfig::new(SchemaId::Clevr2d, 1);
        let profile = NoiseProfile::oracle();
        let mut req = request(&rule, &gen, &profile);
        req.sample_budget = 2000;
        assert!(matches!(build_labeled_dataset(&req), Err(RuleError::Unsatisfiable { positives: 0, .. })));
    }
}
