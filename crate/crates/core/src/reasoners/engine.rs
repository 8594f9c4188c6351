//! Engine-agnostic fit/predict over grounded scenes.

use serde::{Deserialize, Serialize};

use super::*;
use crate::perception::GroundedScene;
use crate::rules::bag_of_properties;
use crate::scene::SchemaId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Ilp,
    Dt,
    Bn,
    Nscl,
}

impl EngineKind {
    pub fn label(self) -> &'static str {
        match self {
            EngineKind::Ilp => "ILP",
            EngineKind::Dt => "DT",
            EngineKind::Bn => "BN",
            EngineKind::Nscl => "NS-CL",
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Engine choice plus its hyperparameters. The seed is supplied at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReasonerConfig {
    Ilp(IlpConfig),
    Dt(DtConfig),
    Bn(BnConfig),
    Nscl(NsclConfig),
}

impl ReasonerConfig {
    pub fn default_for(kind: EngineKind) -> Self {
        match kind {
            EngineKind::Ilp => ReasonerConfig::Ilp(IlpConfig::default()),
            EngineKind::Dt => ReasonerConfig::Dt(DtConfig::default()),
            EngineKind::Bn => ReasonerConfig::Bn(BnConfig::default()),
            EngineKind::Nscl => ReasonerConfig::Nscl(NsclConfig::default()),
        }
    }

    pub fn kind(&self) -> EngineKind {
        match self {
            ReasonerConfig::Ilp(_) => EngineKind::Ilp,
            ReasonerConfig::Dt(_) => EngineKind::Dt,
            ReasonerConfig::Bn(_) => EngineKind::Bn,
            ReasonerConfig::Nscl(_) => EngineKind::Nscl,
        }
    }

    pub fn validate(&self) -> Result<(), ReasonerError> {
        let bad = |m: &str| Err(ReasonerError::InvalidConfig(m.to_string()));
        match self {
            ReasonerConfig::Ilp(c) => c.validate(),
            ReasonerConfig::Dt(c) if c.max_depth == 0 || c.max_depth > 64 => bad("dt: max_depth must be in 1..=64"),
            ReasonerConfig::Dt(c) if c.min_leaf == 0 => bad("dt: min_leaf must be at least 1"),
            ReasonerConfig::Bn(c) if !(c.alpha > 0.0 && c.alpha.is_finite()) => bad("bn: alpha must be positive"),
            ReasonerConfig::Bn(c) if c.count_cap == 0 => bad("bn: count_cap must be at least 1"),
            ReasonerConfig::Nscl(c) if c.batch_size == 0 || c.hidden == 0 => bad("nscl: batch_size and hidden must be positive"),
            ReasonerConfig::Nscl(c) if !(c.learning_rate > 0.0 && c.learning_rate.is_finite()) => {
                bad("nscl: learning_rate must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Fit on grounded scenes. ILP reads the symbolic part, DT and BN its
    /// bag of properties, NS-CL the per-object features with coordinates.
    pub fn fit(&self, scenes: &[&GroundedScene], labels: &[bool], seed: u64) -> Result<FittedModel, ReasonerError> {
        self.validate()?;
        if scenes.is_empty() {
            return Err(ReasonerError::EmptyTrainingSet);
        }
        if scenes.len() != labels.len() {
            return Err(ReasonerError::LengthMismatch { scenes: scenes.len(), labels: labels.len() });
        }
        let schema = scenes[0].symbolic.schema_id();
        if scenes.iter().any(|s| s.symbolic.schema_id() != schema) {
            return Err(ReasonerError::SchemaMismatch);
        }
        let bop = || scenes.iter().map(|s| bag_of_properties(&s.symbolic, s.symbolic.schema())).collect::<Vec<_>>();
        Ok(match self {
            ReasonerConfig::Ilp(c) => {
                let sym: Vec<_> = scenes.iter().map(|s| &s.symbolic).collect();
                FittedModel::Ilp(ilp_fit(&sym, labels, c)?)
            }
            ReasonerConfig::Dt(c) => FittedModel::Dt { schema, tree: dt_fit(&bop(), labels, c)? },
            ReasonerConfig::Bn(c) => FittedModel::Bn { schema, model: bn_fit(&bop(), labels, c)? },
            ReasonerConfig::Nscl(c) => {
                let x: Vec<_> = scenes.iter().map(|s| object_features(s)).collect();
                FittedModel::Nscl { schema, model: nscl_fit(&x, labels, c, seed)? }
            }
        })
    }
}

/// A trained model of any kind. Serializes to JSON: DT as nested nodes,
/// BN as count tables, ILP as program text, NS-CL as weight arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedModel {
    Ilp(IlpModel),
    Dt { schema: SchemaId, tree: DecisionTree },
    Bn { schema: SchemaId, model: NaiveBayes },
    Nscl { schema: SchemaId, model: DeepSets },
}

impl FittedModel {
    pub fn kind(&self) -> EngineKind {
        match self {
            FittedModel::Ilp(_) => EngineKind::Ilp,
            FittedModel::Dt { .. } => EngineKind::Dt,
            FittedModel::Bn { .. } => EngineKind::Bn,
            FittedModel::Nscl { .. } => EngineKind::Nscl,
        }
    }

    pub fn schema(&self) -> SchemaId {
        match self {
            FittedModel::Ilp(m) => m.schema,
            FittedModel::Dt { schema, .. } | FittedModel::Bn { schema, .. } | FittedModel::Nscl { schema, .. } => *schema,
        }
    }

    /// Search iterations, for ILP only.
    pub fn iterations(&self) -> Option<u64> {
        match self {
            FittedModel::Ilp(m) => Some(m.iterations_used),
            _ => None,
        }
    }

    pub fn predict(&self, scene: &GroundedScene) -> Result<bool, ReasonerError> {
        if scene.symbolic.schema_id() != self.schema() {
            return Err(ReasonerError::SchemaMismatch);
        }
        let bop = || bag_of_properties(&scene.symbolic, scene.symbolic.schema());
        match self {
            FittedModel::Ilp(m) => Ok(m.predict(&scene.symbolic)),
            FittedModel::Dt { tree, .. } => tree.predict(&bop()),
            FittedModel::Bn { model, .. } => model.predict(&bop()),
            FittedModel::Nscl { model, .. } => model.predict(&object_features(scene)),
        }
    }

    pub fn predict_all(&self, scenes: &[&GroundedScene]) -> Result<Vec<bool>, ReasonerError> {
        scenes.iter().map(|s| self.predict(s)).collect()
    }
}
