//! Experiment configuration (TOML) and its resolution into parsed rules,
//! profiles and engines.

use std::fs;
use std::path::{Path, PathBuf};

use nesy_core::generate::GenConfig;
use nesy_core::perception::NoiseProfile;
use nesy_core::reasoners::ReasonerConfig;
use nesy_core::rules::RuleSpec;
use nesy_core::scene::SchemaId;
use serde::{Deserialize, Serialize};

use crate::error::io_err;
use crate::HarnessError;

/// Which grounding of the held-out scenes is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalOn {
    /// The ground-truth scenes: did the engine learn the rule?
    #[default]
    Truth,
    /// The perceived scenes, noise included.
    Perceived,
}

/// A rule file path, or an inline rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleEntry {
    File(PathBuf),
    Inline { name: String, rule: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineEntry {
    /// Defaults to the engine kind; needed when one kind appears twice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub config: ReasonerConfig,
}

fn default_runs() -> usize {
    5
}
fn default_fraction() -> f64 {
    0.8
}
fn default_n_pos() -> usize {
    100
}
fn default_n_neg() -> usize {
    400
}
fn default_schema() -> SchemaId {
    SchemaId::ClevrAttr
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rules: Vec<RuleEntry>,
    pub engines: Vec<EngineEntry>,
    /// Built-in profile names (`oracle`, `sup1` ... `sup100`) or profile files.
    pub profiles: Vec<String>,
    #[serde(default = "default_n_pos")]
    pub n_pos: usize,
    #[serde(default = "default_n_neg")]
    pub n_neg: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_schema")]
    pub schema: SchemaId,
    #[serde(default)]
    pub eval_on: EvalOn,
    /// Wall-clock times make reports differ between invocations, so they
    /// are only recorded on request.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// A config with every file read and every name checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub rules: Vec<NamedRule>,
    pub engines: Vec<NamedEngine>,
    pub profiles: Vec<NoiseProfile>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub runs: usize,
    pub train_fraction: f64,
    pub base_seed: u64,
    pub generator: GenConfig,
    pub eval_on: EvalOn,
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedRule {
    pub name: String,
    pub rule: RuleSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedEngine {
    pub name: String,
    pub config: ReasonerConfig,
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|e| HarnessError::Config { path: path.to_path_buf(), message: e.to_string() })
}

/// Parse a rule from a file, or from the text itself when no such file exists.
pub fn load_rule(spec: &str) -> Result<NamedRule, HarnessError> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_rule_file(path);
    }
    let rule: RuleSpec = spec.parse().map_err(|source| HarnessError::Rule { name: spec.to_string(), source })?;
    Ok(NamedRule { name: spec.to_string(), rule })
}

pub fn load_rule_file(path: &Path) -> Result<NamedRule, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let rule = text.parse().map_err(|source| HarnessError::Rule { name: path.display().to_string(), source })?;
    Ok(NamedRule { name, rule })
}

/// A built-in profile name or a profile file.
pub fn load_profile(spec: &str, base: &Path) -> Result<NoiseProfile, HarnessError> {
    if let Some(p) = NoiseProfile::builtin(spec) {
        return Ok(p);
    }
    let path = base.join(spec);
    if !path.is_file() {
        return Err(HarnessError::Invalid(format!(
            "profile `{spec}` is neither built in ({}) nor a file",
            NoiseProfile::builtin_names().join(", ")
        )));
    }
    read_toml(&path)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        read_toml(path)
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config { path: PathBuf::from("<inline>"), message: e.to_string() })
    }

    /// Read referenced files relative to `base` and validate everything.
    pub fn resolve(&self, base: &Path) -> Result<Experiment, HarnessError> {
        let rules = self
            .rules
            .iter()
            .map(|r| match r {
                RuleEntry::File(p) => load_rule_file(&base.join(p)),
                RuleEntry::Inline { name, rule } => {
                    let rule = rule.parse().map_err(|source| HarnessError::Rule { name: name.clone(), source })?;
                    Ok(NamedRule { name: name.clone(), rule })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let profiles = self.profiles.iter().map(|p| load_profile(p, base)).collect::<Result<Vec<_>, _>>()?;
        let engines = self
            .engines
            .iter()
            .map(|e| NamedEngine {
                name: e.name.clone().unwrap_or_else(|| e.config.kind().label().to_string()),
                config: e.config.clone(),
            })
            .collect();
        let exp = Experiment {
            rules,
            engines,
            profiles,
            n_pos: self.n_pos,
            n_neg: self.n_neg,
            runs: self.runs,
            train_fraction: self.train_fraction,
            base_seed: self.base_seed,
            generator: GenConfig::new(self.schema, 0),
            eval_on: self.eval_on,
            record_timing: self.record_timing,
        };
        exp.validate()?;
        Ok(exp)
    }
}

fn unique<'a>(what: &str, names: impl Iterator<Item = &'a str>) -> Result<(), HarnessError> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(HarnessError::Invalid(format!("duplicate {what} name `{n}`")));
        }
    }
    Ok(())
}

impl Experiment {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::Invalid("runs must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(HarnessError::Invalid("train_fraction must lie strictly between 0 and 1".into()));
        }
        if self.n_pos == 0 || self.n_neg == 0 {
            return Err(HarnessError::Invalid("n_pos and n_neg must be positive".into()));
        }
        if self.rules.is_empty() || self.engines.is_empty() || self.profiles.is_empty() {
            return Err(HarnessError::Invalid("rules, engines and profiles must be non-empty".into()));
        }
        unique("rule", self.rules.iter().map(|r| r.name.as_str()))?;
        unique("engine", self.engines.iter().map(|e| e.name.as_str()))?;
        unique("profile", self.profiles.iter().map(|p| p.label.as_str()))?;
        let schema = self.generator.schema.schema();
        for r in &self.rules {
            r.rule.resolve(schema).map_err(|source| HarnessError::Rule { name: r.name.clone(), source })?;
        }
        for p in &self.profiles {
            p.validate(schema)?;
        }
        for e in &self.engines {
            e.config.validate()?;
        }
        Ok(())
    }
}
