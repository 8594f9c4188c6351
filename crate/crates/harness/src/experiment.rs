//! Seeded multi-run experiments over (rule, engine, profile) cells.

use std::time::Instant;

use nesy_core::reasoners::FittedModel;
use nesy_core::rules::{build_labeled_dataset, DatasetRequest, LabeledDataset};
use nesy_core::seed::SeedKey;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EvalOn, Experiment};
use crate::metrics::{f1_score, mean_std};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rule: String,
    pub engine: String,
    pub profile: String,
    pub run: usize,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iterations: Option<u64>,
    /// ILP search result: `found`, `budget_exhausted` or `space_exhausted`.
    pub outcome: Option<String>,
    pub wall_clock_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub rule: String,
    pub engine: String,
    pub profile: String,
    pub runs: usize,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub precision_mean: f64,
    pub recall_mean: f64,
    pub iterations_mean: Option<f64>,
    pub wall_clock_ms_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleInfo {
    pub name: String,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub base_seed: u64,
    pub eval_on: EvalOn,
    pub rules: Vec<RuleInfo>,
    /// Ordered by rule, engine, profile (config order), then run.
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Seed of the ground-truth pool for one rule. Profiles share it, so every
/// profile perceives the same scenes.
pub fn dataset_seed(base_seed: u64, rule: &str) -> u64 {
    SeedKey::new(base_seed).with_str("dataset").with_str(rule).value()
}

/// Seed of one run; drives both the train/test split and the engine.
pub fn run_seed(base_seed: u64, rule: &str, profile: &str, engine: &str, run: usize) -> u64 {
    SeedKey::new(base_seed).with_str(rule).with_str(profile).with_str(engine).with(run as u64).value()
}

/// Mean and spread of consecutive runs of one cell.
pub fn aggregate(runs: &[RunRecord]) -> Vec<Aggregate> {
    runs.chunk_by(|a, b| (&a.rule, &a.engine, &a.profile) == (&b.rule, &b.engine, &b.profile))
        .map(|cell| {
            let col = |f: fn(&RunRecord) -> f64| cell.iter().map(f).collect::<Vec<_>>();
            let opt_mean = |f: fn(&RunRecord) -> Option<f64>| {
                let v: Option<Vec<f64>> = cell.iter().map(f).collect();
                v.map(|v| mean_std(&v).0)
            };
            let (f1_mean, f1_std) = mean_std(&col(|r| r.f1));
            Aggregate {
                rule: cell[0].rule.clone(),
                engine: cell[0].engine.clone(),
                profile: cell[0].profile.clone(),
                runs: cell.len(),
                f1_mean,
                f1_std,
                precision_mean: mean_std(&col(|r| r.precision)).0,
                recall_mean: mean_std(&col(|r| r.recall)).0,
                iterations_mean: opt_mean(|r| r.iterations.map(|i| i as f64)),
                wall_clock_ms_mean: opt_mean(|r| r.wall_clock_ms),
            }
        })
        .collect()
}

fn one_run(exp: &Experiment, ds: &LabeledDataset, rule: usize, engine: usize, profile: usize, run: usize) -> Result<RunRecord, HarnessError> {
    let rule_name = &exp.rules[rule].name;
    let engine = &exp.engines[engine];
    let profile_name = &exp.profiles[profile].label;
    let seed = run_seed(exp.base_seed, rule_name, profile_name, &engine.name, run);
    let split = ds.resplit(exp.train_fraction, SeedKey::new(seed).with_str("split").value());
    let train: Vec<_> = split.train.iter().map(|&i| &ds.items[i].vae).collect();
    let labels: Vec<bool> = split.train.iter().map(|&i| ds.items[i].label).collect();
    let start = Instant::now();
    let tag = |source| HarnessError::Run {
        rule: rule_name.clone(),
        engine: engine.name.clone(),
        profile: profile_name.clone(),
        run,
        source,
    };
    let model = engine.config.fit(&train, &labels, SeedKey::new(seed).with_str("engine").value()).map_err(tag)?;
    let test: Vec<_> = split
        .test
        .iter()
        .map(|&i| match exp.eval_on {
            EvalOn::Truth => &ds.items[i].gt,
            EvalOn::Perceived => &ds.items[i].vae,
        })
        .collect();
    let predictions = model.predict_all(&test).map_err(tag)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let truth: Vec<bool> = split.test.iter().map(|&i| ds.items[i].label).collect();
    let s = f1_score(&predictions, &truth)?;
    Ok(RunRecord {
        rule: rule_name.clone(),
        engine: engine.name.clone(),
        profile: profile_name.clone(),
        run,
        seed,
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        iterations: model.iterations(),
        outcome: match &model {
            FittedModel::Ilp(m) => serde_json::to_value(m.outcome).ok().and_then(|v| v.as_str().map(String::from)),
            _ => None,
        },
        wall_clock_ms: exp.record_timing.then_some(elapsed),
    })
}

/// Build one dataset per (rule, profile), then fit and score every
/// (engine, run) on it. Cells and runs execute on the current rayon pool;
/// the result does not depend on scheduling.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentReport, HarnessError> {
    exp.validate()?;
    let (nr, np) = (exp.rules.len(), exp.profiles.len());
    let datasets: Vec<LabeledDataset> = (0..nr * np)
        .into_par_iter()
        .map(|cell| {
            let (r, p) = (cell / np, cell % np);
            let rule = &exp.rules[r];
            let profile = &exp.profiles[p];
            let mut req = DatasetRequest::new(
                &rule.rule,
                &exp.generator,
                profile,
                exp.n_pos,
                exp.n_neg,
                dataset_seed(exp.base_seed, &rule.name),
            );
            req.train_fraction = exp.train_fraction;
            build_labeled_dataset(&req).map_err(|source| HarnessError::Dataset {
                rule: rule.name.clone(),
                profile: profile.label.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut jobs = Vec::new();
    for r in 0..nr {
        for e in 0..exp.engines.len() {
            for p in 0..np {
                for run in 0..exp.runs {
                    jobs.push((r, e, p, run));
                }
            }
        }
    }
    let runs: Vec<RunRecord> = jobs
        .into_par_iter()
        .map(|(r, e, p, run)| one_run(exp, &datasets[r * np + p], r, e, p, run))
        .collect::<Result<_, _>>()?;
    Ok(ExperimentReport {
        base_seed: exp.base_seed,
        eval_on: exp.eval_on,
        rules: exp.rules.iter().map(|r| RuleInfo { name: r.name.clone(), rule: r.rule.to_string() }).collect(),
        aggregates: aggregate(&runs),
        runs,
    })
}
