//! The `nesy` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nesy_core::generate::{generate_scenes, read_dataset, write_dataset, GenConfig};
use nesy_core::perception::{perceive, GroundedScene, NoiseProfile};
use nesy_core::reasoners::{EngineKind, FittedModel, ReasonerConfig};
use nesy_core::rules::{evaluate_rule, stratified_split, Split};
use nesy_core::scene::{Scene, SchemaId};
use nesy_core::seed::SeedKey;
use crate::config::{load_profile, load_rule, read_toml};
use crate::report::{read_json, summary_table};
use crate::{emit_report, f1_score, run_experiment, ExperimentConfig, Format, HarnessError, DEFAULT_RQ3_CONFIG};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "nesy", version, about = "Scene generation, simulated perception and rule-learner experiments")]
struct Cli {
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML config: generator (gen), engine (fit) or experiment (repro-rq3).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print nothing on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaArg {
    ClevrAttr,
    Clevr2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Ilp,
    Dt,
    Bn,
    Nscl,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Grounding {
    Truth,
    Perceived,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scene dataset (scene JSON, PNG images for CLEVR_2D, manifest).
    Gen {
        #[arg(long, value_enum, default_value = "clevr-attr")]
        schema: SchemaArg,
        #[arg(long, default_value_t = 100)]
        count: u64,
    },
    /// Apply a rule to a dataset and report its base rate.
    Label {
        #[arg(long)]
        dataset: PathBuf,
        /// Rule file, or rule text.
        #[arg(long)]
        rule: String,
    },
    /// Perceive a dataset through a noise profile.
    Simulate {
        #[arg(long)]
        dataset: PathBuf,
        /// Built-in profile name or profile file.
        #[arg(long)]
        profile: String,
        /// Slot count (default: the schema's maximum object count).
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Fit one engine on a labeled dataset.
    Fit {
        #[arg(long)]
        dataset: PathBuf,
        /// Engine with default hyperparameters; `--config` gives a full engine config instead.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        #[arg(long, value_enum, default_value = "perceived")]
        train_on: Grounding,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
    },
    /// Score a fitted model on its held-out split.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "truth")]
        on: Grounding,
        /// Score every scene rather than the held-out split.
        #[arg(long)]
        all: bool,
    },
    /// Run the rule-learner grid and write CSV, JSON and SVG reports.
    #[command(name = "repro-rq3")]
    ReproRq3 {
        #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
        formats: Vec<Format>,
    },
    /// Convert a JSON report into other formats.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "csv,svg")]
        formats: Vec<Format>,
    },
}

#[derive(Serialize, Deserialize)]
struct LabelEntry {
    scene_id: u64,
    label: bool,
}

#[derive(Serialize, Deserialize)]
struct LabelFile {
    rule: String,
    scenes: usize,
    positives: usize,
    base_rate: f64,
    labels: Vec<LabelEntry>,
}

#[derive(Serialize, Deserialize)]
struct PerceivedFile {
    profile: NoiseProfile,
    seed: u64,
    slots: usize,
    scenes: Vec<GroundedScene>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    engine: ReasonerConfig,
    rule: String,
    train_on: String,
    seed: u64,
    split: Split,
    model: FittedModel,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    }
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    fs::write(path, s).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.to_path_buf(), source })
}

fn print_json<T: Serialize>(quiet: bool, value: &T) {
    if quiet {
        return;
    }
    // a closed pipe (`nesy ... | head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(value).expect("serializable"));
}

/// Scenes plus their labels, checked to line up.
fn labeled_scenes(dataset: &Path) -> Result<(Vec<Scene>, LabelFile), HarnessError> {
    let (_, scenes) = read_dataset(dataset)?;
    let path = dataset.join("labels.json");
    let labels: LabelFile = read_json_file(&path)?;
    if labels.labels.len() != scenes.len() || labels.labels.iter().zip(&scenes).any(|(l, s)| l.scene_id != s.scene_id()) {
        return Err(HarnessError::Config { path, message: "labels do not match the dataset's scenes".into() });
    }
    Ok((scenes, labels))
}

fn groundings(dataset: &Path, scenes: &[Scene], on: Grounding) -> Result<Vec<GroundedScene>, HarnessError> {
    match on {
        Grounding::Truth => Ok(scenes.iter().map(GroundedScene::from_truth).collect()),
        Grounding::Perceived => {
            let path = dataset.join("perceived.json");
            let file: PerceivedFile = read_json_file(&path)?;
            if file.scenes.len() != scenes.len()
                || file.scenes.iter().zip(scenes).any(|(g, s)| g.symbolic.scene_id() != s.scene_id())
            {
                return Err(HarnessError::Config { path, message: "perceived scenes do not match the dataset".into() });
            }
            Ok(file.scenes)
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let seed = cli.seed.unwrap_or(0);
    let quiet = cli.quiet;
    let out = |default: PathBuf| cli.out.clone().unwrap_or(default);
    match cli.command {
        Command::Gen { schema, count } => {
            let schema = match schema {
                SchemaArg::ClevrAttr => SchemaId::ClevrAttr,
                SchemaArg::Clevr2d => SchemaId::Clevr2d,
            };
            let mut cfg = match &cli.config {
                Some(p) => read_toml::<GenConfig>(p)?,
                None => GenConfig::new(schema, seed),
            };
            if let Some(s) = cli.seed {
                cfg.base_seed = s;
            }
            let dir = out(PathBuf::from("dataset"));
            let scenes = generate_scenes(&cfg, count).map_err(nesy_core::generate::DatasetError::from)?;
            let manifest = write_dataset(&scenes, &cfg, &dir)?;
            print_json(quiet, &serde_json::json!({ "dir": dir, "schema": manifest.schema, "scenes": manifest.count }));
        }
        Command::Label { dataset, rule } => {
            let rule = load_rule(&rule)?;
            let (_, scenes) = read_dataset(&dataset)?;
            let labels = scenes
                .iter()
                .map(|s| {
                    let gt = GroundedScene::from_truth(s);
                    evaluate_rule(&rule.rule, &gt.symbolic)
                        .map(|label| LabelEntry { scene_id: s.scene_id(), label })
                        .map_err(|source| HarnessError::Rule { name: rule.name.clone(), source })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let positives = labels.iter().filter(|l| l.label).count();
            let file = LabelFile {
                rule: rule.rule.to_string(),
                scenes: labels.len(),
                positives,
                base_rate: if labels.is_empty() { 0.0 } else { positives as f64 / labels.len() as f64 },
                labels,
            };
            write_json(&out(dataset.join("labels.json")), &file)?;
            print_json(quiet, &serde_json::json!({
                "rule": file.rule, "scenes": file.scenes, "positives": file.positives, "base_rate": file.base_rate
            }));
        }
        Command::Simulate { dataset, profile, slots } => {
            let profile = load_profile(&profile, Path::new("."))?;
            let (manifest, scenes) = read_dataset(&dataset)?;
            let k = slots.unwrap_or(manifest.schema.schema().k_max);
            profile.validate(manifest.schema.schema())?;
            let perceived = scenes
                .iter()
                .map(|s| perceive(s, &profile, k, &mut SeedKey::new(seed).with_str("perceive").with(s.scene_id()).rng()))
                .collect::<Result<Vec<_>, _>>()?;
            let objects: usize = perceived.iter().map(|g| g.symbolic.len()).sum();
            let truth: usize = scenes.iter().map(|s| s.objects().len()).sum();
            write_json(&out(dataset.join("perceived.json")), &PerceivedFile { profile: profile.clone(), seed, slots: k, scenes: perceived })?;
            print_json(quiet, &serde_json::json!({
                "profile": profile.label, "scenes": scenes.len(), "objects_true": truth, "objects_perceived": objects
            }));
        }
        Command::Fit { dataset, engine, train_on, train_fraction } => {
            let engine = match (&cli.config, engine) {
                (Some(p), _) => read_toml::<ReasonerConfig>(p)?,
                (None, Some(e)) => ReasonerConfig::default_for(match e {
                    EngineArg::Ilp => EngineKind::Ilp,
                    EngineArg::Dt => EngineKind::Dt,
                    EngineArg::Bn => EngineKind::Bn,
                    EngineArg::Nscl => EngineKind::Nscl,
                }),
                (None, None) => return Err(HarnessError::Invalid("fit needs --engine or --config".into())),
            };
            if !(train_fraction > 0.0 && train_fraction < 1.0) {
                return Err(HarnessError::Invalid("train_fraction must lie strictly between 0 and 1".into()));
            }
            let (scenes, labels) = labeled_scenes(&dataset)?;
            let grounded = groundings(&dataset, &scenes, train_on)?;
            let y: Vec<bool> = labels.labels.iter().map(|l| l.label).collect();
            let split = stratified_split(&y, train_fraction, SeedKey::new(seed).with_str("split").value());
            let x: Vec<_> = split.train.iter().map(|&i| &grounded[i]).collect();
            let ty: Vec<bool> = split.train.iter().map(|&i| y[i]).collect();
            let model = engine.fit(&x, &ty, SeedKey::new(seed).with_str("engine").value())?;
            let path = out(dataset.join("model.json"));
            let mut summary = serde_json::json!({ "engine": model.kind(), "train": split.train.len(), "model": path });
            if let FittedModel::Ilp(m) = &model {
                summary["outcome"] = serde_json::to_value(m.outcome).unwrap();
                summary["iterations"] = m.iterations_used.into();
                summary["program"] = m.hypothesis.as_ref().map(|h| h.program()).into();
            }
            let train_on = if train_on == Grounding::Truth { "truth" } else { "perceived" };
            write_json(&path, &ModelFile { engine, rule: labels.rule, train_on: train_on.into(), seed, split, model })?;
            print_json(quiet, &summary);
        }
        Command::Eval { dataset, model, on, all } => {
            let file: ModelFile = read_json_file(&model)?;
            let (scenes, labels) = labeled_scenes(&dataset)?;
            let grounded = groundings(&dataset, &scenes, on)?;
            let idx: Vec<usize> = if all { (0..scenes.len()).collect() } else { file.split.test.clone() };
            if let Some(&bad) = idx.iter().find(|&&i| i >= scenes.len()) {
                return Err(HarnessError::Invalid(format!("model split refers to scene index {bad}, dataset has {}", scenes.len())));
            }
            let x: Vec<_> = idx.iter().map(|&i| &grounded[i]).collect();
            let y: Vec<bool> = idx.iter().map(|&i| labels.labels[i].label).collect();
            let scores = f1_score(&file.model.predict_all(&x)?, &y)?;
            if let Some(p) = &cli.out {
                write_json(p, &scores)?;
            }
            print_json(quiet, &scores);
        }
        Command::ReproRq3 { formats } => {
            let (cfg, base) = match &cli.config {
                Some(p) => (ExperimentConfig::from_file(p)?, p.parent().unwrap_or(Path::new(".")).to_path_buf()),
                None => (ExperimentConfig::from_toml(DEFAULT_RQ3_CONFIG)?, PathBuf::from(".")),
            };
            let mut exp = cfg.resolve(&base)?;
            if let Some(s) = cli.seed {
                exp.base_seed = s;
            }
            let dir = cli.out.clone().or(cfg.output_dir.map(|d| base.join(d))).unwrap_or_else(|| PathBuf::from("results"));
            let report = with_pool(cli.jobs, || run_experiment(&exp))??;
            emit_report(&report, &dir, &formats)?;
            if !quiet {
                let _ = write!(std::io::stdout().lock(), "{}", summary_table(&report));
            }
        }
        Command::Report { input, formats } => {
            let report = read_json(&input)?;
            emit_report(&report, &out(PathBuf::from(".")), &formats)?;
        }
    }
    Ok(())
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(HarnessError::Invalid("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| HarnessError::Invalid(e.to_string())),
    }
}

/// Parse `args` (program name first) and run the command. Help and usage
/// errors come back as [`HarnessError::Invalid`].
pub fn run_args<I, T>(args: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| HarnessError::Invalid(e.to_string().trim_end().to_string()))?;
    run(cli)
}

/// Entry point of the binary: JSON error record on stderr, exit code 2 for
/// usage errors and 1 for everything else.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = serde_json::json!({ "error": "usage", "message": e.to_string().trim_end() });
            eprintln!("{record}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("serializable"));
            ExitCode::FAILURE
        }
    }
}
